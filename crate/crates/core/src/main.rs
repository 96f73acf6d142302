fn main() {
    std::process::exit(exflow::cli::run(std::env::args_os()));
}
