//! The `exflow` command line.
//!
//! Exit codes: 0 clean, 1 lint findings under `--fail-on`, 2 usage or
//! configuration error, 3 parse error under `--strict` or model error.

mod config;
mod lint;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::flow::FlowOptions;
use crate::model::{load_platform_models, PlatformModel};
use crate::pipeline::{analyze_units, load_project, Analysis, AnalysisOptions, Project};
use crate::report::{
    aggregate_project, emit_report, read_report, report_to_json, wilcoxon_rank_sum, write_csv_tables,
    Format, Outcome, ProjectReport, StatResult,
};

pub use config::{Config, DEFAULT_GENERIC_CATCH};
pub use lint::{lint, LintFinding, LintRule};

pub const PLATFORM_PATH_VAR: &str = "EXFLOW_PLATFORM_PATH";

#[derive(Debug, Parser)]
#[command(name = "exflow", version, about = "Exception flow analysis for Java projects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a project and write its report.
    Analyze(AnalyzeArgs),
    /// Print actionable findings.
    Lint(LintArgs),
    /// Convert JSON reports into CSV tables.
    Report(ReportArgs),
    /// Compare a metric between two groups of reports.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct ProjectArgs {
    /// Root directory of the Java sources.
    #[arg(long, value_name = "DIR")]
    project: PathBuf,
    /// Platform model file; repeatable.
    #[arg(long, value_name = "FILE")]
    platform: Vec<PathBuf>,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Fail on files that do not parse instead of skipping them.
    #[arg(long)]
    strict: bool,
    /// Count the methods that raise an exception instead of the direct callees.
    #[arg(long)]
    transitive_origins: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    project: ProjectArgs,
    /// Report file for json, directory for csv; json goes to stdout if absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct LintArgs {
    #[command(flatten)]
    project: ProjectArgs,
    /// Exit with 1 when a finding of these rules is reported.
    #[arg(long, value_enum, value_delimiter = ',', value_name = "RULE[,RULE]")]
    fail_on: Vec<LintRule>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// JSON reports written by `analyze`.
    #[arg(long, num_args = 1.., required = true, value_name = "FILE")]
    inputs: Vec<PathBuf>,
    /// Output directory for the CSV tables.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long, num_args = 1.., required = true, value_name = "FILE")]
    group_a: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true, value_name = "FILE")]
    group_b: Vec<PathBuf>,
    /// total, propagated, propagated_recoverable, specific_ratio or action:<Name>.
    #[arg(long, value_name = "NAME")]
    metric: String,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

/// A failed command: exit code and what to print on stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn fatal(message: impl Into<String>) -> Failure {
    Failure {
        code: 3,
        message: message.into(),
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze_cmd(a),
        Command::Lint(a) => lint_cmd(a),
        Command::Report(a) => report_cmd(a),
        Command::Stats(a) => stats_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("exflow: {}", f.message);
            f.code
        }
    }
}

/// Platform files from the environment: directories contribute their
/// `*.json` files, plain files are taken as they are.
fn platform_from_env() -> Vec<PathBuf> {
    let Some(value) = std::env::var_os(PLATFORM_PATH_VAR) else {
        return Vec::new();
    };
    let mut files = Vec::new();
    for dir in std::env::split_paths(&value) {
        if dir.is_file() {
            files.push(dir);
            continue;
        }
        let Ok(entries) = std::fs::read_dir(&dir) else { continue };
        let mut found: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
            .collect();
        found.sort();
        files.extend(found);
    }
    files
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    match path {
        Some(p) => Config::load(p).map_err(usage),
        None => Ok(Config::default()),
    }
}

struct Prepared {
    config: Config,
    project: Project,
    analysis: Analysis,
}

fn prepare(args: &ProjectArgs) -> Result<Prepared, Failure> {
    let mut config = load_config(args.config.as_deref())?;
    config.transitive_origins |= args.transitive_origins;
    let mut platform_files = args.platform.clone();
    platform_files.extend(config.platform.iter().cloned());
    if platform_files.is_empty() {
        platform_files = platform_from_env();
    }
    if platform_files.is_empty() {
        return Err(usage(format!(
            "no platform model given; pass --platform FILE or set {PLATFORM_PATH_VAR}"
        )));
    }
    let platform: PlatformModel = load_platform_models(&platform_files).map_err(|e| usage(e.to_string()))?;
    if !args.project.is_dir() {
        return Err(usage(format!("{}: not a directory", args.project.display())));
    }
    let project = load_project(&args.project).map_err(|e| usage(format!("{}: {e}", args.project.display())))?;
    for e in &project.parse_errors {
        eprintln!("{e}");
    }
    if args.strict && !project.parse_errors.is_empty() {
        return Err(fatal(format!(
            "{} file(s) failed to parse",
            project.parse_errors.len()
        )));
    }
    let options = AnalysisOptions {
        flow: FlowOptions {
            transitive_origins: config.transitive_origins,
        },
        detectors: config.detectors.clone(),
    };
    let analysis = analyze_units(&project.units, &platform, &options).map_err(|e| fatal(e.to_string()))?;
    for d in analysis.model.diagnostics() {
        eprintln!("{d}");
    }
    Ok(Prepared {
        config,
        project,
        analysis,
    })
}

fn analyze_cmd(args: AnalyzeArgs) -> Result<i32, Failure> {
    let p = prepare(&args.project)?;
    let report = aggregate_project(&p.analysis, &p.project.name);
    match (args.out, args.format) {
        (Some(out), format) => emit_report(&report, format.into(), &out).map_err(|e| usage(e.to_string()))?,
        (None, FormatArg::Json) => print!("{}", report_to_json(&report)),
        (None, FormatArg::Csv) => return Err(usage("--format csv needs --out DIR")),
    }
    Ok(0)
}

fn lint_cmd(args: LintArgs) -> Result<i32, Failure> {
    let p = prepare(&args.project)?;
    let findings = lint(&p.analysis, &p.config.generic_catch);
    let mut stdout = std::io::stdout().lock();
    for f in &findings {
        let _ = writeln!(stdout, "{f}");
    }
    let fail = findings.iter().any(|f| args.fail_on.contains(&f.rule));
    Ok(if fail { 1 } else { 0 })
}

fn read_reports(paths: &[PathBuf]) -> Result<Vec<ProjectReport>, Failure> {
    paths
        .iter()
        .map(|p| read_report(p).map_err(|e| usage(e.to_string())))
        .collect()
}

fn report_cmd(args: ReportArgs) -> Result<i32, Failure> {
    let reports = read_reports(&args.inputs)?;
    match args.format {
        FormatArg::Csv => write_csv_tables(&reports, &args.out).map_err(|e| usage(e.to_string()))?,
        FormatArg::Json => {
            let mut text = serde_json::to_string_pretty(&reports).expect("reports serialize");
            text.push('\n');
            std::fs::write(&args.out, text).map_err(|e| usage(format!("{}: {e}", args.out.display())))?;
        }
    }
    Ok(0)
}

/// Sample of `metric` drawn from a group of reports.
pub fn metric_values(reports: &[ProjectReport], metric: &str) -> Result<Vec<f64>, String> {
    let per_try = |f: fn(&crate::report::TryRow) -> usize| -> Vec<f64> {
        reports
            .iter()
            .flat_map(|r| r.try_blocks.iter().map(f))
            .map(|v| v as f64)
            .collect()
    };
    match metric {
        "total" => Ok(per_try(|t| t.total)),
        "propagated" => Ok(per_try(|t| t.propagated)),
        "propagated_recoverable" => Ok(per_try(|t| t.propagated_recoverable)),
        "specific_ratio" => Ok(reports
            .iter()
            .filter_map(|r| {
                let outcomes = r.try_blocks.iter().flat_map(|t| t.exceptions.iter().map(|e| e.outcome));
                let (specific, handled) = outcomes.fold((0usize, 0usize), |(s, h), o| match o {
                    Outcome::Specific => (s + 1, h + 1),
                    Outcome::Subsumption => (s, h + 1),
                    Outcome::Propagated => (s, h),
                });
                (handled > 0).then(|| specific as f64 / handled as f64)
            })
            .collect()),
        m => {
            let name = m
                .strip_prefix("action:")
                .ok_or_else(|| format!("unknown metric `{m}`"))?;
            let action = crate::classify::Action::parse(name).ok_or_else(|| format!("unknown action `{name}`"))?;
            Ok(reports
                .iter()
                .filter_map(|r| {
                    let handlers: Vec<_> = r.try_blocks.iter().flat_map(|t| &t.handlers).collect();
                    let with = handlers.iter().filter(|h| h.actions.contains(&action)).count();
                    (!handlers.is_empty()).then(|| 100.0 * with as f64 / handlers.len() as f64)
                })
                .collect())
        }
    }
}

#[derive(Debug, Serialize)]
struct StatsOutput<'a> {
    metric: &'a str,
    n: usize,
    m: usize,
    #[serde(flatten)]
    result: StatResult,
}

fn stats_cmd(args: StatsArgs) -> Result<i32, Failure> {
    let config = load_config(args.config.as_deref())?;
    let a = metric_values(&read_reports(&args.group_a)?, &args.metric).map_err(usage)?;
    let b = metric_values(&read_reports(&args.group_b)?, &args.metric).map_err(usage)?;
    let result = wilcoxon_rank_sum(&a, &b, config.exact_cutoff).map_err(|e| usage(format!("{}: {e}", args.metric)))?;
    let out = StatsOutput {
        metric: &args.metric,
        n: a.len(),
        m: b.len(),
        result,
    };
    let mut text = serde_json::to_string_pretty(&out).expect("stats serialize");
    text.push('\n');
    match args.out {
        Some(path) => std::fs::write(&path, text).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(0)
}
