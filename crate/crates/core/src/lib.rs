pub mod syntax;
pub mod model;
pub mod classify;
pub mod flow;
pub mod pipeline;
pub mod report;
pub mod cli;
