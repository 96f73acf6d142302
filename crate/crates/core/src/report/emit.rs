use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use super::ProjectReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown report format `{0}`, expected json or csv")]
    UnknownFormat(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: invalid report at `{pointer}`: {message}")]
    Json {
        path: PathBuf,
        pointer: String,
        message: String,
    },
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn report_to_json(report: &ProjectReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// JSON goes to the file `dest`; CSV tables go into the directory `dest`.
pub fn emit_report(report: &ProjectReport, format: Format, dest: &Path) -> Result<(), ReportError> {
    match format {
        Format::Json => {
            if let Some(parent) = dest.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            fs::write(dest, report_to_json(report)).map_err(io_err(dest))
        }
        Format::Csv => write_csv_tables(std::slice::from_ref(report), dest),
    }
}

pub fn read_report(path: &Path) -> Result<ProjectReport, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| ReportError::Json {
        path: path.to_path_buf(),
        pointer: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub const CSV_TABLES: [&str; 5] = [
    "tryblocks.csv",
    "diversity.csv",
    "sources.csv",
    "strategies.csv",
    "actions.csv",
];

type Rows = Vec<Vec<String>>;

fn tables(reports: &[ProjectReport]) -> [(&'static str, &'static [&'static str], Rows); 5] {
    let mut tryblocks = Rows::new();
    let mut diversity = Rows::new();
    let mut sources = Rows::new();
    let mut strategies = Rows::new();
    let mut actions = Rows::new();
    for r in reports {
        let p = &r.project;
        for b in &r.diversity.buckets {
            diversity.push(vec![
                p.clone(),
                b.bucket.clone(),
                b.fraction.to_string(),
                r.diversity.total_types.to_string(),
            ]);
        }
        for t in &r.try_blocks {
            tryblocks.push(vec![
                p.clone(),
                t.try_id.clone(),
                t.file.clone(),
                t.line.to_string(),
                t.total.to_string(),
                t.propagated.to_string(),
                t.propagated_recoverable.to_string(),
            ]);
            for e in &t.exceptions {
                let kinds: Vec<&str> = e.evidence_kinds.iter().map(|k| k.token()).collect();
                sources.push(vec![
                    p.clone(),
                    e.exception_type.clone(),
                    t.try_id.clone(),
                    e.distinct_methods.to_string(),
                    kinds.join("|"),
                ]);
                strategies.push(vec![
                    p.clone(),
                    t.try_id.clone(),
                    e.exception_type.clone(),
                    e.outcome.token().to_string(),
                ]);
            }
            for h in &t.handlers {
                for a in &h.actions {
                    actions.push(vec![p.clone(), h.catch_id.clone(), a.to_string()]);
                }
            }
        }
    }
    [
        (
            CSV_TABLES[0],
            &["project", "try_id", "file", "line", "total", "propagated", "propagated_recoverable"],
            tryblocks,
        ),
        (CSV_TABLES[1], &["project", "bucket", "fraction", "total_types"], diversity),
        (
            CSV_TABLES[2],
            &["project", "exception_type", "try_id", "distinct_methods", "evidence_kinds"],
            sources,
        ),
        (CSV_TABLES[3], &["project", "try_id", "exception_type", "strategy"], strategies),
        (CSV_TABLES[4], &["project", "catch_id", "action"], actions),
    ]
}

/// Writes the five CSV tables for all reports into `dir`.
pub fn write_csv_tables(reports: &[ProjectReport], dir: &Path) -> Result<(), ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (file, header, rows) in tables(reports) {
        let path = dir.join(file);
        let csv_err = |source| ReportError::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(io_err(&path))?;
    }
    Ok(())
}
