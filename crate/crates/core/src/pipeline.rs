//! Project loading and the parse → model → flow → classify pipeline.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use crate::classify::{classify_handlers, DetectorConfig, HandlerClassification};
use crate::flow::{analyze_try_block, compute_method_exception_sets, FlowOptions, MethodExceptionSets, TryBlockAnalysis};
use crate::model::{build_semantic_model, ModelError, PlatformModel, SemanticModel};
use crate::syntax::{parse_compilation_unit, CompilationUnit, ParseError};

#[derive(Debug)]
pub struct Project {
    pub name: String,
    pub root: PathBuf,
    /// Units that parsed, ordered by relative path.
    pub units: Vec<CompilationUnit>,
    pub parse_errors: Vec<ParseError>,
}

/// Parses every `.java` file below `root`. File names in positions are
/// relative to `root` and use `/` separators.
pub fn load_project(root: &Path) -> std::io::Result<Project> {
    let mut files = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(std::io::Error::other)?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "java") {
            let rel = entry
                .path()
                .strip_prefix(root)
                .expect("walkdir yields paths below the root")
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect::<Vec<_>>()
                .join("/");
            files.push((rel, entry.into_path()));
        }
    }
    files.sort();
    let parsed: Vec<std::io::Result<Result<CompilationUnit, ParseError>>> = files
        .par_iter()
        .map(|(rel, path)| {
            let source = std::fs::read_to_string(path)?;
            Ok(parse_compilation_unit(&source, rel))
        })
        .collect();
    let mut units = Vec::new();
    let mut parse_errors = Vec::new();
    for r in parsed {
        match r? {
            Ok(u) => units.push(u),
            Err(e) => parse_errors.push(e),
        }
    }
    let name = root
        .canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| root.display().to_string());
    Ok(Project {
        name,
        root: root.to_path_buf(),
        units,
        parse_errors,
    })
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisOptions {
    pub flow: FlowOptions,
    pub detectors: DetectorConfig,
}

#[derive(Debug)]
pub struct Analysis {
    pub model: SemanticModel,
    pub sets: MethodExceptionSets,
    pub tries: Vec<TryBlockAnalysis>,
    pub handlers: Vec<HandlerClassification>,
}

pub fn analyze_units(
    units: &[CompilationUnit],
    platform: &PlatformModel,
    options: &AnalysisOptions,
) -> Result<Analysis, ModelError> {
    let model = build_semantic_model(units, platform)?;
    let sets = compute_method_exception_sets(&model);
    let tries: Vec<TryBlockAnalysis> = model
        .try_ids()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&t| analyze_try_block(t, &sets, &model, options.flow))
        .collect();
    let handlers = classify_handlers(&model, &tries, &options.detectors);
    Ok(Analysis {
        model,
        sets,
        tries,
        handlers,
    })
}
