use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::classify::DetectorConfig;
use crate::report::DEFAULT_EXACT_CUTOFF;

pub const DEFAULT_GENERIC_CATCH: &[&str] = &["java.lang.Throwable", "java.lang.Exception"];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    config: RawConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    platform: Vec<PathBuf>,
    abort: Option<Vec<String>>,
    log_methods: Option<Vec<String>>,
    generic_catch: Option<Vec<String>>,
    exact_cutoff: Option<usize>,
    transitive_origins: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Config {
    /// Platform model files named by the config, relative to its directory.
    pub platform: Vec<PathBuf>,
    pub detectors: DetectorConfig,
    pub generic_catch: BTreeSet<String>,
    pub exact_cutoff: usize,
    pub transitive_origins: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            platform: Vec::new(),
            detectors: DetectorConfig::default(),
            generic_catch: DEFAULT_GENERIC_CATCH.iter().map(|s| s.to_string()).collect(),
            exact_cutoff: DEFAULT_EXACT_CUTOFF,
            transitive_origins: false,
        }
    }
}

fn non_empty(key: &str, values: Vec<String>) -> Result<BTreeSet<String>, String> {
    if values.is_empty() {
        return Err(format!("config key `{key}` must not be empty"));
    }
    Ok(values.into_iter().collect())
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Config, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
            format!("{}: invalid config at `{}`: {}", path.display(), e.path(), e.inner())
        })?;
        let raw = file.config;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut config = Config {
            platform: raw.platform.iter().map(|p| base.join(p)).collect(),
            ..Config::default()
        };
        if let Some(v) = raw.abort {
            config.detectors.abort = non_empty("abort", v)?;
        }
        if let Some(v) = raw.log_methods {
            config.detectors.log_methods = non_empty("log_methods", v)?;
        }
        if let Some(v) = raw.generic_catch {
            config.generic_catch = non_empty("generic_catch", v)?;
        }
        if let Some(c) = raw.exact_cutoff {
            config.exact_cutoff = c;
        }
        if let Some(t) = raw.transitive_origins {
            config.transitive_origins = t;
        }
        Ok(config)
    }
}
