//! Run configuration: command-line flags merged with an optional JSON file.
//! Values from the file win over flags.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use opineq::verify::CheckSpec;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Option<Format>,
}

/// Schema of the `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub suite: Option<String>,
    pub seed: Option<u64>,
    pub dims: Option<Vec<usize>>,
    pub p_grid: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub truncation: Option<usize>,
    pub tol: Option<f64>,
    pub output: Option<OutputConfig>,
    pub input: Option<PathBuf>,
    /// Explicit check list; replaces the named suite.
    pub checks: Option<Vec<CheckSpec>>,
}

/// Effective settings after merging.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub suite: Option<String>,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub p_grid: Vec<f64>,
    pub trials: Option<usize>,
    pub truncation: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub input: Option<PathBuf>,
    pub checks: Option<Vec<CheckSpec>>,
}

pub const DEFAULT_SEED: u64 = 7;

pub fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        format!(
            "config {}: line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })
}

fn infer_format(out: Option<&Path>) -> Format {
    match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
        _ => Format::Json,
    }
}

impl Settings {
    pub fn merge(flags: Settings, format_flag: Option<Format>, config: Option<RunConfig>, command: &str) -> Result<Self, String> {
        let mut s = flags;
        let mut format = format_flag;
        if let Some(c) = config {
            if let Some(cmd) = &c.command {
                if cmd != command {
                    return Err(format!("config is for command `{cmd}` but `{command}` was invoked"));
                }
            }
            if c.suite.is_some() {
                s.suite = c.suite;
            }
            if let Some(seed) = c.seed {
                s.seed = seed;
            }
            if let Some(d) = c.dims {
                s.dims = d;
            }
            if let Some(p) = c.p_grid {
                s.p_grid = p;
            }
            if c.trials.is_some() {
                s.trials = c.trials;
            }
            if c.truncation.is_some() {
                s.truncation = c.truncation;
            }
            if c.tol.is_some() {
                s.tol = c.tol;
            }
            if let Some(o) = c.output {
                s.out = Some(o.path);
                if o.format.is_some() {
                    format = o.format;
                }
            }
            if c.input.is_some() {
                s.input = c.input;
            }
            if c.checks.is_some() {
                s.checks = c.checks;
            }
        }
        s.format = format.unwrap_or_else(|| infer_format(s.out.as_deref()));
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), String> {
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0) {
            return Err(format!("dims must be at least 1, got {d}"));
        }
        if let Some(&p) = self.p_grid.iter().find(|p| !p.is_finite() || **p <= 0.0) {
            return Err(format!("p must be a positive finite number, got {p}"));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(format!("tol must be positive, got {t}"));
            }
        }
        if self.truncation == Some(0) {
            return Err("M must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_overrides_flags() {
        let flags = Settings {
            seed: 1,
            trials: Some(5),
            ..Default::default()
        };
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 9, "output": {"path": "r.csv"}}"#).unwrap();
        let s = Settings::merge(flags, None, Some(cfg), "verify").unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.trials, Some(5));
        assert_eq!(s.format, Format::Csv);
    }

    #[test]
    fn unknown_fields_and_wrong_command_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sead": 9}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"command": "tg"}"#).unwrap();
        assert!(Settings::merge(Settings::default(), None, Some(cfg), "verify").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = Settings {
            p_grid: vec![-1.0],
            ..Default::default()
        };
        assert!(Settings::merge(bad, None, None, "verify").is_err());
    }
}
