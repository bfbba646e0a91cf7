//! JSON run configurations and the error type shared by all subcommands.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use contraction_core::certify::Condition;
use contraction_core::linalg::{DenseMatrix, NormKind};
use contraction_core::system::RateFunction;
use contraction_core::Error;
use serde::de::DeserializeOwned;
use serde::Deserialize;

/// Why a command did not complete normally.
#[derive(Debug)]
pub enum CliError {
    /// Bad input, flags or configuration; exit code 2.
    Usage(String),
    /// The computation ran but did not succeed (divergence, no
    /// convergence); exit code 1.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Divergence { .. } | Error::NonConvergence { .. } => CliError::Failed(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Parses `text` as JSON, reporting syntax and schema errors with their line,
/// column and byte offset.
pub fn parse_json<T: DeserializeOwned>(label: &str, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| {
        let offset = byte_offset(text, e.line(), e.column());
        CliError::Usage(format!("{label}: {e} (byte offset {offset})"))
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&path.display().to_string(), &text)
}

/// Reads a config file, or starts from an empty config without one.
pub fn load_config<C: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<C> {
    path.map_or_else(|| Ok(C::default()), read_json)
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Flag value wins over the config value; `what` names the setting when both
/// are missing.
pub fn required<T>(flag: Option<T>, config: Option<T>, what: &str) -> CliResult<T> {
    match flag.or(config) {
        Some(v) => Ok(v),
        None => usage(format!("missing required setting {what:?} (flag or config key)")),
    }
}

pub fn positive(value: f64, what: &str) -> CliResult<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        usage(format!("{what} must be positive and finite, got {value}"))
    }
}

pub fn nonnegative(value: f64, what: &str) -> CliResult<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        usage(format!("{what} must be >= 0 and finite, got {value}"))
    }
}

pub fn finite_vector(v: Vec<f64>, what: &str) -> CliResult<Vec<f64>> {
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return usage(format!("{what} must be a non-empty vector of finite numbers"));
    }
    Ok(v)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub condition: Option<Condition>,
    pub system: Option<String>,
    pub matrix: Option<DenseMatrix<f64>>,
    pub map: Option<DenseMatrix<f64>>,
    pub norm: Option<NormKind<f64>>,
    pub rate: Option<RateFunction<f64>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub t_probe: Option<f64>,
    pub n_points: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VerifyKind {
    Pairwise,
    Semi,
    Partial,
    Coppel,
    Fieldnorm,
    Equilibrium,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub check: Option<VerifyKind>,
    pub system: Option<String>,
    pub matrix: Option<DenseMatrix<f64>>,
    pub map: Option<DenseMatrix<f64>>,
    pub norm: Option<NormKind<f64>>,
    pub rate: Option<RateFunction<f64>>,
    pub x0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub slack: Option<f64>,
    pub tol: Option<f64>,
    pub tau: Option<f64>,
    pub max_iters: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub system: Option<String>,
    pub matrix: Option<DenseMatrix<f64>>,
    pub x0: Option<Vec<f64>>,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RdDemoConfig {
    pub n_points: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub slack: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_follow_lines_and_columns() {
        let text = "{\n  \"a\": 1,\n  \"b\": x\n}";
        let err = parse_json::<serde_json::Value>("cfg", text).unwrap_err().to_string();
        let offset = text.find('x').unwrap();
        assert!(err.contains(&format!("byte offset {offset}")), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_json::<CertifyConfig>("cfg", r#"{"sytem": "scalar_decay"}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("sytem"));
    }

    #[test]
    fn flags_win_over_config() {
        assert_eq!(required(Some(1), Some(2), "x").unwrap(), 1);
        assert_eq!(required(None, Some(2), "x").unwrap(), 2);
        assert!(required::<i32>(None, None, "x").is_err());
    }
}
