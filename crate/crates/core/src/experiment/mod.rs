//! Config-driven experiment runner behind the `zigzag` binary.
//!
//! A config is one JSON document:
//!
//! ```json
//! { "experiment": "fst-run", "seed": 1, "parameters": { "m_values": [0, 4, 50] } }
//! ```
//!
//! Running produces a set of named text files (CSV / JSON) plus a summary; the
//! files are only written once the whole computation succeeded.

pub mod analysis;
pub mod output;
pub mod params;
mod run;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
pub use output::{config_hash, write_run, Manifest};
pub use params::Parameters;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Build,
    SpectrumCheck,
    PstRun,
    FstRun,
    SolutionSpace,
    NoiseSweep,
    LatticeFst,
    Calibrate,
    Optimize,
}

/// One catalog line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub figure: &'static str,
    pub summary: &'static str,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Build,
        ExperimentKind::SpectrumCheck,
        ExperimentKind::PstRun,
        ExperimentKind::FstRun,
        ExperimentKind::SolutionSpace,
        ExperimentKind::NoiseSweep,
        ExperimentKind::LatticeFst,
        ExperimentKind::Calibrate,
        ExperimentKind::Optimize,
    ];

    pub fn entry(self) -> CatalogEntry {
        let (name, figure, summary) = match self {
            ExperimentKind::Build => ("build", "Fig 1", "line / zig-zag / FST / effective chain parameters"),
            ExperimentKind::SpectrumCheck => (
                "spectrum-check",
                "Fig S3",
                "zig-zag spectra against the target spectrum and the inverse eigenvalue round trip",
            ),
            ExperimentKind::PstRun => ("pst-run", "Fig 2d-f", "ideal PST transfer probability, optional process fidelity"),
            ExperimentKind::FstRun => ("fst-run", "Fig 3a-b, Fig S9", "1D FST populations and Bell fidelity versus m"),
            ExperimentKind::SolutionSpace => (
                "solution-space",
                "Fig 2a, Fig S2",
                "3-site (delta, J) transfer map, bright spots, analytic oracle check",
            ),
            ExperimentKind::NoiseSweep => ("noise-sweep", "Fig 3e, Figs S7-S8", "F/F0 under quasi-static parameter noise"),
            ExperimentKind::LatticeFst => ("lattice-fst", "Fig 4, Fig S10", "3x3 W-state fidelity versus m"),
            ExperimentKind::Calibrate => ("calibrate", "Fig S4", "secant calibration of a synthetic device"),
            ExperimentKind::Optimize => ("optimize", "Figs S5-S6", "Nelder-Mead / differential evolution feedback optimization"),
        };
        CatalogEntry { name, figure, summary }
    }

    pub fn name(self) -> &'static str {
        self.entry().name
    }
}

/// Catalog of every experiment kind, sorted by name.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut v: Vec<CatalogEntry> = ExperimentKind::ALL.iter().map(|k| k.entry()).collect();
    v.sort_by(|a, b| a.name.cmp(b.name));
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default = "empty_object")]
    pub parameters: Value,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum RunError {
    /// Malformed config or parameters outside their domain.
    Schema(String),
    /// A numerical invariant broke during the run.
    Numerical(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Schema(_) => "schema",
            RunError::Numerical(_) => "numerical",
            RunError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Schema(m) | RunError::Numerical(m) | RunError::Io(m) => m,
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> Value {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.message(),
        })
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSize(_)
            | Error::UnsupportedParity(_)
            | Error::Precondition(_)
            | Error::BasisMismatch { .. }
            | Error::Resolution { .. }
            | Error::OutOfRange { .. } => RunError::Schema(e.to_string()),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl ExperimentConfig {
    /// Parse and validate a config document.
    pub fn parse(text: &str) -> Result<(Self, Parameters), RunError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| RunError::Schema(e.to_string()))?;
        let params = Parameters::from_value(cfg.experiment, &cfg.parameters)?;
        params.validate()?;
        Ok((cfg, params))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Named output files (sorted) and a JSON summary of the headline numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: BTreeMap<String, String>,
    pub summary: Value,
}

/// Run a parsed config in memory.
pub fn execute(cfg: &ExperimentConfig, params: &Parameters) -> Result<RunOutput, RunError> {
    run::execute(params, cfg.seed)
}

/// Parse, override the seed if given, and run.
pub fn run_text(text: &str, seed: Option<u64>) -> Result<(ExperimentConfig, RunOutput), RunError> {
    let (mut cfg, params) = ExperimentConfig::parse(text)?;
    if let Some(s) = seed {
        cfg = cfg.with_seed(s);
    }
    let out = execute(&cfg, &params)?;
    Ok((cfg, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_sorted_and_complete() {
        let c = catalog();
        assert_eq!(c.len(), 9);
        assert!(c.windows(2).all(|w| w[0].name < w[1].name));
        assert!(c.iter().all(|e| !e.figure.is_empty()));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ExperimentKind::ALL {
            let s = serde_json::to_string(&k).unwrap();
            assert_eq!(s, format!("\"{}\"", k.name()));
        }
    }

    #[test]
    fn unknown_keys_are_schema_errors() {
        let bad = r#"{"experiment": "build", "parameters": {"n_sites": 5, "bogus": 1}}"#;
        assert_eq!(ExperimentConfig::parse(bad).unwrap_err().exit_code(), 2);
        let bad = r#"{"experiment": "build", "extra": 1}"#;
        assert_eq!(ExperimentConfig::parse(bad).unwrap_err().exit_code(), 2);
        let bad = r#"{"experiment": "nope"}"#;
        assert_eq!(ExperimentConfig::parse(bad).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn spectrum_check_example() {
        let text = r#"{"experiment": "spectrum-check", "parameters": {"n_values": [5], "m_values": [1]}}"#;
        let (_, out) = run_text(text, None).unwrap();
        assert_eq!(out.summary["pass"], true);
        let csv = &out.files["spectrum.csv"];
        let targets: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
        assert_eq!(targets, ["-2", "-1", "0", "3", "4"]);
    }
}
