//! Run configuration: JSON file, environment and flags, in increasing priority.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sardlab::evaluator::{DEPTH_CAP_1D, DEPTH_CAP_2D, MAX_DEPTH_1D, MAX_DEPTH_2D};
use sardlab::{AlphaSchedule, Dimension, ScheduleKind};

use crate::exit::CliError;

pub const OUT_DIR_ENV: &str = "SARDLAB_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "sardlab-out";
const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Fields accepted in a `--config` file. All optional; flags override them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: Option<u8>,
    pub schedule: Option<ScheduleKind>,
    pub depth_cap: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Flag values win over file values.
    pub fn overlay(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            dimension: flags.dimension.or(self.dimension),
            schedule: flags.schedule.or(self.schedule),
            depth_cap: flags.depth_cap.or(self.depth_cap),
            tol: flags.tol.or(self.tol),
            seed: flags.seed.or(self.seed),
            out_dir: flags.out_dir.or(self.out_dir),
            format: flags.format.or(self.format),
        }
    }
}

/// Validated settings for one command.
#[derive(Debug, Clone)]
pub struct Settings {
    pub dim: Dimension,
    pub kind: ScheduleKind,
    pub depth_cap: usize,
    pub tol: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: Format,
}

impl Settings {
    /// `default_dim` and `default_format` apply when neither file nor flag sets them.
    pub fn resolve(cfg: &RunConfig, default_dim: Dimension, default_format: Format) -> Result<Self, CliError> {
        let dim = match cfg.dimension {
            None => default_dim,
            Some(d) => Dimension::from_usize(usize::from(d))
                .ok_or_else(|| CliError::usage(format!("dimension must be 1 or 2, got {d}")))?,
        };
        let kind = cfg.schedule.unwrap_or(ScheduleKind::InverseSquare);
        if kind == ScheduleKind::Custom {
            return Err(CliError::usage("custom schedules are only available through the library"));
        }
        let (default_cap, max_cap) = match dim {
            Dimension::One => (DEPTH_CAP_1D, MAX_DEPTH_1D),
            Dimension::Two => (DEPTH_CAP_2D, MAX_DEPTH_2D),
        };
        let depth_cap = cfg.depth_cap.unwrap_or(default_cap);
        if depth_cap == 0 || depth_cap > max_cap {
            return Err(CliError::usage(format!(
                "depth cap {depth_cap} outside 1..={max_cap} for {dim}"
            )));
        }
        let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::usage(format!("tolerance must be positive, got {tol}")));
        }
        let out_dir = cfg
            .out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        Ok(Self {
            dim,
            kind,
            depth_cap,
            tol,
            seed: cfg.seed.unwrap_or(0),
            out_dir,
            format: cfg.format.unwrap_or(default_format),
        })
    }

    pub fn schedule(&self) -> AlphaSchedule {
        AlphaSchedule::from_kind(self.kind).expect("custom schedules rejected in resolve")
    }

    pub fn handle(&self) -> Result<sardlab::evaluator::FunctionHandle, CliError> {
        let c = sardlab::Construction::new(self.dim, self.schedule());
        Ok(sardlab::evaluator::FunctionHandle::with_depth_cap(c, self.depth_cap)?)
    }

    pub fn out_path(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::usage(format!("cannot create {}: {e}", self.out_dir.display())))?;
        Ok(self.out_dir.join(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = RunConfig {
            dimension: Some(2),
            tol: Some(1e-3),
            ..RunConfig::default()
        };
        let flags = RunConfig {
            tol: Some(1e-6),
            ..RunConfig::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.dimension, Some(2));
        assert_eq!(merged.tol, Some(1e-6));
    }

    #[test]
    fn rejects_bad_values() {
        let bad_tol = RunConfig {
            tol: Some(-1.0),
            ..RunConfig::default()
        };
        assert_eq!(
            Settings::resolve(&bad_tol, Dimension::One, Format::Csv).unwrap_err().code,
            crate::exit::USAGE
        );
        let bad_cap = RunConfig {
            depth_cap: Some(99),
            ..RunConfig::default()
        };
        assert!(Settings::resolve(&bad_cap, Dimension::Two, Format::Csv).is_err());
    }

    #[test]
    fn parses_config_json() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"dimension": 2, "schedule": "harmonic", "tol": 1e-6, "format": "json"}"#).unwrap();
        assert_eq!(cfg.schedule, Some(ScheduleKind::Harmonic));
        assert_eq!(cfg.format, Some(Format::Json));
        assert!(serde_json::from_str::<RunConfig>(r#"{"dim": 2}"#).is_err());
    }
}
