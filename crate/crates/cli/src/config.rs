//! Run configuration: a JSON file merged with command-line flags.

use std::path::{Path, PathBuf};

use mvpois::calibration::MAX_DIM;
use mvpois::CorrelationMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything optional; flags fill in or replace fields read from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub intensities: Option<Vec<f64>>,
    pub horizon: Option<f64>,
    pub epsilon: Option<f64>,
    pub target: Option<CorrelationMatrix>,
    pub n_paths: Option<usize>,
    pub m_intervals: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threshold: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `over` win.
    pub fn merge(self, over: ConfigFile) -> ConfigFile {
        ConfigFile {
            intensities: over.intensities.or(self.intensities),
            horizon: over.horizon.or(self.horizon),
            epsilon: over.epsilon.or(self.epsilon),
            target: over.target.or(self.target),
            n_paths: over.n_paths.or(self.n_paths),
            m_intervals: over.m_intervals.or(self.m_intervals),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            threshold: over.threshold.or(self.threshold),
        }
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub intensities: Vec<f64>,
    pub horizon: f64,
    pub epsilon: f64,
    pub target: Option<CorrelationMatrix>,
    pub n_paths: usize,
    pub m_intervals: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub threshold: f64,
}

pub const DEFAULT_HORIZON: f64 = 1.0;
pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_PATHS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;

impl RunConfig {
    pub fn resolve(file: ConfigFile) -> Result<Self, CliError> {
        let intensities = file
            .intensities
            .ok_or_else(|| CliError::Usage("intensities are required (--intensities 3,5,7)".into()))?;
        let dim = intensities.len();
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(CliError::Usage(format!(
                "need between 2 and {MAX_DIM} intensities, got {dim}"
            )));
        }
        if let Some(l) = intensities.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(CliError::Usage(format!("intensities must be positive, got {l}")));
        }
        let horizon = file.horizon.unwrap_or(DEFAULT_HORIZON);
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(CliError::Usage(format!("horizon must be positive, got {horizon}")));
        }
        let epsilon = file.epsilon.unwrap_or(DEFAULT_EPSILON);
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(CliError::Usage(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let n_paths = file.n_paths.unwrap_or(DEFAULT_PATHS);
        if n_paths == 0 {
            return Err(CliError::Usage("paths must be at least 1".into()));
        }
        let m_intervals = file.m_intervals.unwrap_or(1);
        if m_intervals == 0 {
            return Err(CliError::Usage("intervals must be at least 1".into()));
        }
        if let Some(t) = &file.target {
            if t.dim() != dim {
                return Err(CliError::Usage(format!(
                    "target is {0}x{0} but there are {dim} intensities",
                    t.dim()
                )));
            }
        }
        let threshold = file
            .threshold
            .unwrap_or(mvpois::calibration::DEFAULT_RESIDUAL_THRESHOLD);
        if !(threshold >= 0.0) {
            return Err(CliError::Usage(format!("threshold must be >= 0, got {threshold}")));
        }
        Ok(RunConfig {
            intensities,
            horizon,
            epsilon,
            target: file.target,
            n_paths,
            m_intervals,
            seed: file.seed.unwrap_or(DEFAULT_SEED),
            out: file.out.unwrap_or_else(|| PathBuf::from(".")),
            threshold,
        })
    }
}

/// Read a correlation matrix stored as a JSON array of rows.
pub fn load_matrix(path: &Path) -> Result<CorrelationMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid matrix in {}: {e}", path.display())))
}
