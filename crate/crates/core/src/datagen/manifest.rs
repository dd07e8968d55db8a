use serde::{Deserialize, Serialize};

use super::noise::{NoiseLabel, NoiseLevel};
use super::table::{Role, PACK_LAYOUT};
use super::{System, SystemParams};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseSeeds {
    pub medium: u64,
    pub high: u64,
    /// Seed for the noisy limited-data matrix.
    pub limited: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parametric {
    pub parameter: String,
    pub training: [f64; 3],
    pub interpolation: f64,
    pub extrapolation: f64,
}

impl Parametric {
    pub fn validate(&self) -> Result<()> {
        let lo = self.training.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.training.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(self.interpolation > lo && self.interpolation < hi) {
            return Err(Error::InvalidManifest(format!(
                "interpolation value {} not strictly inside training range [{lo}, {hi}]",
                self.interpolation
            )));
        }
        if !(self.extrapolation < lo || self.extrapolation > hi) {
            return Err(Error::InvalidManifest(format!(
                "extrapolation value {} not strictly outside training range [{lo}, {hi}]",
                self.extrapolation
            )));
        }
        Ok(())
    }
}

/// Provenance of one simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub label: String,
    pub params: SystemParams,
    pub seed: u64,
    pub steps: usize,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub name: String,
    pub role: Role,
    pub rows: usize,
    pub cols: usize,
    pub start: usize,
    pub end: usize,
}

impl MatrixEntry {
    pub fn layout(cols: usize) -> Vec<MatrixEntry> {
        PACK_LAYOUT
            .iter()
            .map(|r| MatrixEntry {
                name: r.name.to_string(),
                role: r.role,
                rows: r.rows,
                cols,
                start: r.start,
                end: r.end,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub dataset_id: String,
    pub system: System,
    pub master_seed: u64,
    pub nominal: SystemParams,
    pub dt: f64,
    pub spinup_steps: usize,
    pub noise_medium: NoiseLevel,
    pub noise_high: NoiseLevel,
    pub noise_seeds: NoiseSeeds,
    pub parametric: Parametric,
    pub trajectories: Vec<TrajectoryRecord>,
    pub matrices: Vec<MatrixEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

impl Manifest {
    pub fn entry(&self, name: &str) -> Option<&MatrixEntry> {
        self.matrices.iter().find(|m| m.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: FORMAT_VERSION,
                found: self.format_version,
            });
        }
        if self.dataset_id != self.system.dataset_id() {
            return Err(Error::InvalidManifest(format!(
                "dataset id {} does not match system {:?}",
                self.dataset_id, self.system
            )));
        }
        if self.nominal.system() != self.system {
            return Err(Error::InvalidManifest("nominal parameters belong to another system".into()));
        }
        self.nominal.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidManifest(format!("dt must be positive, got {}", self.dt)));
        }
        for (level, label) in [(&self.noise_medium, NoiseLabel::Medium), (&self.noise_high, NoiseLabel::High)] {
            level.validate()?;
            if level.label != label {
                return Err(Error::InvalidManifest(format!("noise level labelled {:?}, expected {label:?}", level.label)));
            }
        }
        self.parametric.validate()?;
        if self.parametric.parameter != self.system.varied_parameter() {
            return Err(Error::InvalidManifest(format!(
                "varied parameter {:?} is not {:?}",
                self.parametric.parameter,
                self.system.varied_parameter()
            )));
        }
        let expected = MatrixEntry::layout(self.nominal.dimension());
        if self.matrices != expected {
            return Err(Error::InvalidManifest(
                "matrix table differs from the pack layout".into(),
            ));
        }
        Ok(())
    }

    pub fn names(&self, role: Role) -> impl Iterator<Item = &str> {
        self.matrices.iter().filter(move |m| m.role == role).map(|m| m.name.as_str())
    }
}
