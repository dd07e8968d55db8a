use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TimeMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLabel {
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub label: NoiseLabel,
    /// Noise std as a fraction of each column's signal std.
    pub sigma_fraction: f64,
}

impl NoiseLevel {
    pub const DEFAULT_MEDIUM: f64 = 0.05;
    pub const DEFAULT_HIGH: f64 = 0.25;

    pub fn new(label: NoiseLabel, sigma_fraction: f64) -> Result<Self> {
        let level = Self { label, sigma_fraction };
        level.validate()?;
        Ok(level)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_fraction > 0.0 && self.sigma_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "noise fraction must lie in (0, 1), got {}",
                self.sigma_fraction
            )));
        }
        Ok(())
    }
}

/// Adds i.i.d. Gaussian noise whose per-column std is `sigma_fraction` times
/// the population std of that column of `x`.
pub fn add_noise(x: &TimeMatrix, level: &NoiseLevel, seed: u64) -> Result<TimeMatrix> {
    let scales: Vec<f64> = x
        .column_stds()
        .into_iter()
        .map(|s| s * level.sigma_fraction)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(x.rows() * x.cols());
    for row in x.iter_rows() {
        for (v, s) in row.iter().zip(&scales) {
            let z: f64 = StandardNormal.sample(&mut rng);
            data.push(v + s * z);
        }
    }
    TimeMatrix::new(x.rows(), x.cols(), data)
}
