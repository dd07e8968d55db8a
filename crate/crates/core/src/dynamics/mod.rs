//! Ground-truth trajectory generation for the Lorenz system and the
//! Kuramoto–Sivashinsky equation.

mod ks;
mod lorenz;

use std::f64::consts::TAU;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ks::{integrate_ks, KsParams, KsStepper};
pub use lorenz::{integrate_lorenz, lorenz_rhs, rk4_step, LorenzParams};

/// Number of low Fourier modes superposed in a random smooth initial condition.
pub const SMOOTH_IC_MODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "values")]
pub enum InitialCondition {
    SeededRandomSmooth,
    ExplicitVector(Vec<f64>),
}

impl FromStr for InitialCondition {
    type Err = Error;

    /// Only the seeded kind can be named on its own; explicit vectors carry data.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seeded-random-smooth" => Ok(Self::SeededRandomSmooth),
            other => Err(Error::InvalidParameter(format!(
                "unknown initial condition kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    /// Recorded rows in the output matrix.
    pub total_steps: usize,
    /// Steps integrated and discarded before the first recorded row.
    pub spinup_steps: usize,
    pub initial_condition: InitialCondition,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.total_steps == 0 {
            return Err(Error::InvalidParameter("total_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Builds an `n`-vector initial state.
///
/// The seeded kind superposes the lowest [`SMOOTH_IC_MODES`] Fourier modes
/// (wavenumbers 1..=8 on the periodic grid `j/n`) with uniform random
/// amplitudes in `[-1, 1]` and random phases, then removes the sample mean,
/// so the result is O(1) and zero-mean for any `n`.
pub fn make_initial_condition(kind: &InitialCondition, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("initial condition length must be >= 1".into()));
    }
    match kind {
        InitialCondition::ExplicitVector(v) => {
            if v.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "explicit initial condition has length {}, expected {n}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("explicit initial condition is not finite".into()));
            }
            Ok(v.clone())
        }
        InitialCondition::SeededRandomSmooth => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let modes: Vec<(f64, f64)> = (0..SMOOTH_IC_MODES)
                .map(|_| (rng.random_range(-1.0..=1.0), rng.random_range(0.0..TAU)))
                .collect();
            let mut u: Vec<f64> = (0..n)
                .map(|j| {
                    let x = j as f64 / n as f64;
                    modes
                        .iter()
                        .enumerate()
                        .map(|(m, (amp, phase))| amp * (TAU * (m + 1) as f64 * x + phase).cos())
                        .sum::<f64>()
                        / (SMOOTH_IC_MODES as f64).sqrt()
                })
                .collect();
            let mean = u.iter().sum::<f64>() / n as f64;
            u.iter_mut().for_each(|x| *x -= mean);
            Ok(u)
        }
    }
}
