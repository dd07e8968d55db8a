use serde::{Deserialize, Serialize};

use super::{make_initial_condition, SimConfig};
use crate::error::{Error, Result};
use crate::matrix::TimeMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }
}

impl LorenzParams {
    pub fn with_rho(rho: f64) -> Self {
        Self { rho, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.sigma.is_finite() && self.rho.is_finite() && self.beta.is_finite();
        if !finite || self.sigma <= 0.0 || self.beta <= 0.0 {
            return Err(Error::InvalidParameter(format!("invalid Lorenz parameters {self:?}")));
        }
        Ok(())
    }
}

pub fn lorenz_rhs(state: [f64; 3], p: &LorenzParams) -> [f64; 3] {
    let [x, y, z] = state;
    [p.sigma * (y - x), p.rho * x - x * z - y, x * y - p.beta * z]
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step(state: [f64; 3], p: &LorenzParams, dt: f64) -> [f64; 3] {
    let axpy = |s: [f64; 3], k: [f64; 3], h: f64| [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2]];
    let k1 = lorenz_rhs(state, p);
    let k2 = lorenz_rhs(axpy(state, k1, 0.5 * dt), p);
    let k3 = lorenz_rhs(axpy(state, k2, 0.5 * dt), p);
    let k4 = lorenz_rhs(axpy(state, k3, dt), p);
    std::array::from_fn(|i| state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrates the Lorenz system, discarding `spinup_steps` before recording
/// `total_steps` rows. Row 0 is the state after spin-up.
pub fn integrate_lorenz(params: &LorenzParams, cfg: &SimConfig) -> Result<TimeMatrix> {
    params.validate()?;
    cfg.validate()?;
    let ic = make_initial_condition(&cfg.initial_condition, 3, cfg.seed)?;
    let mut state = [ic[0], ic[1], ic[2]];
    let mut step = 0;
    let mut advance = |state: &mut [f64; 3]| -> Result<()> {
        step += 1;
        *state = rk4_step(*state, params, cfg.dt);
        if state.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Divergence { step })
        }
    };
    for _ in 0..cfg.spinup_steps {
        advance(&mut state)?;
    }
    let mut data = Vec::with_capacity(cfg.total_steps * 3);
    data.extend_from_slice(&state);
    for _ in 1..cfg.total_steps {
        advance(&mut state)?;
        data.extend_from_slice(&state);
    }
    TimeMatrix::new(cfg.total_steps, 3, data)
}
