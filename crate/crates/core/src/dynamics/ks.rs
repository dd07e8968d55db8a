//! Fourier pseudospectral solver for `u_t + u u_x + u_xx + mu u_xxxx = 0`
//! on a periodic domain, advanced with fourth-order exponential time
//! differencing (ETDRK4). The phi-function coefficients are evaluated by
//! contour integration around each linear eigenvalue so they stay accurate
//! where `h L` is near zero.
//!
//! The coefficients are kept Hermitian-symmetric (a real field) by projection
//! after every step; otherwise round-off in the imaginary part is amplified
//! by the linearly unstable modes.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{make_initial_condition, SimConfig};
use crate::error::{Error, Result};
use crate::matrix::TimeMatrix;

/// Quadrature points on the contour used for the ETDRK4 coefficients.
const CONTOUR_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsParams {
    pub domain_length: f64,
    pub grid_points: usize,
    /// Coefficient of the fourth-derivative term.
    pub viscosity: f64,
}

impl Default for KsParams {
    fn default() -> Self {
        Self {
            domain_length: 32.0 * PI,
            grid_points: 1024,
            viscosity: 1.0,
        }
    }
}

impl KsParams {
    pub fn with_viscosity(viscosity: f64) -> Self {
        Self { viscosity, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 8 || !self.grid_points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "grid_points must be a power of two >= 8, got {}",
                self.grid_points
            )));
        }
        if !(self.domain_length.is_finite() && self.domain_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "domain_length must be positive, got {}",
                self.domain_length
            )));
        }
        if !(self.viscosity.is_finite() && self.viscosity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "viscosity must be positive, got {}",
                self.viscosity
            )));
        }
        Ok(())
    }

    /// Angular wavenumber of each FFT bin, in FFT order. The Nyquist bin is
    /// reported as `+n/2`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.grid_points;
        let base = 2.0 * PI / self.domain_length;
        (0..n)
            .map(|m| if m <= n / 2 { m as f64 } else { m as f64 - n as f64 } * base)
            .collect()
    }

    /// Linear growth rate `q^2 - mu q^4` of a Fourier mode with wavenumber `q`.
    pub fn growth_rate(&self, q: f64) -> f64 {
        q * q - self.viscosity * q.powi(4)
    }
}

/// Reusable ETDRK4 stepper acting on Fourier coefficients.
pub struct KsStepper {
    n: usize,
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    /// `-i q / 2`, zeroed outside the 2/3 dealiasing band (which also drops
    /// the Nyquist bin).
    g: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    work: [Vec<Complex64>; 6],
}

impl KsStepper {
    pub fn new(params: &KsParams, dt: f64) -> Result<Self> {
        params.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let n = params.grid_points;
        let k = params.wavenumbers();
        let cutoff = n / 3;

        let roots: Vec<Complex64> = (1..=CONTOUR_POINTS)
            .map(|j| Complex64::from_polar(1.0, PI * (j as f64 - 0.5) / CONTOUR_POINTS as f64))
            .collect();
        let mut e = Vec::with_capacity(n);
        let mut e2 = Vec::with_capacity(n);
        let mut q = Vec::with_capacity(n);
        let mut f1 = Vec::with_capacity(n);
        let mut f2 = Vec::with_capacity(n);
        let mut f3 = Vec::with_capacity(n);
        for &kq in &k {
            let hl = dt * params.growth_rate(kq);
            e.push(hl.exp());
            e2.push((hl / 2.0).exp());
            let (mut sq, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
            for r in &roots {
                let lr = Complex64::new(hl, 0.0) + r;
                let elr = lr.exp();
                let lr3 = lr * lr * lr;
                sq += (((lr / 2.0).exp() - 1.0) / lr).re;
                s1 += ((-4.0 - lr + elr * (4.0 - 3.0 * lr + lr * lr)) / lr3).re;
                s2 += ((2.0 + lr + elr * (lr - 2.0)) / lr3).re;
                s3 += ((-4.0 - 3.0 * lr - lr * lr + elr * (4.0 - lr)) / lr3).re;
            }
            let m = CONTOUR_POINTS as f64;
            q.push(dt * sq / m);
            f1.push(dt * s1 / m);
            f2.push(dt * s2 / m);
            f3.push(dt * s3 / m);
        }
        let g = k
            .iter()
            .enumerate()
            .map(|(m, &kq)| {
                let index = if m <= n / 2 { m } else { n - m };
                if index > cutoff {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -0.5 * kq)
                }
            })
            .collect();

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let zero = Complex64::new(0.0, 0.0);
        Ok(Self {
            n,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            g,
            fwd,
            inv,
            scratch: vec![zero; scratch_len],
            work: std::array::from_fn(|_| vec![zero; n]),
        })
    }

    pub fn grid_points(&self) -> usize {
        self.n
    }

    pub fn to_spectral(&mut self, u: &[f64]) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process_with_scratch(&mut v, &mut self.scratch);
        v
    }

    pub fn to_physical(&mut self, v: &[Complex64], out: &mut [f64]) {
        let buf = &mut self.work[5];
        buf.copy_from_slice(v);
        self.inv.process_with_scratch(buf, &mut self.scratch);
        let scale = 1.0 / self.n as f64;
        for (o, c) in out.iter_mut().zip(buf.iter()) {
            *o = c.re * scale;
        }
    }

    /// `out = g * FFT(real(IFFT(v))^2)`.
    fn nonlinear(
        n: usize,
        g: &[Complex64],
        fwd: &dyn Fft<f64>,
        inv: &dyn Fft<f64>,
        scratch: &mut [Complex64],
        v: &[Complex64],
        out: &mut [Complex64],
    ) {
        out.copy_from_slice(v);
        inv.process_with_scratch(out, scratch);
        let scale = 1.0 / n as f64;
        for c in out.iter_mut() {
            let u = c.re * scale;
            *c = Complex64::new(u * u, 0.0);
        }
        fwd.process_with_scratch(out, scratch);
        for (c, gk) in out.iter_mut().zip(g) {
            *c *= gk;
        }
    }

    /// Advances the Fourier coefficients `v` by one step.
    pub fn step(&mut self, v: &mut [Complex64]) {
        let n = self.n;
        let [nv, a, na, b, nb, _] = &mut self.work;
        let (fwd, inv) = (self.fwd.as_ref(), self.inv.as_ref());
        let scratch = &mut self.scratch;

        Self::nonlinear(n, &self.g, fwd, inv, scratch, v, nv);
        for i in 0..n {
            a[i] = v[i] * self.e2[i] + nv[i] * self.q[i];
        }
        Self::nonlinear(n, &self.g, fwd, inv, scratch, a, na);
        for i in 0..n {
            b[i] = v[i] * self.e2[i] + na[i] * self.q[i];
        }
        Self::nonlinear(n, &self.g, fwd, inv, scratch, b, nb);
        // c overwrites b; Nc overwrites the slot of b's copy
        for i in 0..n {
            b[i] = a[i] * self.e2[i] + (nb[i] * 2.0 - nv[i]) * self.q[i];
        }
        for i in 0..n {
            v[i] = v[i] * self.e[i]
                + nv[i] * self.f1[i]
                + (na[i] + nb[i]) * (2.0 * self.f2[i]);
        }
        Self::nonlinear(n, &self.g, fwd, inv, scratch, b, a);
        for i in 0..n {
            v[i] += a[i] * self.f3[i];
        }
        project_hermitian(v);
    }
}

/// Replaces `v` by the spectrum of the real part of its inverse transform:
/// `v[k] = (v[k] + conj(v[n - k])) / 2`.
fn project_hermitian(v: &mut [Complex64]) {
    let n = v.len();
    v[0].im = 0.0;
    v[n / 2].im = 0.0;
    for k in 1..n / 2 {
        let avg = (v[k] + v[n - k].conj()) * 0.5;
        v[k] = avg;
        v[n - k] = avg.conj();
    }
}

/// Integrates the KS equation, discarding `spinup_steps` before recording
/// `total_steps` rows of the physical-space solution.
pub fn integrate_ks(params: &KsParams, cfg: &SimConfig) -> Result<TimeMatrix> {
    params.validate()?;
    cfg.validate()?;
    let n = params.grid_points;
    let u0 = make_initial_condition(&cfg.initial_condition, n, cfg.seed)?;
    let mut stepper = KsStepper::new(params, cfg.dt)?;
    let mut v = stepper.to_spectral(&u0);
    let mut u = vec![0.0; n];
    let mut step = 0;
    for _ in 0..cfg.spinup_steps {
        stepper.step(&mut v);
        step += 1;
        if v.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Divergence { step });
        }
    }
    let mut data = Vec::with_capacity(cfg.total_steps * n);
    data.extend_from_slice(&u0);
    if cfg.spinup_steps > 0 {
        stepper.to_physical(&v, &mut u);
        data.clear();
        data.extend_from_slice(&u);
    }
    for _ in 1..cfg.total_steps {
        stepper.step(&mut v);
        step += 1;
        stepper.to_physical(&v, &mut u);
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { step });
        }
        data.extend_from_slice(&u);
    }
    TimeMatrix::new(cfg.total_steps, n, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::InitialCondition;

    fn small() -> KsParams {
        KsParams {
            domain_length: 32.0 * PI,
            grid_points: 128,
            viscosity: 1.0,
        }
    }

    fn explicit(u: Vec<f64>, dt: f64, steps: usize) -> SimConfig {
        SimConfig {
            dt,
            total_steps: steps,
            spinup_steps: 0,
            initial_condition: InitialCondition::ExplicitVector(u),
            seed: 0,
        }
    }

    #[test]
    fn grid_must_be_power_of_two() {
        let p = KsParams { grid_points: 100, ..small() };
        assert!(integrate_ks(&p, &explicit(vec![0.0; 100], 0.025, 2)).is_err());
        let p = KsParams { grid_points: 4, ..small() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn constant_state_is_an_equilibrium() {
        let p = small();
        let m = integrate_ks(&p, &explicit(vec![0.7; 128], 0.025, 1000)).unwrap();
        for row in m.iter_rows() {
            for v in row {
                assert!((v - 0.7).abs() < 1e-10, "{v}");
            }
        }
    }

    #[test]
    fn stable_mode_decays_at_linear_rate() {
        let p = small();
        let n = p.grid_points;
        // m = 20 -> q = 1.25, growth rate q^2 - q^4 < 0
        let m = 20;
        let q = 2.0 * PI * m as f64 / p.domain_length;
        let eps = 1e-6;
        let u0: Vec<f64> = (0..n)
            .map(|j| eps * (2.0 * PI * m as f64 * j as f64 / n as f64).sin())
            .collect();
        let dt = 0.025;
        let steps = 41;
        let out = integrate_ks(&p, &explicit(u0, dt, steps)).unwrap();
        let amp = |row: &[f64]| row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let t = dt * (steps - 1) as f64;
        let expected = eps * (p.growth_rate(q) * t).exp();
        let got = amp(out.row(steps - 1));
        assert!(got < eps);
        assert!((got - expected).abs() / expected < 1e-3, "got {got}, expected {expected}");
    }

    #[test]
    fn seeded_run_is_deterministic() {
        let p = small();
        let cfg = SimConfig {
            dt: 0.025,
            total_steps: 50,
            spinup_steps: 10,
            initial_condition: InitialCondition::SeededRandomSmooth,
            seed: 3,
        };
        let a = integrate_ks(&p, &cfg).unwrap();
        let b = integrate_ks(&p, &cfg).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn long_chaotic_run_stays_bounded() {
        let p = KsParams::default();
        let cfg = SimConfig {
            dt: 0.025,
            total_steps: 20_000,
            spinup_steps: 0,
            initial_condition: InitialCondition::SeededRandomSmooth,
            seed: 1,
        };
        let m = integrate_ks(&p, &cfg).unwrap();
        let max = m.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max < 10.0 && max > 1.0, "max |u| = {max}");
    }

    #[test]
    fn wavenumbers_in_fft_order() {
        let p = KsParams { domain_length: 2.0 * PI, grid_points: 8, viscosity: 1.0 };
        assert_eq!(p.wavenumbers(), vec![0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0]);
    }
}
