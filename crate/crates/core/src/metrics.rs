//! Score mathematics: short-time relative error, long-time log-power
//! spectrum error, long-time histogram error, the `100 (1 - S)` transform
//! and the composite average.
//!
//! All `score_*` functions return the raw error `S`; [`to_score`] maps it to
//! points in `[-100, 100]`.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TimeMatrix;

/// Squared magnitudes below this are treated as zero power and mapped to a
/// log-power of exactly 0, so an all-zero prediction has `P = 0`.
pub const ZERO_POWER_THRESHOLD: f64 = 1e-300;

pub const NUM_SCORES: usize = 12;
pub const MIN_SCORE: f64 = -100.0;
pub const MAX_SCORE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    ShortTime,
    LongTimeSpectral,
    LongTimeHistogram,
}

impl MetricKind {
    pub fn is_long_time(self) -> bool {
        !matches!(self, MetricKind::ShortTime)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricWindows {
    /// Leading rows compared by the short-time score.
    pub short_k: usize,
    /// Trailing rows compared by the long-time scores.
    pub long_k: usize,
    /// Half-width of the wavenumber band around zero.
    pub kmax: usize,
    pub bins: usize,
}

impl MetricWindows {
    pub fn validate(&self) -> Result<()> {
        if self.short_k < 1 || self.long_k < 1 || self.kmax < 1 || self.bins < 2 {
            return Err(Error::InvalidParameter(format!(
                "metric windows need short_k, long_k, kmax >= 1 and bins >= 2, got {self:?}"
            )));
        }
        Ok(())
    }
}

fn check_same_shape(pred: &TimeMatrix, truth: &TimeMatrix) -> Result<()> {
    if pred.shape() != truth.shape() {
        return Err(Error::ShapeMismatch {
            name: "prediction".into(),
            expected_rows: truth.rows(),
            expected_cols: truth.cols(),
            rows: pred.rows(),
            cols: pred.cols(),
        });
    }
    Ok(())
}

/// `||pred[..k] - truth[..k]||_F / ||truth[..k]||_F` over the leading `short_k` rows.
pub fn score_short_time(pred: &TimeMatrix, truth: &TimeMatrix, short_k: usize) -> Result<f64> {
    check_same_shape(pred, truth)?;
    if short_k == 0 || short_k > truth.rows() {
        return Err(Error::InvalidParameter(format!(
            "short_k {short_k} outside 1..={}",
            truth.rows()
        )));
    }
    let len = short_k * truth.cols();
    let (p, t) = (&pred.as_slice()[..len], &truth.as_slice()[..len]);
    let diff: f64 = p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
    let norm: f64 = t.iter().map(|b| b * b).sum();
    if norm == 0.0 {
        return Err(Error::UndefinedScore("truth window has zero norm".into()));
    }
    Ok((diff / norm).sqrt())
}

/// Rotates a buffer so the zero-frequency entry moves to index `len / 2`.
pub fn fftshift<T>(buf: &mut [T]) {
    let half = buf.len() / 2;
    buf.rotate_right(half);
}

/// Log-power spectra of the trailing rows of a trajectory, restricted to
/// wavenumbers `-kmax..=kmax` after center-shifting.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMatrix {
    rows: usize,
    bins: usize,
    values: Vec<f64>,
}

impl SpectrumMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.bins..(i + 1) * self.bins]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

pub fn power_spectrum_rows(x: &TimeMatrix, long_k: usize, kmax: usize) -> Result<SpectrumMatrix> {
    let n = x.cols();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("spectral score needs an even width, got {n}")));
    }
    if n < 2 * kmax + 2 {
        return Err(Error::InvalidParameter(format!(
            "width {n} too small for kmax {kmax}"
        )));
    }
    if long_k == 0 || long_k > x.rows() {
        return Err(Error::InvalidParameter(format!(
            "long_k {long_k} outside 1..={}",
            x.rows()
        )));
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let (lo, hi) = (n / 2 - kmax, n / 2 + kmax + 1);
    let mut values = Vec::with_capacity(long_k * (hi - lo));
    for r in x.rows() - long_k..x.rows() {
        for (b, &v) in buf.iter_mut().zip(x.row(r)) {
            *b = Complex64::new(v, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        fftshift(&mut buf);
        values.extend(buf[lo..hi].iter().map(|c| {
            let power = c.norm_sqr();
            if power < ZERO_POWER_THRESHOLD {
                0.0
            } else {
                power.ln()
            }
        }));
    }
    Ok(SpectrumMatrix {
        rows: long_k,
        bins: hi - lo,
        values,
    })
}

/// Relative Frobenius error between truth and prediction log-power spectra
/// over the trailing `long_k` rows.
pub fn score_long_time_spectral(
    pred: &TimeMatrix,
    truth: &TimeMatrix,
    windows: &MetricWindows,
) -> Result<f64> {
    check_same_shape(pred, truth)?;
    let p_truth = power_spectrum_rows(truth, windows.long_k, windows.kmax)?;
    let p_pred = power_spectrum_rows(pred, windows.long_k, windows.kmax)?;
    let (t, p) = (p_truth.as_slice(), p_pred.as_slice());
    let diff: f64 = t.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
    let norm: f64 = t.iter().map(|a| a * a).sum();
    if norm == 0.0 {
        return Err(Error::UndefinedScore("truth spectrum has zero norm".into()));
    }
    Ok((diff / norm).sqrt())
}

/// `bins + 1` equal-width edges spanning `[min, max]` of `series`.
pub fn histogram_edges(series: &[f64], bins: usize) -> Vec<f64> {
    let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut edges: Vec<f64> = (0..bins)
        .map(|b| lo + (hi - lo) * (b as f64 / bins as f64))
        .collect();
    edges.push(hi);
    edges
}

/// Counts per bin; values outside the edges land in the nearest end bin and
/// the top edge is inclusive.
pub fn histogram_counts(values: &[f64], edges: &[f64]) -> Vec<usize> {
    let bins = edges.len() - 1;
    let interior = &edges[1..bins];
    let mut counts = vec![0; bins];
    for &v in values {
        counts[interior.partition_point(|&e| e <= v)] += 1;
    }
    counts
}

/// `sum |h_truth - h_pred| / L` with bins derived from the truth series.
/// The result lies in `[0, 2]`.
///
/// When the truth series is constant there is a single bin holding exactly
/// that value; prediction samples that differ from it count as mass outside
/// the bin.
pub fn histogram_l1(truth: &[f64], pred: &[f64], bins: usize) -> Result<f64> {
    if truth.is_empty() || truth.len() != pred.len() {
        return Err(Error::InvalidParameter(format!(
            "histogram series must be non-empty and equal length, got {} and {}",
            truth.len(),
            pred.len()
        )));
    }
    if bins < 2 {
        return Err(Error::InvalidParameter(format!("bins must be >= 2, got {bins}")));
    }
    let len = truth.len() as f64;
    let edges = histogram_edges(truth, bins);
    if edges[0] == edges[bins] {
        let matched = pred.iter().filter(|&&v| v == edges[0]).count() as f64;
        return Ok(2.0 * (len - matched) / len);
    }
    let h_truth = histogram_counts(truth, &edges);
    let h_pred = histogram_counts(pred, &edges);
    let l1: usize = h_truth.iter().zip(&h_pred).map(|(a, b)| a.abs_diff(*b)).sum();
    Ok(l1 as f64 / len)
}

/// Per-coordinate histogram error over the trailing `long_k` rows, averaged
/// over the columns.
pub fn score_long_time_histogram(
    pred: &TimeMatrix,
    truth: &TimeMatrix,
    windows: &MetricWindows,
) -> Result<f64> {
    check_same_shape(pred, truth)?;
    let rows = truth.rows();
    if windows.long_k == 0 || windows.long_k > rows {
        return Err(Error::InvalidParameter(format!(
            "long_k {} outside 1..={rows}",
            windows.long_k
        )));
    }
    let start = rows - windows.long_k;
    let mut total = 0.0;
    for c in 0..truth.cols() {
        total += histogram_l1(
            &truth.column(c, start, rows),
            &pred.column(c, start, rows),
            windows.bins,
        )?;
    }
    Ok(total / truth.cols() as f64)
}

/// A clipped score together with a note when the raw error was unusable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOutcome {
    pub value: f64,
    pub warning: Option<String>,
}

/// `clamp(100 (1 - S), -100, 100)`; non-finite `S` scores the minimum.
pub fn to_score(s: f64) -> ScoreOutcome {
    if !s.is_finite() {
        log::warn!("non-finite error {s}; assigning minimum score");
        return ScoreOutcome {
            value: MIN_SCORE,
            warning: Some(format!("non-finite error {s}")),
        };
    }
    ScoreOutcome {
        value: (100.0 * (1.0 - s)).clamp(MIN_SCORE, MAX_SCORE),
        warning: None,
    }
}

/// Mean of the twelve scores with absent entries counted as the minimum.
pub fn composite(scores: &[Option<f64>; NUM_SCORES]) -> f64 {
    let sum: f64 = scores.iter().map(|s| s.unwrap_or(MIN_SCORE)).sum();
    sum / NUM_SCORES as f64
}
