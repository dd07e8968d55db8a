//! Per-run evaluation and multi-run aggregation.

use std::borrow::Cow;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::registry::{task_registry, ScoreId, TaskSpec, WindowConfig};
use super::submission::{validate_submission, Submission, Violation};
use crate::datagen::PackSource;
use crate::error::{Error, Result};
use crate::matrix::TimeMatrix;
use crate::metrics::{
    composite, score_long_time_histogram, score_long_time_spectral, score_short_time, to_score,
    MetricKind, MAX_SCORE, MIN_SCORE, NUM_SCORES,
};

pub const SCORECARD_VERSION: u32 = 1;

/// Mean and population standard deviation, the latter clipped at 100.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Result<Stat> {
        if values.is_empty() {
            return Err(Error::Aggregation("no values".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(Stat {
            mean: mean.clamp(MIN_SCORE, MAX_SCORE),
            std: var.sqrt().min(MAX_SCORE),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunCard {
    pub run_id: String,
    /// `None` marks a score that could not be computed; it counts as -100.
    pub scores: [Option<f64>; NUM_SCORES],
    pub composite: f64,
    pub warnings: Vec<String>,
    pub violations: Vec<Violation>,
}

impl RunCard {
    /// Scores with missing entries replaced by the minimum.
    pub fn effective_scores(&self) -> [f64; NUM_SCORES] {
        self.scores.map(|s| s.unwrap_or(MIN_SCORE))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scores: [Stat; NUM_SCORES],
    pub composite: Stat,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub format_version: u32,
    pub method_name: String,
    pub dataset_id: String,
    pub windows: WindowConfig,
    pub runs: Vec<RunCard>,
    pub aggregate: Aggregate,
}

impl ScoreCard {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<ScoreCard> {
        let card: ScoreCard = serde_json::from_str(text)?;
        if card.format_version != SCORECARD_VERSION {
            return Err(Error::VersionMismatch {
                expected: SCORECARD_VERSION,
                found: card.format_version,
            });
        }
        Ok(card)
    }

    pub fn has_violations(&self) -> bool {
        self.runs.iter().any(|r| !r.violations.is_empty())
    }
}

fn aggregate(runs: &[RunCard]) -> Result<Aggregate> {
    let mut scores = [Stat { mean: 0.0, std: 0.0 }; NUM_SCORES];
    for (i, slot) in scores.iter_mut().enumerate() {
        let values: Vec<f64> = runs.iter().map(|r| r.effective_scores()[i]).collect();
        *slot = Stat::of(&values)?;
    }
    let composites: Vec<f64> = runs.iter().map(|r| r.composite).collect();
    Ok(Aggregate {
        scores,
        composite: Stat::of(&composites)?,
        runs: runs.len(),
    })
}

fn raw_error(task: &TaskSpec, pred: &TimeMatrix, truth: &TimeMatrix) -> Result<f64> {
    let w = &task.windows;
    let s = match task.metric {
        MetricKind::ShortTime => score_short_time(pred, truth, w.short_k),
        MetricKind::LongTimeSpectral => score_long_time_spectral(pred, truth, w),
        MetricKind::LongTimeHistogram => score_long_time_histogram(pred, truth, w),
    };
    match s {
        Err(Error::UndefinedScore(_)) => Ok(f64::NAN),
        other => other,
    }
}

/// Scores one run. `prior` carries violations found while reading the
/// submission from disk; they are merged with the shape checks.
///
/// Only the truth matrix named by each task is loaded from `source`.
pub fn evaluate_run(
    sub: &Submission,
    prior: Vec<Violation>,
    source: &impl PackSource,
    windows: &WindowConfig,
) -> Result<RunCard> {
    let dataset_id = source.manifest().dataset_id.clone();
    let tasks = task_registry(&dataset_id, windows)?;
    let mut violations = prior;
    for v in validate_submission(sub, &tasks) {
        if !violations.iter().any(|p| p.prediction() == v.prediction()) {
            violations.push(v);
        }
    }
    let mut truths: BTreeMap<&str, Cow<'_, TimeMatrix>> = BTreeMap::new();
    let mut scores = [None; NUM_SCORES];
    let mut warnings = Vec::new();
    for task in &tasks {
        let id = task.score_id;
        let bad = violations.iter().find(|v| v.prediction() == task.prediction_name);
        let pred = match (bad, sub.predictions.get(&task.prediction_name)) {
            (None, Some(p)) => p,
            (bad, _) => {
                let why = bad.map_or_else(|| format!("{}: missing", task.prediction_name), |v| v.to_string());
                log::warn!("{id} scored {MIN_SCORE}: {why}");
                warnings.push(format!("{id}: {why}; scored {MIN_SCORE}"));
                continue;
            }
        };
        if !truths.contains_key(task.truth_name.as_str()) {
            let m = source.load(&task.truth_name)?;
            if m.shape() != task.shape {
                return Err(Error::ShapeMismatch {
                    name: task.truth_name.clone(),
                    expected_rows: task.shape.0,
                    expected_cols: task.shape.1,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
            truths.insert(&task.truth_name, m);
        }
        let truth = &truths[task.truth_name.as_str()];
        let outcome = to_score(raw_error(task, pred, truth)?);
        if let Some(w) = outcome.warning {
            warnings.push(format!("{id}: {w}"));
        }
        scores[id.index()] = Some(outcome.value);
    }
    Ok(RunCard {
        run_id: sub.run_id.clone(),
        composite: composite(&scores),
        scores,
        warnings,
        violations,
    })
}

/// Single-run scorecard.
pub fn evaluate(sub: &Submission, source: &impl PackSource, windows: &WindowConfig) -> Result<ScoreCard> {
    let run = evaluate_run(sub, Vec::new(), source, windows)?;
    card_from_runs(&sub.method_name, &source.manifest().dataset_id, windows, vec![run])
}

/// Builds a card from already scored runs, sorted by run id.
pub fn card_from_runs(
    method_name: &str,
    dataset_id: &str,
    windows: &WindowConfig,
    mut runs: Vec<RunCard>,
) -> Result<ScoreCard> {
    if runs.is_empty() {
        return Err(Error::Aggregation("at least one run is required".into()));
    }
    runs.sort_by(|a, b| a.run_id.cmp(&b.run_id));
    if let Some(w) = runs.windows(2).find(|w| w[0].run_id == w[1].run_id) {
        return Err(Error::Aggregation(format!("duplicate run id {:?}", w[0].run_id)));
    }
    Ok(ScoreCard {
        format_version: SCORECARD_VERSION,
        method_name: method_name.to_string(),
        dataset_id: dataset_id.to_string(),
        windows: *windows,
        aggregate: aggregate(&runs)?,
        runs,
    })
}

/// Pools the runs of several cards for one method on one dataset.
pub fn aggregate_runs(cards: &[ScoreCard]) -> Result<ScoreCard> {
    let first = cards
        .first()
        .ok_or_else(|| Error::Aggregation("no scorecards given".into()))?;
    for c in cards {
        if c.method_name != first.method_name {
            return Err(Error::Aggregation(format!(
                "mixed methods {:?} and {:?}",
                first.method_name, c.method_name
            )));
        }
        if c.dataset_id != first.dataset_id {
            return Err(Error::Aggregation(format!(
                "mixed datasets {} and {}",
                first.dataset_id, c.dataset_id
            )));
        }
        if c.windows != first.windows {
            return Err(Error::Aggregation("runs were scored with different windows".into()));
        }
    }
    let runs = cards.iter().flat_map(|c| c.runs.iter().cloned()).collect();
    card_from_runs(&first.method_name, &first.dataset_id, &first.windows, runs)
}

/// Score of `id` in the aggregate.
pub fn aggregate_score(card: &ScoreCard, id: ScoreId) -> Stat {
    card.aggregate.scores[id.index()]
}
