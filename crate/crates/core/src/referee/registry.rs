//! Mapping from each of the twelve scores to its input, prediction and
//! ground-truth files.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datagen::{layout_row, System};
use crate::error::{Error, Result};
use crate::metrics::{MetricKind, MetricWindows, NUM_SCORES};

/// Score identifier `E1`..`E12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ScoreId(u8);

impl ScoreId {
    pub fn new(n: u8) -> Result<Self> {
        if (1..=NUM_SCORES as u8).contains(&n) {
            Ok(Self(n))
        } else {
            Err(Error::InvalidParameter(format!("score id E{n} out of range")))
        }
    }

    pub fn all() -> impl Iterator<Item = ScoreId> {
        (1..=NUM_SCORES as u8).map(ScoreId)
    }

    pub fn number(self) -> u8 {
        self.0
    }

    /// Zero-based position in score arrays.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for ScoreId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", self.0)
    }
}

impl FromStr for ScoreId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s
            .strip_prefix('E')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::InvalidParameter(format!("bad score id {s:?}")))?;
        Self::new(n)
    }
}

impl TryFrom<String> for ScoreId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ScoreId> for String {
    fn from(id: ScoreId) -> String {
        id.to_string()
    }
}

/// Window defaults shared by all tasks of a scoring run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Leading rows for short-time forecast scores. Reconstruction scores
    /// always use the full truth window.
    pub forecast_short_k: usize,
    pub long_k: usize,
    pub kmax: usize,
    pub bins: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            forecast_short_k: 100,
            long_k: 500,
            kmax: 100,
            bins: 41,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        MetricWindows {
            short_k: self.forecast_short_k,
            long_k: self.long_k,
            kmax: self.kmax,
            bins: self.bins,
        }
        .validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    ShortTimeForecast,
    LongTimeForecast,
    Reconstruction,
    InterpolationForecast,
    ExtrapolationForecast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub score_id: ScoreId,
    pub test: String,
    pub kind: TaskKind,
    pub train_inputs: Vec<String>,
    pub burn_in: Option<String>,
    pub prediction_name: String,
    pub truth_name: String,
    pub metric: MetricKind,
    pub windows: MetricWindows,
    /// Required prediction shape (equal to the truth shape).
    pub shape: (usize, usize),
}

impl TaskSpec {
    /// The training matrix a single-input method should consume: the burn-in
    /// matrix when the task has one, otherwise the first training input.
    pub fn primary_input(&self) -> &str {
        self.burn_in.as_deref().unwrap_or(&self.train_inputs[0])
    }
}

struct Row {
    test: &'static str,
    kind: TaskKind,
    train: &'static [&'static str],
    burn_in: Option<&'static str>,
    prediction: &'static str,
    truth: &'static str,
}

const PARAMETRIC_TRAIN: &[&str] = &["X6train", "X7train", "X8train"];

/// One row per score, E1 first.
const ROWS: [Row; NUM_SCORES] = [
    Row { test: "Forecasting", kind: TaskKind::ShortTimeForecast, train: &["X1train"], burn_in: None, prediction: "X1pred", truth: "X1test" },
    Row { test: "Forecasting", kind: TaskKind::LongTimeForecast, train: &["X1train"], burn_in: None, prediction: "X1pred", truth: "X1test" },
    Row { test: "Noisy (medium)", kind: TaskKind::Reconstruction, train: &["X2train"], burn_in: None, prediction: "X2pred", truth: "X2test" },
    Row { test: "Noisy (medium)", kind: TaskKind::LongTimeForecast, train: &["X2train"], burn_in: None, prediction: "X3pred", truth: "X3test" },
    Row { test: "Noisy (high)", kind: TaskKind::Reconstruction, train: &["X3train"], burn_in: None, prediction: "X4pred", truth: "X4test" },
    Row { test: "Noisy (high)", kind: TaskKind::LongTimeForecast, train: &["X3train"], burn_in: None, prediction: "X5pred", truth: "X5test" },
    Row { test: "Limited Data (clean)", kind: TaskKind::ShortTimeForecast, train: &["X4train"], burn_in: None, prediction: "X6pred", truth: "X6test" },
    Row { test: "Limited Data (clean)", kind: TaskKind::LongTimeForecast, train: &["X4train"], burn_in: None, prediction: "X6pred", truth: "X6test" },
    Row { test: "Limited Data (noisy)", kind: TaskKind::ShortTimeForecast, train: &["X5train"], burn_in: None, prediction: "X7pred", truth: "X7test" },
    Row { test: "Limited Data (noisy)", kind: TaskKind::LongTimeForecast, train: &["X5train"], burn_in: None, prediction: "X7pred", truth: "X7test" },
    Row { test: "Parametric Generalization", kind: TaskKind::InterpolationForecast, train: PARAMETRIC_TRAIN, burn_in: Some("X9train"), prediction: "X8pred", truth: "X8test" },
    Row { test: "Parametric Generalization", kind: TaskKind::ExtrapolationForecast, train: PARAMETRIC_TRAIN, burn_in: Some("X10train"), prediction: "X9pred", truth: "X9test" },
];

fn dimension(system: System) -> usize {
    system.nominal_params().dimension()
}

/// The twelve tasks of a dataset, E1 first. The long-time metric is the
/// log-power spectrum for the spatio-temporal system and per-coordinate
/// histograms for the three-dimensional one.
pub fn task_registry(dataset_id: &str, windows: &WindowConfig) -> Result<Vec<TaskSpec>> {
    let system = System::from_dataset_id(dataset_id)?;
    windows.validate()?;
    let long_metric = match system {
        System::Ks => MetricKind::LongTimeSpectral,
        System::Lorenz => MetricKind::LongTimeHistogram,
    };
    let cols = dimension(system);
    let tasks = ScoreId::all()
        .zip(&ROWS)
        .map(|(score_id, row)| {
            let truth_rows = layout_row(row.truth).expect("truth file is in the layout").rows;
            let metric = match row.kind {
                TaskKind::LongTimeForecast => long_metric,
                _ => MetricKind::ShortTime,
            };
            let short_k = match row.kind {
                TaskKind::Reconstruction => truth_rows,
                _ => windows.forecast_short_k.min(truth_rows),
            };
            TaskSpec {
                score_id,
                test: row.test.to_string(),
                kind: row.kind,
                train_inputs: row.train.iter().map(|s| s.to_string()).collect(),
                burn_in: row.burn_in.map(String::from),
                prediction_name: row.prediction.to_string(),
                truth_name: row.truth.to_string(),
                metric,
                windows: MetricWindows {
                    short_k,
                    long_k: windows.long_k.min(truth_rows),
                    kmax: windows.kmax,
                    bins: windows.bins,
                },
                shape: (truth_rows, cols),
            }
        })
        .collect();
    Ok(tasks)
}

/// Distinct prediction files of a registry with their shapes, in score order.
pub fn prediction_files(tasks: &[TaskSpec]) -> Vec<(&str, (usize, usize))> {
    let mut out: Vec<(&str, (usize, usize))> = Vec::new();
    for t in tasks {
        if !out.iter().any(|(n, _)| *n == t.prediction_name) {
            out.push((&t.prediction_name, t.shape));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// (score, train inputs, burn-in, truth, long-time?)
    type Row = (&'static str, &'static [&'static str], Option<&'static str>, &'static str, bool);

    const TABLE: [Row; 12] = [
        ("E1", &["X1train"], None, "X1test", false),
        ("E2", &["X1train"], None, "X1test", true),
        ("E3", &["X2train"], None, "X2test", false),
        ("E4", &["X2train"], None, "X3test", true),
        ("E5", &["X3train"], None, "X4test", false),
        ("E6", &["X3train"], None, "X5test", true),
        ("E7", &["X4train"], None, "X6test", false),
        ("E8", &["X4train"], None, "X6test", true),
        ("E9", &["X5train"], None, "X7test", false),
        ("E10", &["X5train"], None, "X7test", true),
        ("E11", &["X6train", "X7train", "X8train"], Some("X9train"), "X8test", false),
        ("E12", &["X6train", "X7train", "X8train"], Some("X10train"), "X9test", false),
    ];

    #[test]
    fn registry_matches_table() {
        for id in ["ODE_Lorenz", "PDE_KS"] {
            let tasks = task_registry(id, &WindowConfig::default()).unwrap();
            assert_eq!(tasks.len(), 12);
            for (t, (score, train, burn, truth, long)) in tasks.iter().zip(TABLE) {
                assert_eq!(t.score_id.to_string(), score);
                assert_eq!(t.train_inputs, train.to_vec());
                assert_eq!(t.burn_in.as_deref(), burn);
                assert_eq!(t.truth_name, truth);
                assert_eq!(t.metric.is_long_time(), long, "{score}");
            }
        }
    }

    #[test]
    fn long_time_metric_depends_on_dataset() {
        let lorenz = task_registry("ODE_Lorenz", &WindowConfig::default()).unwrap();
        let ks = task_registry("PDE_KS", &WindowConfig::default()).unwrap();
        for (l, k) in lorenz.iter().zip(&ks) {
            if l.metric.is_long_time() {
                assert_eq!(l.metric, MetricKind::LongTimeHistogram);
                assert_eq!(k.metric, MetricKind::LongTimeSpectral);
            }
        }
    }

    #[test]
    fn named_examples() {
        let tasks = task_registry("PDE_KS", &WindowConfig::default()).unwrap();
        let e3 = &tasks[2];
        assert_eq!((e3.truth_name.as_str(), e3.kind), ("X2test", TaskKind::Reconstruction));
        assert_eq!(e3.windows.short_k, 10000);
        let e4 = &tasks[3];
        assert_eq!((e4.prediction_name.as_str(), e4.truth_name.as_str()), ("X3pred", "X3test"));
        let e12 = &tasks[11];
        assert_eq!(e12.burn_in.as_deref(), Some("X10train"));
        assert_eq!(e12.kind, TaskKind::ExtrapolationForecast);
        assert_eq!(e12.shape, (1000, 1024));
        assert_eq!(tasks[0].windows.short_k, 100);
    }

    #[test]
    fn nine_prediction_files() {
        let tasks = task_registry("ODE_Lorenz", &WindowConfig::default()).unwrap();
        let files = prediction_files(&tasks);
        let names: Vec<&str> = files.iter().map(|(n, _)| *n).collect();
        assert_eq!(names, ["X1pred", "X2pred", "X3pred", "X4pred", "X5pred", "X6pred", "X7pred", "X8pred", "X9pred"]);
        assert_eq!(files[1].1, (10000, 3));
        assert_eq!(files[0].1, (1000, 3));
    }

    #[test]
    fn unknown_dataset() {
        assert!(task_registry("SST", &WindowConfig::default()).is_err());
        assert!(task_registry("bogus", &WindowConfig::default()).is_err());
    }

    #[test]
    fn score_id_parsing() {
        assert_eq!("E12".parse::<ScoreId>().unwrap().index(), 11);
        assert!("E13".parse::<ScoreId>().is_err());
        assert!("E0".parse::<ScoreId>().is_err());
    }
}
