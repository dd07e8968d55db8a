//! The two naive reference methods: predict zero, or predict the column
//! means of the training input.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datagen::PackSource;
use crate::error::{Error, Result};
use crate::matrix::TimeMatrix;
use crate::referee::{task_registry, Submission, TaskSpec, WindowConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Zeros,
    Average,
}

impl BaselineKind {
    pub fn method_name(self) -> &'static str {
        match self {
            BaselineKind::Zeros => "baseline_zeros",
            BaselineKind::Average => "baseline_average",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineKind::Zeros => "zeros",
            BaselineKind::Average => "average",
        })
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zeros" | "zero" => Ok(BaselineKind::Zeros),
            "average" | "mean" => Ok(BaselineKind::Average),
            _ => Err(Error::InvalidParameter(format!(
                "unknown baseline {s:?}; expected zeros or average"
            ))),
        }
    }
}

pub fn predict_zeros(task: &TaskSpec) -> TimeMatrix {
    TimeMatrix::zeros(task.shape.0, task.shape.1).expect("task shapes are non-empty")
}

/// Every row equals the column means of `train`.
pub fn predict_average(task: &TaskSpec, train: &TimeMatrix) -> Result<TimeMatrix> {
    if train.cols() != task.shape.1 {
        return Err(Error::ShapeMismatch {
            name: task.primary_input().to_string(),
            expected_rows: train.rows(),
            expected_cols: task.shape.1,
            rows: train.rows(),
            cols: train.cols(),
        });
    }
    TimeMatrix::repeat_row(&train.column_means(), task.shape.0)
}

/// A complete submission for `source`. The average baseline reads each
/// task's primary input: the burn-in matrix for the parametric tasks and the
/// training matrix otherwise.
pub fn baseline_submission(
    kind: BaselineKind,
    source: &impl PackSource,
    method_name: &str,
    run_id: &str,
) -> Result<Submission> {
    let tasks = task_registry(&source.manifest().dataset_id, &WindowConfig::default())?;
    let mut sub = Submission::new(method_name, run_id);
    sub.metadata.insert("baseline".into(), kind.to_string());
    for task in &tasks {
        if sub.predictions.contains_key(&task.prediction_name) {
            continue;
        }
        let pred = match kind {
            BaselineKind::Zeros => predict_zeros(task),
            BaselineKind::Average => {
                let train = source.load(task.primary_input())?;
                predict_average(task, &train)?
            }
        };
        sub.predictions.insert(task.prediction_name.clone(), pred);
    }
    Ok(sub)
}
