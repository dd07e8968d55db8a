//! Prediction submissions and their on-disk layout
//! `<root>/<method>/<run_id>/X{p}pred.mat` (or `.csv`) plus an optional
//! `meta` file of `key=value` lines.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::registry::{prediction_files, TaskSpec};
use crate::error::{Error, IoContext, Result};
use crate::matrix::{write_atomic, TimeMatrix};

pub const META_FILE: &str = "meta";

#[derive(Debug, Clone, PartialEq)]
pub struct Submission {
    pub method_name: String,
    pub run_id: String,
    pub predictions: BTreeMap<String, TimeMatrix>,
    pub metadata: BTreeMap<String, String>,
}

impl Submission {
    pub fn new(method_name: impl Into<String>, run_id: impl Into<String>) -> Self {
        Self {
            method_name: method_name.into(),
            run_id: run_id.into(),
            predictions: BTreeMap::new(),
            metadata: BTreeMap::new(),
        }
    }
}

/// A reason a prediction cannot be scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Missing { name: String },
    Shape { name: String, expected: (usize, usize), found: (usize, usize) },
    NonFinite { name: String, count: usize },
    Unreadable { name: String, reason: String },
    Duplicate { name: String },
}

impl Violation {
    pub fn prediction(&self) -> &str {
        match self {
            Violation::Missing { name }
            | Violation::Shape { name, .. }
            | Violation::NonFinite { name, .. }
            | Violation::Unreadable { name, .. }
            | Violation::Duplicate { name } => name,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Missing { name } => write!(f, "{name}: missing"),
            Violation::Shape { name, expected, found } => write!(
                f,
                "{name}: shape [{}, {}], expected [{}, {}]",
                found.0, found.1, expected.0, expected.1
            ),
            Violation::NonFinite { name, count } => write!(f, "{name}: {count} non-finite entries"),
            Violation::Unreadable { name, reason } => write!(f, "{name}: unreadable ({reason})"),
            Violation::Duplicate { name } => write!(f, "{name}: supplied in more than one format"),
        }
    }
}

/// Checks every prediction file the tasks need. Never fails; an empty list
/// means the submission is scoreable in full.
pub fn validate_submission(sub: &Submission, tasks: &[TaskSpec]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (name, shape) in prediction_files(tasks) {
        let Some(m) = sub.predictions.get(name) else {
            out.push(Violation::Missing { name: name.to_string() });
            continue;
        };
        if m.shape() != shape {
            out.push(Violation::Shape {
                name: name.to_string(),
                expected: shape,
                found: m.shape(),
            });
            continue;
        }
        let count = m.count_non_finite();
        if count > 0 {
            out.push(Violation::NonFinite { name: name.to_string(), count });
        }
    }
    out
}

fn is_prediction_name(stem: &str) -> bool {
    stem.strip_prefix('X')
        .and_then(|s| s.strip_suffix("pred"))
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

pub fn run_dir(root: &Path, method: &str, run_id: &str) -> PathBuf {
    root.join(method).join(run_id)
}

/// Writes `<root>/<method>/<run_id>/` and returns that directory.
pub fn write_submission(sub: &Submission, root: &Path) -> Result<PathBuf> {
    let dir = run_dir(root, &sub.method_name, &sub.run_id);
    std::fs::create_dir_all(&dir).at(&dir)?;
    for (name, m) in &sub.predictions {
        m.write_mat(&dir.join(format!("{name}.mat")))?;
    }
    if !sub.metadata.is_empty() {
        let text: String = sub.metadata.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        write_atomic(&dir.join(META_FILE), text.as_bytes())?;
    }
    Ok(dir)
}

/// Whether `dir` directly holds prediction files.
pub fn is_run_dir(dir: &Path) -> bool {
    std::fs::read_dir(dir).is_ok_and(|entries| {
        entries.flatten().any(|e| {
            let p = e.path();
            p.file_stem().and_then(|s| s.to_str()).is_some_and(is_prediction_name)
        })
    })
}

/// Reads one run directory. The method name is taken from the parent
/// directory and the run id from the directory itself. Files that cannot be
/// decoded are reported as violations rather than errors.
pub fn read_submission(dir: &Path) -> Result<(Submission, Vec<Violation>)> {
    let name_of = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned());
    let run_id = name_of(dir).unwrap_or_else(|| "run".into());
    let method = dir
        .parent()
        .and_then(name_of)
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unnamed".into());
    let mut sub = Submission::new(method, run_id);
    let mut violations = Vec::new();

    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .at(dir)?
        .map(|e| e.map(|e| e.path()).at(dir))
        .collect::<Result<_>>()?;
    files.sort();
    for path in files {
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
        if path.file_name().is_some_and(|n| n == META_FILE) {
            let text = std::fs::read_to_string(&path).at(&path)?;
            for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
                if let Some((k, v)) = line.split_once('=') {
                    sub.metadata.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
            continue;
        }
        let ext = path.extension().and_then(|e| e.to_str());
        if !is_prediction_name(stem) || !matches!(ext, Some("mat" | "csv")) {
            log::debug!("ignoring {}", path.display());
            continue;
        }
        if sub.predictions.contains_key(stem) {
            violations.push(Violation::Duplicate { name: stem.to_string() });
            sub.predictions.remove(stem);
            continue;
        }
        if violations.iter().any(|v| matches!(v, Violation::Duplicate { name } if name == stem)) {
            continue;
        }
        match TimeMatrix::read_any(&path) {
            Ok(m) => {
                sub.predictions.insert(stem.to_string(), m);
            }
            Err(e @ (Error::MalformedMatrix { .. } | Error::InvalidParameter(_))) => {
                violations.push(Violation::Unreadable {
                    name: stem.to_string(),
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok((sub, violations))
}
