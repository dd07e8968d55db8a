//! Ranked per-dataset leaderboard persisted as one JSON document.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scoring::{ScoreCard, Stat};
use crate::error::{Error, IoContext, Result};
use crate::matrix::write_atomic;
use crate::metrics::NUM_SCORES;

pub const LEADERBOARD_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub rank: usize,
    pub method_name: String,
    pub composite: Stat,
    pub scores: [Stat; NUM_SCORES],
    /// Number of scored runs behind the aggregate.
    pub submission_count: usize,
}

impl LeaderboardEntry {
    pub fn from_card(card: &ScoreCard) -> Self {
        Self {
            rank: 0,
            method_name: card.method_name.clone(),
            composite: card.aggregate.composite,
            scores: card.aggregate.scores,
            submission_count: card.aggregate.runs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub format_version: u32,
    /// Keyed by dataset id.
    pub boards: BTreeMap<String, Vec<LeaderboardEntry>>,
}

impl Default for Leaderboard {
    fn default() -> Self {
        Self {
            format_version: LEADERBOARD_VERSION,
            boards: BTreeMap::new(),
        }
    }
}

impl Leaderboard {
    pub fn board(&self, dataset_id: &str) -> &[LeaderboardEntry] {
        self.boards.get(dataset_id).map_or(&[], Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.boards.values().all(Vec::is_empty)
    }

    /// Replaces any entry with the same method name, then re-ranks.
    pub fn upsert(&mut self, card: &ScoreCard) {
        let board = self.boards.entry(card.dataset_id.clone()).or_default();
        board.retain(|e| e.method_name != card.method_name);
        board.push(LeaderboardEntry::from_card(card));
        rank(board);
    }

    pub fn load(path: &Path) -> Result<Leaderboard> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Leaderboard::default()),
            Err(e) => return Err(Error::Io { path: path.into(), source: e }),
        };
        let board: Leaderboard = serde_json::from_str(&text)?;
        if board.format_version != LEADERBOARD_VERSION {
            return Err(Error::VersionMismatch {
                expected: LEADERBOARD_VERSION,
                found: board.format_version,
            });
        }
        Ok(board)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).at(dir)?;
        }
        write_atomic(path, self.to_json()?.as_bytes())
    }
}

/// Sorts by composite mean descending, ties by method name, and numbers
/// ranks from 1.
pub fn rank(board: &mut [LeaderboardEntry]) {
    board.sort_by(|a, b| {
        b.composite
            .mean
            .total_cmp(&a.composite.mean)
            .then_with(|| a.method_name.cmp(&b.method_name))
    });
    for (i, e) in board.iter_mut().enumerate() {
        e.rank = i + 1;
    }
}

/// Exclusive writer lock held next to the store.
struct StoreLock(PathBuf);

impl StoreLock {
    fn acquire(store: &Path) -> Result<StoreLock> {
        let mut name = store.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).at(dir)?;
        }
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(StoreLock(path)),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::InvalidParameter(format!(
                "leaderboard store is locked by another writer ({} exists)",
                path.display()
            ))),
            Err(e) => Err(Error::Io { path, source: e }),
        }
    }
}

impl Drop for StoreLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

/// Loads the store, upserts `card` and writes it back atomically.
pub fn update_leaderboard(store: &Path, card: &ScoreCard) -> Result<Leaderboard> {
    let _lock = StoreLock::acquire(store)?;
    let mut board = Leaderboard::load(store)?;
    board.upsert(card);
    board.save(store)?;
    log::info!("leaderboard {} updated with {}", store.display(), card.method_name);
    Ok(board)
}
