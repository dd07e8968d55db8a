//! Task registry, submission validation, scoring and the leaderboard.

pub mod leaderboard;
pub mod registry;
pub mod scoring;
pub mod submission;

pub use leaderboard::{update_leaderboard, Leaderboard, LeaderboardEntry};
pub use registry::{prediction_files, task_registry, ScoreId, TaskKind, TaskSpec, WindowConfig};
pub use scoring::{aggregate_runs, card_from_runs, evaluate, evaluate_run, Aggregate, RunCard, ScoreCard, Stat};
pub use submission::{read_submission, validate_submission, write_submission, Submission, Violation};
