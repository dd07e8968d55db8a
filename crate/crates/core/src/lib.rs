//! Benchmark engine for data-driven modeling of chaotic systems.
//!
//! Regenerates Lorenz and Kuramoto–Sivashinsky dataset packs, scores
//! prediction submissions on twelve forecasting and reconstruction
//! metrics, and keeps a ranked leaderboard with chart and table reports.

pub mod baselines;
pub mod datagen;
pub mod dynamics;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod referee;
pub mod report;

pub use error::{Error, Result};
pub use matrix::TimeMatrix;
