//! The fixed matrix layout of a dataset pack: every file name, row count
//! and the window of simulation steps it covers.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Train,
    Test,
}

/// One row of the layout table. `start..end` are simulation step indices of
/// the trajectory the matrix is cut from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutRow {
    pub name: &'static str,
    pub role: Role,
    pub rows: usize,
    pub start: usize,
    pub end: usize,
}

const fn row(name: &'static str, role: Role, rows: usize, start: usize, end: usize) -> LayoutRow {
    LayoutRow { name, role, rows, start, end }
}

/// Identical for both systems apart from the column count.
pub const PACK_LAYOUT: [LayoutRow; 19] = [
    row("X1train", Role::Train, 10000, 0, 10000),
    row("X2train", Role::Train, 10000, 0, 10000),
    row("X3train", Role::Train, 10000, 0, 10000),
    row("X4train", Role::Train, 100, 0, 100),
    row("X5train", Role::Train, 100, 0, 100),
    row("X6train", Role::Train, 10000, 0, 10000),
    row("X7train", Role::Train, 10000, 0, 10000),
    row("X8train", Role::Train, 10000, 0, 10000),
    row("X9train", Role::Train, 100, 9900, 10000),
    row("X10train", Role::Train, 100, 9900, 10000),
    row("X1test", Role::Test, 1000, 10000, 11000),
    row("X2test", Role::Test, 10000, 0, 10000),
    row("X3test", Role::Test, 1000, 10000, 11000),
    row("X4test", Role::Test, 10000, 0, 10000),
    row("X5test", Role::Test, 1000, 10000, 11000),
    row("X6test", Role::Test, 1000, 100, 1100),
    row("X7test", Role::Test, 1000, 100, 1100),
    row("X8test", Role::Test, 1000, 10000, 11000),
    row("X9test", Role::Test, 1000, 10000, 11000),
];

/// Recorded steps of the long trajectories (training span plus forecast horizon).
pub const TRAJECTORY_STEPS: usize = 11000;
pub const TRAIN_STEPS: usize = 10000;
pub const LIMITED_STEPS: usize = 100;
pub const BURN_IN_START: usize = 9900;

pub fn layout_row(name: &str) -> Option<&'static LayoutRow> {
    PACK_LAYOUT.iter().find(|r| r.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_match_row_counts() {
        for r in PACK_LAYOUT {
            assert_eq!(r.end - r.start, r.rows, "{}", r.name);
        }
        assert_eq!(PACK_LAYOUT.iter().filter(|r| r.role == Role::Train).count(), 10);
        assert_eq!(PACK_LAYOUT.iter().filter(|r| r.role == Role::Test).count(), 9);
    }
}
