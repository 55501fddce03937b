//! Gridworld environment: map files, deterministic dynamics, labels and
//! composed rewards.

mod env;
mod map;

use thiserror::Error;

pub use env::{
    Action, EnvironmentMdp, EventAssignment, EventProvenance, Label, EMPTY_PROP, N_ACTIONS,
    OBSTACLE_PROP,
};
pub use map::{load_map, Cell, GridMap, DEFAULT_OBSTACLE_COST, DEFAULT_STEP_REWARD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("map has no grid rows")]
    Empty,
    #[error("line {line}: row has {found} cells, expected {expected}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("subgoal {0:?} appears more than once")]
    DuplicateSubgoal(char),
    #[error("line {line}, column {column}: unknown map character {ch:?}")]
    UnknownChar {
        ch: char,
        line: usize,
        column: usize,
    },
    #[error("line {line}: {ch:?} is reserved and cannot name a subgoal")]
    Reserved { ch: char, line: usize },
    #[error("line {line}: {message}")]
    Header { line: usize, message: String },
    #[error("start cell ({x}, {y}) is outside the map or a wall")]
    BadStart { x: usize, y: usize },
    #[error("{0}")]
    Reward(String),
    #[error("{0}")]
    Partition(String),
    #[error("event assignment: {0}")]
    Events(String),
}
