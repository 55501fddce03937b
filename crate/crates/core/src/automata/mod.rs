//! Liveness FSAs, safety automata, guards and the proposition partition.

mod fsa;
mod guard;
mod partition;
mod safety;
mod tasks;

use thiserror::Error;

pub use fsa::{validate_fsa, EdgeJson, Fsa, FsaEdge, FsaJson, FsaTable, FsaViolation};
pub use guard::Guard;
pub use partition::{Letter, PropKind, PropositionPartition};
pub use safety::{CostJson, SafetyAutomaton, SafetyCost, SafetyJson, SafetyTable};
pub use tasks::{fsa_isomorphism, hand_coded_task_fsas, Task};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutomatonError {
    #[error("invalid guard `{guard}`: {reason}")]
    Guard { guard: String, reason: String },
    #[error("unknown automaton state {0:?}")]
    UnknownState(String),
    #[error("nondeterministic transition in state {state:?}: {detail}")]
    Nondeterministic { state: String, detail: String },
    #[error("invalid proposition partition: {0}")]
    Partition(String),
    #[error("invalid safety automaton: {0}")]
    Safety(String),
    #[error("automaton JSON: {0}")]
    Json(String),
    #[error("FSA failed validation: {0}")]
    Invalid(String),
}
