//! Baselines without logical options: option-level Q-learning that ignores
//! the task automaton, and tabular Q-learning for reward machines.

mod flat;
mod qrm;

pub use flat::{train_flat_options, FlatLearner, FlatOptionsConfig, FlatOptionsPolicy};
pub use qrm::{train_qrm, QrmConfig, QrmLearner, QrmModel};
