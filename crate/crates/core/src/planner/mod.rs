//! Meta-policies over options: logical value iteration, option-level
//! Q-learning, the greedy baseline, and flat value iteration on the
//! primitive-action product as an optimality oracle.

mod greedy;
mod hmdp;
mod lvi;
mod qlearn;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{FsaTable, SafetyTable};
use crate::gridworld::EnvironmentMdp;
use crate::options::OptionSet;

pub use greedy::greedy_metapolicy;
pub use hmdp::{hmdp_value_iteration, hmdp_value_iteration_general, HmdpSolution};
pub use lvi::{logical_value_iteration, logical_value_iteration_general, LviSolver};
pub use qlearn::{lof_q_learning, LofQLearner, LofQlConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("no option for subgoal {0:?}")]
    MissingOption(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("no option makes progress from FSA state {f} at cell {cell}")]
    Stuck { f: usize, cell: usize },
    #[error("invalid planner config: {0}")]
    Config(String),
}

/// How event propositions enter the planning backup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventMode {
    /// Events hold this assignment at every decision.
    Fixed(u32),
    /// Events are redrawn from the map's distribution at every decision.
    PerDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub max_sweeps: usize,
    pub tolerance: f64,
    pub mode: EventMode,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            max_sweeps: 1000,
            tolerance: 1e-9,
            mode: EventMode::Fixed(0),
        }
    }
}

impl PlannerConfig {
    pub fn fixed(mask: u32) -> Self {
        PlannerConfig {
            mode: EventMode::Fixed(mask),
            ..Default::default()
        }
    }
}

/// Q and V tables over `(f, fs, s)` and the greedy option choice μ.
///
/// Product index `x = fs * n_cells + s`; simple planning has `n_fs = 1`.
/// `-inf` marks options that cannot terminate or are unavailable, and
/// states from which no option leads anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaPolicy {
    pub n_f: usize,
    pub n_fs: usize,
    pub n_cells: usize,
    pub n_options: usize,
    pub goal: usize,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
    pub mu: Vec<Option<usize>>,
    pub sweeps: usize,
    pub residual: f64,
    pub converged: bool,
}

impl MetaPolicy {
    #[inline]
    pub fn index(&self, f: usize, fs: usize, s: usize) -> usize {
        (f * self.n_fs + fs) * self.n_cells + s
    }

    pub fn value(&self, f: usize, fs: usize, s: usize) -> f64 {
        self.v[self.index(f, fs, s)]
    }

    pub fn q_value(&self, f: usize, fs: usize, s: usize, o: usize) -> f64 {
        self.q[self.index(f, fs, s) * self.n_options + o]
    }

    pub fn choose(&self, f: usize, fs: usize, s: usize) -> Option<usize> {
        self.mu[self.index(f, fs, s)]
    }

    /// Non-goal `(f, fs, s)` states on free cells with no usable option.
    pub fn unsatisfiable_states(&self, env: &EnvironmentMdp) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for f in (0..self.n_f).filter(|&f| f != self.goal) {
            for fs in 0..self.n_fs {
                for s in env.free_cells() {
                    if self.mu[self.index(f, fs, s)].is_none() {
                        out.push((f, fs, s));
                    }
                }
            }
        }
        out
    }

    /// Serializable form; `null` stands for `-inf`.
    pub fn to_json(&self) -> serde_json::Value {
        let opt = |v: &Vec<f64>| {
            v.iter()
                .map(|x| x.is_finite().then_some(*x))
                .collect::<Vec<_>>()
        };
        serde_json::json!({
            "n_f": self.n_f,
            "n_fs": self.n_fs,
            "n_cells": self.n_cells,
            "n_options": self.n_options,
            "goal": self.goal,
            "sweeps": self.sweeps,
            "residual": if self.residual.is_finite() { Some(self.residual) } else { None },
            "converged": self.converged,
            "v": opt(&self.v),
            "q": opt(&self.q),
            "mu": self.mu,
        })
    }
}

/// Check that the options, automata and environment fit together.
pub(crate) fn check_inputs(
    fsa: &FsaTable,
    safety: Option<&SafetyTable>,
    options: &OptionSet,
    env: &EnvironmentMdp,
) -> Result<(), PlanError> {
    let subgoals = &env.partition.subgoals;
    if options.options.len() != subgoals.len() {
        let missing = subgoals
            .iter()
            .find(|s| !options.options.iter().any(|o| &o.name == *s))
            .cloned()
            .unwrap_or_default();
        return Err(PlanError::MissingOption(missing));
    }
    for (i, o) in options.options.iter().enumerate() {
        if o.subgoal != i || o.name != subgoals[i] {
            return Err(PlanError::Mismatch(format!(
                "option {i} is for {:?}",
                o.name
            )));
        }
        if o.model.n_cells != env.n_states() {
            return Err(PlanError::Mismatch(
                "option models are for another map".into(),
            ));
        }
    }
    let n_fs = safety.map_or(1, |t| t.n_states);
    if options.n_fs() != n_fs {
        return Err(PlanError::Mismatch(format!(
            "options cover {} safety states, planner expects {n_fs}",
            options.n_fs()
        )));
    }
    if fsa.n_letters != env.partition.n_letters() {
        return Err(PlanError::Mismatch(
            "FSA compiled for another partition".into(),
        ));
    }
    Ok(())
}
