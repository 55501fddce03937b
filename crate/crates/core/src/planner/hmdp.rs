use crate::automata::{Fsa, SafetyAutomaton, SafetyTable};
use crate::gridworld::{EnvironmentMdp, N_ACTIONS};

use super::PlanError;

const MAX_SWEEPS: usize = 100_000;

/// Optimal values and actions of the flat product MDP over primitive actions.
#[derive(Debug, Clone, PartialEq)]
pub struct HmdpSolution {
    pub n_f: usize,
    pub n_fs: usize,
    pub n_cells: usize,
    pub goal: usize,
    pub v: Vec<f64>,
    pub policy: Vec<Option<usize>>,
    pub sweeps: usize,
    pub residual: f64,
}

impl HmdpSolution {
    pub fn value(&self, f: usize, fs: usize, s: usize) -> f64 {
        self.v[(f * self.n_fs + fs) * self.n_cells + s]
    }

    pub fn action(&self, f: usize, fs: usize, s: usize) -> Option<usize> {
        self.policy[(f * self.n_fs + fs) * self.n_cells + s]
    }
}

fn solve(
    fsa: &Fsa,
    safety: Option<&SafetyTable>,
    env: &EnvironmentMdp,
    events: u32,
    tol: f64,
) -> Result<HmdpSolution, PlanError> {
    if !(tol > 0.0) {
        return Err(PlanError::Config("tolerance must be positive".into()));
    }
    if events as usize >= env.n_event_masks() {
        return Err(PlanError::Config(format!(
            "event mask {events:#b} out of range"
        )));
    }
    let table = fsa
        .compile(&env.partition)
        .map_err(|e| PlanError::Mismatch(e.to_string()))?;
    let n_f = table.n_states();
    let n_fs = safety.map_or(1, |t| t.n_states);
    let n = env.n_states();
    let idx = |f: usize, fs: usize, s: usize| (f * n_fs + fs) * n + s;
    let mut v = vec![0.0; n_f * n_fs * n];
    let mut policy = vec![None; v.len()];
    for f in 0..n_f {
        for fs in 0..n_fs {
            for s in 0..n {
                if !env.map.is_free(s) {
                    v[idx(f, fs, s)] = f64::NEG_INFINITY;
                }
            }
        }
    }
    let free = env.free_cells();
    let mut sweeps = 0;
    let mut residual = f64::INFINITY;
    while residual >= tol && sweeps < MAX_SWEEPS {
        let old = v.clone();
        residual = 0.0;
        for f in (0..n_f).filter(|&f| f != table.goal) {
            let rf = table.reward[f];
            for fs in 0..n_fs {
                for &s in &free {
                    let mut best = f64::NEG_INFINITY;
                    let mut arg = None;
                    for a in 0..N_ACTIONS {
                        let s2 = env.step(s, a);
                        let label = env.label(s2);
                        let (fs2, r) = match safety {
                            None => (0, env.reward(s, a)),
                            Some(t) => {
                                let (f2, rs) = t.step(fs, label.safety, events);
                                (f2, env.step_reward + rs)
                            }
                        };
                        let f2 = table.next(f, label.subgoal, events);
                        let q = rf * r + env.gamma * old[idx(f2, fs2, s2)];
                        if q > best {
                            best = q;
                            arg = Some(a);
                        }
                    }
                    let i = idx(f, fs, s);
                    residual = f64::max(residual, (best - old[i]).abs());
                    v[i] = best;
                    policy[i] = arg;
                }
            }
        }
        sweeps += 1;
    }
    Ok(HmdpSolution {
        n_f,
        n_fs,
        n_cells: n,
        goal: table.goal,
        v,
        policy,
        sweeps,
        residual,
    })
}

/// Flat value iteration on `F × S` with reward `R_F(f) · R(s, a)` and the
/// FSA stepped on the label of every entered cell, events held fixed.
pub fn hmdp_value_iteration(
    fsa: &Fsa,
    env: &EnvironmentMdp,
    events: u32,
    tol: f64,
) -> Result<HmdpSolution, PlanError> {
    solve(fsa, None, env, events, tol)
}

/// Flat value iteration on `F × F_S × S`.
pub fn hmdp_value_iteration_general(
    fsa: &Fsa,
    safety: &SafetyAutomaton,
    env: &EnvironmentMdp,
    events: u32,
    tol: f64,
) -> Result<HmdpSolution, PlanError> {
    let table = safety
        .compile(&env.partition)
        .map_err(|e| PlanError::Mismatch(e.to_string()))?;
    solve(fsa, Some(&table), env, events, tol)
}
