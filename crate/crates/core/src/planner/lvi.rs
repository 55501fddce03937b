use crate::automata::{Fsa, FsaTable, SafetyAutomaton, SafetyTable};
use crate::gridworld::EnvironmentMdp;
use crate::options::OptionSet;

use super::{check_inputs, EventMode, MetaPolicy, PlanError, PlannerConfig};

/// Synchronous logical value iteration, one sweep at a time.
pub struct LviSolver<'a> {
    fsa: FsaTable,
    options: &'a OptionSet,
    env: &'a EnvironmentMdp,
    weights: Vec<(u32, f64)>,
    pub cfg: PlannerConfig,
    pub policy: MetaPolicy,
}

pub(crate) fn event_weights(
    env: &EnvironmentMdp,
    mode: EventMode,
) -> Result<Vec<(u32, f64)>, PlanError> {
    match mode {
        EventMode::Fixed(mask) => {
            if mask as usize >= env.n_event_masks() {
                return Err(PlanError::Config(format!(
                    "event mask {mask:#b} out of range"
                )));
            }
            Ok(vec![(mask, 1.0)])
        }
        EventMode::PerDecision => Ok((0..env.n_event_masks() as u32)
            .map(|m| (m, env.event_prob(m)))
            .filter(|&(_, w)| w > 0.0)
            .collect()),
    }
}

impl<'a> LviSolver<'a> {
    pub fn new(
        fsa: &Fsa,
        safety: Option<&SafetyTable>,
        options: &'a OptionSet,
        env: &'a EnvironmentMdp,
        cfg: &PlannerConfig,
    ) -> Result<Self, PlanError> {
        if !(cfg.tolerance > 0.0) {
            return Err(PlanError::Config("tolerance must be positive".into()));
        }
        let table = fsa
            .compile(&env.partition)
            .map_err(|e| PlanError::Mismatch(e.to_string()))?;
        check_inputs(&table, safety, options, env)?;
        let weights = event_weights(env, cfg.mode)?;
        let n_f = table.n_states();
        let n_fs = safety.map_or(1, |t| t.n_states);
        let n_cells = env.n_states();
        let n_options = options.options.len();
        let total = n_f * n_fs * n_cells;
        let mut v = vec![0.0; total];
        let mut mu = vec![None; total];
        for f in 0..n_f {
            for fs in 0..n_fs {
                for s in 0..n_cells {
                    let i = (f * n_fs + fs) * n_cells + s;
                    if !env.map.is_free(s) {
                        v[i] = f64::NEG_INFINITY;
                    } else if f == table.goal {
                        mu[i] = Some(0);
                    }
                }
            }
        }
        let mut q = vec![f64::NEG_INFINITY; total * n_options];
        for fs in 0..n_fs {
            for s in env.free_cells() {
                let i = (table.goal * n_fs + fs) * n_cells + s;
                q[i * n_options..(i + 1) * n_options].fill(0.0);
            }
        }
        let policy = MetaPolicy {
            n_f,
            n_fs,
            n_cells,
            n_options,
            goal: table.goal,
            q,
            v,
            mu,
            sweeps: 0,
            residual: f64::INFINITY,
            converged: false,
        };
        Ok(LviSolver {
            fsa: table,
            options,
            env,
            weights,
            cfg: cfg.clone(),
            policy,
        })
    }

    /// One synchronous backup of every `(f, fs, s)`; returns the sup-norm
    /// change in V.
    pub fn sweep(&mut self) -> f64 {
        let p = &mut self.policy;
        let old = p.v.clone();
        let (n_fs, n_cells, n_opt) = (p.n_fs, p.n_cells, p.n_options);
        let free = self.env.free_cells();
        for f in (0..p.n_f).filter(|&f| f != p.goal) {
            let rf = self.fsa.reward[f];
            for fs in 0..n_fs {
                for &s in &free {
                    let x = fs * n_cells + s;
                    let i = (f * n_fs + fs) * n_cells + s;
                    let mut best = f64::NEG_INFINITY;
                    let mut arg = None;
                    for (o, opt) in self.options.options.iter().enumerate() {
                        let m = &opt.model;
                        let q = if s == opt.goal_cell || !m.terminates(x) {
                            f64::NEG_INFINITY
                        } else {
                            let next_x = m.terminal_fs[x] * n_cells + opt.goal_cell;
                            let mut cont = 0.0;
                            for &(mask, w) in &self.weights {
                                let f2 = self.fsa.next(f, Some(o), mask);
                                cont += w * old[f2 * n_fs * n_cells + next_x];
                            }
                            rf * m.reward[x] + m.discount[x] * cont
                        };
                        p.q[i * n_opt + o] = q;
                        if q > best {
                            best = q;
                            arg = Some(o);
                        }
                    }
                    p.v[i] = best;
                    p.mu[i] = arg;
                }
            }
        }
        let residual = old
            .iter()
            .zip(&p.v)
            .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
            .fold(0.0, f64::max);
        p.sweeps += 1;
        p.residual = residual;
        p.converged = residual < self.cfg.tolerance;
        residual
    }

    pub fn solve(mut self) -> MetaPolicy {
        while self.policy.sweeps < self.cfg.max_sweeps && !self.policy.converged {
            self.sweep();
        }
        if !self.policy.converged {
            log::warn!(
                "logical value iteration stopped after {} sweeps with residual {}",
                self.policy.sweeps,
                self.policy.residual
            );
        }
        self.policy
    }
}

/// Logical value iteration for the simple formulation (safety costs folded
/// into the environment reward).
pub fn logical_value_iteration(
    fsa: &Fsa,
    options: &OptionSet,
    env: &EnvironmentMdp,
    cfg: &PlannerConfig,
) -> Result<MetaPolicy, PlanError> {
    Ok(LviSolver::new(fsa, None, options, env, cfg)?.solve())
}

/// Logical value iteration over `(f, fs, s)` with options trained on the
/// product with `safety`.
pub fn logical_value_iteration_general(
    fsa: &Fsa,
    safety: &SafetyAutomaton,
    options: &OptionSet,
    env: &EnvironmentMdp,
    cfg: &PlannerConfig,
) -> Result<MetaPolicy, PlanError> {
    let table = safety
        .compile(&env.partition)
        .map_err(|e| PlanError::Mismatch(e.to_string()))?;
    Ok(LviSolver::new(fsa, Some(&table), options, env, cfg)?.solve())
}
