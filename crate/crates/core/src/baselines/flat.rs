use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gridworld::EnvironmentMdp;
use crate::options::{argmax, OptionSet};
use crate::planner::PlanError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlatOptionsConfig {
    pub episodes: usize,
    pub max_decisions: usize,
    pub alpha: f64,
    pub epsilon: f64,
    /// Discount between option decisions; below one so that the sum of
    /// option costs over an endless episode stays bounded.
    pub gamma: f64,
    pub seed: u64,
}

impl Default for FlatOptionsConfig {
    fn default() -> Self {
        FlatOptionsConfig {
            episodes: 500,
            max_decisions: 20,
            alpha: 0.5,
            epsilon: 0.15,
            gamma: 0.9,
            seed: 0,
        }
    }
}

/// Option-level Q table over environment cells only.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatOptionsPolicy {
    pub n_cells: usize,
    pub n_options: usize,
    pub q: Vec<f64>,
}

impl FlatOptionsPolicy {
    pub fn row(&self, s: usize) -> &[f64] {
        &self.q[s * self.n_options..(s + 1) * self.n_options]
    }

    /// Greedy option among those usable at `s`.
    pub fn choose(&self, s: usize) -> Option<usize> {
        let row = self.row(s);
        (row.iter().any(|&q| q > f64::NEG_INFINITY)).then(|| argmax(row))
    }
}

pub struct FlatLearner<'a> {
    options: &'a OptionSet,
    pub cfg: FlatOptionsConfig,
    rng: ChaCha8Rng,
    free: Vec<usize>,
    pub policy: FlatOptionsPolicy,
    pub episodes_done: usize,
}

impl<'a> FlatLearner<'a> {
    pub fn new(
        env: &'a EnvironmentMdp,
        options: &'a OptionSet,
        cfg: &FlatOptionsConfig,
    ) -> Result<Self, PlanError> {
        if options.general {
            return Err(PlanError::Config("flat options use simple options".into()));
        }
        let n_cells = env.n_states();
        let n_options = options.options.len();
        let mut q = vec![f64::NEG_INFINITY; n_cells * n_options];
        for s in env.free_cells() {
            for (o, opt) in options.options.iter().enumerate() {
                if s != opt.goal_cell && opt.model.terminates(s) {
                    q[s * n_options + o] = 0.0;
                }
            }
        }
        Ok(FlatLearner {
            options,
            cfg: cfg.clone(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            free: env.free_cells(),
            policy: FlatOptionsPolicy {
                n_cells,
                n_options,
                q,
            },
            episodes_done: 0,
        })
    }

    pub fn run_episode(&mut self) {
        let mut s = self.free[self.rng.gen_range(0..self.free.len())];
        let p = &mut self.policy;
        let k = p.n_options;
        for _ in 0..self.cfg.max_decisions {
            let row = &p.q[s * k..(s + 1) * k];
            let available: Vec<usize> = (0..k).filter(|&o| row[o] > f64::NEG_INFINITY).collect();
            if available.is_empty() {
                break;
            }
            let o = if self.rng.gen::<f64>() < self.cfg.epsilon {
                available[self.rng.gen_range(0..available.len())]
            } else {
                argmax(row)
            };
            let opt = &self.options.options[o];
            let s2 = opt.goal_cell;
            let next = p.q[s2 * k..(s2 + 1) * k]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let next = if next.is_finite() { next } else { 0.0 };
            let target = opt.model.reward[s] + self.cfg.gamma * next;
            let i = s * k + o;
            p.q[i] += self.cfg.alpha * (target - p.q[i]);
            s = s2;
        }
        self.episodes_done += 1;
    }
}

/// Option-level Q-learning on the environment alone. The task automaton is
/// never consulted, so the learned policy cannot depend on it.
pub fn train_flat_options(
    env: &EnvironmentMdp,
    options: &OptionSet,
    cfg: &FlatOptionsConfig,
) -> Result<FlatOptionsPolicy, PlanError> {
    let mut l = FlatLearner::new(env, options, cfg)?;
    for _ in 0..cfg.episodes {
        l.run_episode();
    }
    Ok(l.policy)
}
