use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automata::{Fsa, FsaTable};
use crate::gridworld::EnvironmentMdp;
use crate::options::OptionSet;

use super::{check_inputs, EventMode, MetaPolicy, PlanError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LofQlConfig {
    pub episodes: usize,
    /// Option decisions per episode.
    pub max_decisions: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Fixed start cell; episodes start on a random free cell when unset.
    #[serde(default)]
    pub start: Option<usize>,
}

impl Default for LofQlConfig {
    fn default() -> Self {
        LofQlConfig {
            episodes: 500,
            max_decisions: 20,
            alpha: 0.5,
            epsilon: 0.15,
            seed: 0,
            start: None,
        }
    }
}

/// Option-level epsilon-greedy Q-learning over `(f, s)`, sampling FSA
/// transitions instead of reading them off the automaton.
pub struct LofQLearner<'a> {
    fsa: FsaTable,
    options: &'a OptionSet,
    env: &'a EnvironmentMdp,
    pub cfg: LofQlConfig,
    mode: EventMode,
    rng: ChaCha8Rng,
    free: Vec<usize>,
    pub policy: MetaPolicy,
    pub episodes_done: usize,
    pub decisions: u64,
}

impl<'a> LofQLearner<'a> {
    pub fn new(
        fsa: &Fsa,
        options: &'a OptionSet,
        env: &'a EnvironmentMdp,
        mode: EventMode,
        cfg: &LofQlConfig,
    ) -> Result<Self, PlanError> {
        if !(cfg.alpha > 0.0 && cfg.alpha <= 1.0 && (0.0..=1.0).contains(&cfg.epsilon)) {
            return Err(PlanError::Config(format!("{cfg:?}")));
        }
        if options.general {
            return Err(PlanError::Config(
                "option-level Q-learning uses simple options".into(),
            ));
        }
        let table = fsa
            .compile(&env.partition)
            .map_err(|e| PlanError::Mismatch(e.to_string()))?;
        check_inputs(&table, None, options, env)?;
        if let EventMode::Fixed(mask) = mode {
            if mask as usize >= env.n_event_masks() {
                return Err(PlanError::Config(format!(
                    "event mask {mask:#b} out of range"
                )));
            }
        }
        let n_f = table.n_states();
        let n_cells = env.n_states();
        let n_options = options.options.len();
        let free = env.free_cells();
        if let Some(s) = cfg.start {
            if !free.contains(&s) {
                return Err(PlanError::Config(format!("start cell {s} is not free")));
            }
        }
        let mut v = vec![f64::NEG_INFINITY; n_f * n_cells];
        let mut q = vec![f64::NEG_INFINITY; n_f * n_cells * n_options];
        let mut mu = vec![None; n_f * n_cells];
        for f in 0..n_f {
            for &s in &free {
                let i = f * n_cells + s;
                v[i] = 0.0;
                for (o, opt) in options.options.iter().enumerate() {
                    let usable = f == table.goal || (s != opt.goal_cell && opt.model.terminates(s));
                    if usable {
                        q[i * n_options + o] = 0.0;
                        mu[i].get_or_insert(o);
                    }
                }
                if f != table.goal && mu[i].is_none() {
                    v[i] = f64::NEG_INFINITY;
                }
            }
        }
        let policy = MetaPolicy {
            n_f,
            n_fs: 1,
            n_cells,
            n_options,
            goal: table.goal,
            q,
            v,
            mu,
            sweeps: 0,
            residual: f64::NAN,
            converged: false,
        };
        Ok(LofQLearner {
            fsa: table,
            options,
            env,
            cfg: cfg.clone(),
            mode,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            free,
            policy,
            episodes_done: 0,
            decisions: 0,
        })
    }

    pub fn run_episode(&mut self) {
        let events = match self.mode {
            EventMode::Fixed(m) => m,
            EventMode::PerDecision => self.env.sample_events(&mut self.rng).mask,
        };
        let mut s = match self.cfg.start {
            Some(s) => s,
            None => self.free[self.rng.gen_range(0..self.free.len())],
        };
        let mut f = self.fsa.initial;
        let p = &mut self.policy;
        let (n_cells, n_opt) = (p.n_cells, p.n_options);
        for _ in 0..self.cfg.max_decisions {
            if f == p.goal {
                break;
            }
            let i = f * n_cells + s;
            let row = &p.q[i * n_opt..(i + 1) * n_opt];
            let available: Vec<usize> =
                (0..n_opt).filter(|&o| row[o] > f64::NEG_INFINITY).collect();
            if available.is_empty() {
                break;
            }
            let o = if self.rng.gen::<f64>() < self.cfg.epsilon {
                available[self.rng.gen_range(0..available.len())]
            } else {
                p.mu[i].expect("available options imply a choice")
            };
            let opt = &self.options.options[o];
            let s2 = opt.goal_cell;
            let f2 = self.fsa.next(f, Some(o), events);
            let target = self.fsa.reward[f] * opt.model.reward[s]
                + opt.model.discount[s] * p.v[f2 * n_cells + s2];
            let qi = i * n_opt + o;
            p.q[qi] += self.cfg.alpha * (target - p.q[qi]);
            let row = &p.q[i * n_opt..(i + 1) * n_opt];
            let arg = crate::options::argmax(row);
            p.v[i] = row[arg];
            p.mu[i] = Some(arg);
            self.decisions += 1;
            s = s2;
            f = f2;
        }
        self.episodes_done += 1;
        p.sweeps = self.episodes_done;
    }
}

/// Run option-level Q-learning for `cfg.episodes` episodes.
pub fn lof_q_learning(
    fsa: &Fsa,
    options: &OptionSet,
    env: &EnvironmentMdp,
    mode: EventMode,
    cfg: &LofQlConfig,
) -> Result<MetaPolicy, PlanError> {
    let mut learner = LofQLearner::new(fsa, options, env, mode, cfg)?;
    for _ in 0..cfg.episodes {
        learner.run_episode();
    }
    Ok(learner.policy)
}
