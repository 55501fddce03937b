use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automata::SafetyTable;
use crate::gridworld::{EnvironmentMdp, N_ACTIONS};

use super::model::{evaluate_option_models, LogicalOption};
use super::OptionError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptionTrainConfig {
    pub episodes: usize,
    pub max_steps: usize,
    pub alpha: f64,
    pub epsilon: f64,
    /// When set, epsilon decays linearly to this value over the episodes.
    #[serde(default)]
    pub epsilon_final: Option<f64>,
    pub seed: u64,
    pub schedule: Schedule,
}

/// How the options of a set share environment experience.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// One learner per option, each with its own episodes.
    Independent,
    /// One stream; an episode ends when its behaviour option terminates.
    Shared,
    /// One stream; on reaching its subgoal the behaviour option hands over
    /// to the next one and the episode continues.
    Chained,
}

impl std::str::FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "independent" => Ok(Self::Independent),
            "shared" => Ok(Self::Shared),
            "chained" => Ok(Self::Chained),
            _ => Err(format!(
                "unknown schedule {s:?} (independent, shared, chained)"
            )),
        }
    }
}

impl Default for OptionTrainConfig {
    fn default() -> Self {
        OptionTrainConfig {
            episodes: 4000,
            max_steps: 15,
            alpha: 0.5,
            epsilon: 0.15,
            epsilon_final: None,
            seed: 0,
            schedule: Schedule::Chained,
        }
    }
}

impl OptionTrainConfig {
    pub fn check(&self) -> Result<(), OptionError> {
        let ok = self.alpha > 0.0
            && self.alpha <= 1.0
            && (0.0..=1.0).contains(&self.epsilon)
            && self.epsilon_final.is_none_or(|e| (0.0..=1.0).contains(&e))
            && self.episodes >= 1
            && self.max_steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(OptionError::Config(format!("{self:?}")))
        }
    }

    pub fn epsilon_at(&self, episode: usize) -> f64 {
        match self.epsilon_final {
            Some(end) if self.episodes > 1 => {
                let frac = (episode as f64 / (self.episodes - 1) as f64).min(1.0);
                self.epsilon + (end - self.epsilon) * frac
            }
            _ => self.epsilon,
        }
    }
}

/// Tabular action values with visit counts.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub n_states: usize,
    pub q: Vec<f64>,
    pub visits: Vec<u32>,
}

impl QTable {
    pub fn new(n_states: usize) -> Self {
        QTable {
            n_states,
            q: vec![0.0; n_states * N_ACTIONS],
            visits: vec![0; n_states * N_ACTIONS],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.q[x * N_ACTIONS + a]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.q[x * N_ACTIONS..(x + 1) * N_ACTIONS]
    }

    pub fn max(&self, x: usize) -> f64 {
        self.row(x)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action, lowest index on ties.
    pub fn argmax(&self, x: usize) -> usize {
        argmax(self.row(x))
    }
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Incremental epsilon-greedy Q-learning of one option.
///
/// Product states are `fs * n_cells + s`; without a safety automaton there
/// is a single `fs`.
pub struct OptionLearner<'a> {
    env: &'a EnvironmentMdp,
    safety: Option<&'a SafetyTable>,
    pub subgoal: usize,
    goal_cell: usize,
    starts: Vec<usize>,
    pub cfg: OptionTrainConfig,
    pub q: QTable,
    rng: ChaCha8Rng,
    pub episodes_done: usize,
    pub steps_taken: u64,
}

impl<'a> OptionLearner<'a> {
    pub fn new(
        env: &'a EnvironmentMdp,
        safety: Option<&'a SafetyTable>,
        subgoal: &str,
        cfg: &OptionTrainConfig,
    ) -> Result<Self, OptionError> {
        cfg.check()?;
        let index = env
            .partition
            .subgoal_index(subgoal)
            .ok_or_else(|| OptionError::UnknownSubgoal(subgoal.to_string()))?;
        if let Some(t) = safety {
            if t.n_event_masks != env.n_event_masks() {
                return Err(OptionError::Config(
                    "safety automaton built for another partition".into(),
                ));
            }
        }
        let goal_cell = env.subgoal_cell(index);
        let starts: Vec<usize> = env
            .free_cells()
            .into_iter()
            .filter(|&c| c != goal_cell)
            .collect();
        let n_fs = safety.map_or(1, |t| t.n_states);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index as u64);
        Ok(OptionLearner {
            env,
            safety,
            subgoal: index,
            goal_cell,
            starts,
            cfg: cfg.clone(),
            q: QTable::new(n_fs * env.n_states()),
            rng,
            episodes_done: 0,
            steps_taken: 0,
        })
    }

    pub fn finished(&self) -> bool {
        self.episodes_done >= self.cfg.episodes
    }

    /// Run one episode; returns the number of environment steps taken.
    pub fn run_episode(&mut self) -> usize {
        if self.starts.is_empty() {
            self.episodes_done += 1;
            return 0;
        }
        let env = self.env;
        let n = env.n_states();
        let eps = self.cfg.epsilon_at(self.episodes_done);
        let events = match self.safety {
            Some(t) if t.uses_events => env.sample_events(&mut self.rng).mask,
            _ => 0,
        };
        let mut s = self.starts[self.rng.gen_range(0..self.starts.len())];
        let mut fs = self.safety.map_or(0, |t| t.initial);
        let mut taken = 0;
        for _ in 0..self.cfg.max_steps {
            let x = fs * n + s;
            let a = if self.rng.gen::<f64>() < eps {
                self.rng.gen_range(0..N_ACTIONS)
            } else {
                self.q.argmax(x)
            };
            let s2 = env.sample_step(s, a, &mut self.rng);
            let (fs2, r) = match self.safety {
                None => (0, env.reward(s, a)),
                Some(t) => {
                    let (f2, rs) = t.step(fs, env.label(s2).safety, events);
                    (f2, env.step_reward + rs)
                }
            };
            let terminal = s2 == self.goal_cell;
            let x2 = fs2 * n + s2;
            let target = if terminal {
                r
            } else {
                r + env.gamma * self.q.max(x2)
            };
            let i = x * N_ACTIONS + a;
            self.q.q[i] += self.cfg.alpha * (target - self.q.q[i]);
            self.q.visits[i] = self.q.visits[i].saturating_add(1);
            taken += 1;
            s = s2;
            fs = fs2;
            if terminal {
                break;
            }
        }
        self.episodes_done += 1;
        self.steps_taken += taken as u64;
        taken
    }

    pub fn greedy_policy(&self) -> Vec<usize> {
        (0..self.q.n_states).map(|x| self.q.argmax(x)).collect()
    }

    /// Option built from the current greedy policy.
    pub fn current_option(&self) -> Result<LogicalOption, OptionError> {
        let model =
            evaluate_option_models(self.env, self.safety, &self.greedy_policy(), self.subgoal)?;
        Ok(LogicalOption {
            name: self.env.partition.subgoals[self.subgoal].clone(),
            subgoal: self.subgoal,
            goal_cell: self.goal_cell,
            config: self.cfg.clone(),
            training_steps: self.steps_taken,
            model,
        })
    }

    pub fn train(mut self) -> Result<(QTable, LogicalOption), OptionError> {
        while !self.finished() {
            self.run_episode();
        }
        let option = self.current_option()?;
        Ok((self.q, option))
    }
}

/// Learn the option for `subgoal` on the plain environment.
pub fn train_option(
    env: &EnvironmentMdp,
    subgoal: &str,
    cfg: &OptionTrainConfig,
) -> Result<(QTable, LogicalOption), OptionError> {
    OptionLearner::new(env, None, subgoal, cfg)?.train()
}

/// Learn the option for `subgoal` on the product with a safety automaton.
pub fn train_option_general(
    env: &EnvironmentMdp,
    safety: &SafetyTable,
    subgoal: &str,
    cfg: &OptionTrainConfig,
) -> Result<(QTable, LogicalOption), OptionError> {
    OptionLearner::new(env, Some(safety), subgoal, cfg)?.train()
}
