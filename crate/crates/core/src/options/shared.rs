use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::SafetyTable;
use crate::gridworld::{EnvironmentMdp, N_ACTIONS};

use super::learn::{OptionTrainConfig, QTable, Schedule};
use super::model::{evaluate_option_models, LogicalOption};
use super::{OptionError, OptionSet};

/// Learns every option from one stream of experience.
///
/// Each episode follows one option's epsilon-greedy policy (round-robin over
/// subgoals) from a random free cell until the step limit, or until that
/// option's subgoal unless the schedule chains to the next option. Every
/// transition updates all options: their rewards agree and only the terminal
/// cell differs, so a step is valid experience for each of them.
pub struct SharedOptionLearner<'a> {
    env: &'a EnvironmentMdp,
    safety: Option<&'a SafetyTable>,
    goals: Vec<usize>,
    free: Vec<usize>,
    pub cfg: OptionTrainConfig,
    pub q: Vec<QTable>,
    rng: ChaCha8Rng,
    pub episodes_done: usize,
    pub steps_taken: u64,
    /// Steps taken while each option was the behaviour policy.
    pub steps_by_option: Vec<u64>,
}

impl<'a> SharedOptionLearner<'a> {
    pub fn new(
        env: &'a EnvironmentMdp,
        safety: Option<&'a SafetyTable>,
        cfg: &OptionTrainConfig,
    ) -> Result<Self, OptionError> {
        cfg.check()?;
        if let Some(t) = safety {
            if t.n_event_masks != env.n_event_masks() {
                return Err(OptionError::Config(
                    "safety automaton built for another partition".into(),
                ));
            }
        }
        let k = env.n_subgoals();
        let n_fs = safety.map_or(1, |t| t.n_states);
        Ok(SharedOptionLearner {
            env,
            safety,
            goals: (0..k).map(|i| env.subgoal_cell(i)).collect(),
            free: env.free_cells(),
            cfg: cfg.clone(),
            q: (0..k).map(|_| QTable::new(n_fs * env.n_states())).collect(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            episodes_done: 0,
            steps_taken: 0,
            steps_by_option: vec![0; k],
        })
    }

    pub fn finished(&self) -> bool {
        self.episodes_done >= self.cfg.episodes
    }

    /// Run one episode; returns the number of environment steps taken.
    pub fn run_episode(&mut self) -> usize {
        let k = self.goals.len();
        if k == 0 {
            self.episodes_done += 1;
            return 0;
        }
        let mut b = self.episodes_done % k;
        let starts: Vec<usize> = self
            .free
            .iter()
            .copied()
            .filter(|&c| c != self.goals[b])
            .collect();
        if starts.is_empty() {
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
        let mut s = starts[self.rng.gen_range(0..starts.len())];
        let mut fs = self.safety.map_or(0, |t| t.initial);
        let mut taken = 0;
        for _ in 0..self.cfg.max_steps {
            let x = fs * n + s;
            let a = if self.rng.gen::<f64>() < eps {
                self.rng.gen_range(0..N_ACTIONS)
            } else {
                self.q[b].argmax(x)
            };
            let s2 = env.sample_step(s, a, &mut self.rng);
            let (fs2, r) = match self.safety {
                None => (0, env.reward(s, a)),
                Some(t) => {
                    let (f2, rs) = t.step(fs, env.label(s2).safety, events);
                    (f2, env.step_reward + rs)
                }
            };
            let x2 = fs2 * n + s2;
            let i = x * N_ACTIONS + a;
            for (g, q) in self.q.iter_mut().enumerate() {
                // an option is never run from its own subgoal
                if s == self.goals[g] {
                    continue;
                }
                let target = if s2 == self.goals[g] {
                    r
                } else {
                    r + env.gamma * q.max(x2)
                };
                q.q[i] += self.cfg.alpha * (target - q.q[i]);
                q.visits[i] = q.visits[i].saturating_add(1);
            }
            taken += 1;
            self.steps_by_option[b] += 1;
            s = s2;
            fs = fs2;
            if s == self.goals[b] {
                if self.cfg.schedule != Schedule::Chained {
                    break;
                }
                b = (b + 1) % k;
            }
        }
        self.episodes_done += 1;
        self.steps_taken += taken as u64;
        taken
    }

    pub fn greedy_policy(&self, subgoal: usize) -> Vec<usize> {
        let q = &self.q[subgoal];
        (0..q.n_states).map(|x| q.argmax(x)).collect()
    }

    /// Options built from the current greedy policies. Each option is
    /// credited with the steps it drove, so the set's total is the stream
    /// length.
    pub fn current_options(&self) -> Result<OptionSet, OptionError> {
        let options = (0..self.goals.len())
            .map(|g| {
                let model =
                    evaluate_option_models(self.env, self.safety, &self.greedy_policy(g), g)?;
                Ok(LogicalOption {
                    name: self.env.partition.subgoals[g].clone(),
                    subgoal: g,
                    goal_cell: self.goals[g],
                    config: self.cfg.clone(),
                    training_steps: self.steps_by_option[g],
                    model,
                })
            })
            .collect::<Result<Vec<_>, OptionError>>()?;
        Ok(OptionSet {
            options,
            general: self.safety.is_some(),
        })
    }

    pub fn train(mut self) -> Result<OptionSet, OptionError> {
        while !self.finished() {
            self.run_episode();
        }
        self.current_options()
    }
}
