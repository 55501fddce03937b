use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automata::{Fsa, FsaTable};
use crate::gridworld::{EnvironmentMdp, N_ACTIONS};
use crate::options::argmax;
use crate::planner::{EventMode, PlanError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QrmConfig {
    pub episodes: usize,
    pub max_steps: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Fixed start cell; random free cells when unset.
    #[serde(default)]
    pub start: Option<usize>,
}

impl Default for QrmConfig {
    fn default() -> Self {
        QrmConfig {
            episodes: 1600,
            max_steps: 100,
            alpha: 0.5,
            epsilon: 0.15,
            seed: 0,
            start: None,
        }
    }
}

/// One Q table over `(s, a)` per FSA state and event assignment; goal
/// tables stay zero. Events are fixed for an episode and observed, so they
/// belong to the machine state alongside `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct QrmModel {
    pub n_f: usize,
    pub n_masks: usize,
    pub n_cells: usize,
    pub goal: usize,
    pub q: Vec<f64>,
    /// Counterfactual updates applied so far.
    pub updates: u64,
}

impl QrmModel {
    #[inline]
    fn offset(&self, f: usize, events: u32, s: usize) -> usize {
        ((events as usize * self.n_f + f) * self.n_cells + s) * N_ACTIONS
    }

    pub fn row(&self, f: usize, events: u32, s: usize) -> &[f64] {
        let i = self.offset(f, events, s);
        &self.q[i..i + N_ACTIONS]
    }

    pub fn greedy_action(&self, f: usize, events: u32, s: usize) -> usize {
        argmax(self.row(f, events, s))
    }
}

pub struct QrmLearner<'a> {
    env: &'a EnvironmentMdp,
    fsa: FsaTable,
    pub cfg: QrmConfig,
    mode: EventMode,
    rng: ChaCha8Rng,
    free: Vec<usize>,
    pub model: QrmModel,
    pub episodes_done: usize,
    pub steps_taken: u64,
}

impl<'a> QrmLearner<'a> {
    pub fn new(
        env: &'a EnvironmentMdp,
        fsa: &Fsa,
        mode: EventMode,
        cfg: &QrmConfig,
    ) -> Result<Self, PlanError> {
        if !(cfg.alpha > 0.0 && cfg.alpha <= 1.0 && (0.0..=1.0).contains(&cfg.epsilon)) {
            return Err(PlanError::Config(format!("{cfg:?}")));
        }
        let table = fsa
            .compile(&env.partition)
            .map_err(|e| PlanError::Mismatch(e.to_string()))?;
        let n_f = table.n_states();
        let n_masks = env.n_event_masks();
        let n_cells = env.n_states();
        Ok(QrmLearner {
            env,
            cfg: cfg.clone(),
            mode,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            free: env.free_cells(),
            model: QrmModel {
                n_f,
                n_masks,
                n_cells,
                goal: table.goal,
                q: vec![0.0; n_masks * n_f * n_cells * N_ACTIONS],
                updates: 0,
            },
            fsa: table,
            episodes_done: 0,
            steps_taken: 0,
        })
    }

    /// Run one episode; returns the environment steps taken.
    pub fn run_episode(&mut self) -> usize {
        let env = self.env;
        let events = match self.mode {
            EventMode::Fixed(m) => m,
            EventMode::PerDecision => env.sample_events(&mut self.rng).mask,
        };
        let mut s = match self.cfg.start {
            Some(s) => s,
            None => self.free[self.rng.gen_range(0..self.free.len())],
        };
        let mut f = self.fsa.initial;
        let m = &mut self.model;
        let mut taken = 0;
        while taken < self.cfg.max_steps && f != m.goal {
            let a = if self.rng.gen::<f64>() < self.cfg.epsilon {
                self.rng.gen_range(0..N_ACTIONS)
            } else {
                m.greedy_action(f, events, s)
            };
            let s2 = env.sample_step(s, a, &mut self.rng);
            let label = env.label(s2);
            let r = env.reward(s, a);
            // counterfactual update of every non-goal machine state; events
            // do not affect the environment, so every assignment is updated
            for mask in 0..m.n_masks as u32 {
                for u in (0..m.n_f).filter(|&u| u != m.goal) {
                    let u2 = self.fsa.next(u, label.subgoal, mask);
                    let ru = self.fsa.reward[u] * r;
                    let target = if u2 == m.goal {
                        ru
                    } else {
                        let best = m
                            .row(u2, mask, s2)
                            .iter()
                            .copied()
                            .fold(f64::NEG_INFINITY, f64::max);
                        ru + env.gamma * best
                    };
                    let i = m.offset(u, mask, s) + a;
                    m.q[i] += self.cfg.alpha * (target - m.q[i]);
                    m.updates += 1;
                }
            }
            f = self.fsa.next(f, label.subgoal, events);
            s = s2;
            taken += 1;
        }
        self.episodes_done += 1;
        self.steps_taken += taken as u64;
        taken
    }
}

/// Tabular QRM for `cfg.episodes` episodes.
pub fn train_qrm(
    env: &EnvironmentMdp,
    fsa: &Fsa,
    mode: EventMode,
    cfg: &QrmConfig,
) -> Result<QrmModel, PlanError> {
    let mut learner = QrmLearner::new(env, fsa, mode, cfg)?;
    for _ in 0..cfg.episodes {
        learner.run_episode();
    }
    Ok(learner.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::Action;

    fn eventually_a() -> Fsa {
        Fsa::new(&["init", "goal"], "init", "goal")
            .unwrap()
            .with_edge("init", "a", "goal")
            .unwrap()
    }

    #[test]
    fn row_converges_to_shortest_path() {
        let env = EnvironmentMdp::from_text("..a").unwrap();
        let cfg = QrmConfig {
            episodes: 300,
            max_steps: 20,
            seed: 1,
            ..Default::default()
        };
        let m = train_qrm(&env, &eventually_a(), EventMode::Fixed(0), &cfg).unwrap();
        assert_eq!(m.greedy_action(0, 0, 0), Action::Right.index());
        assert_eq!(m.greedy_action(0, 0, 1), Action::Right.index());
        assert!((m.row(0, 0, 0)[Action::Right.index()] + 2.0).abs() < 1e-6);
        assert!(m.row(1, 0, 0).iter().all(|&q| q == 0.0));
    }

    #[test]
    fn every_non_goal_table_updates_each_step() {
        let env = EnvironmentMdp::from_text("a...b\n.....").unwrap();
        let fsa = Fsa::new(&["init", "s1", "goal"], "init", "goal")
            .unwrap()
            .with_edge("init", "a", "s1")
            .unwrap()
            .with_edge("s1", "b", "goal")
            .unwrap();
        let cfg = QrmConfig {
            episodes: 5,
            max_steps: 10,
            ..Default::default()
        };
        let mut l = QrmLearner::new(&env, &fsa, EventMode::Fixed(0), &cfg).unwrap();
        for _ in 0..5 {
            l.run_episode();
        }
        assert_eq!(l.model.updates, l.steps_taken * 2);
    }

    #[test]
    fn event_tables_are_separate() {
        // with can the task is done at a; without it, b must follow
        let env = EnvironmentMdp::from_text("events: can=0.5\nb...a").unwrap();
        let fsa = Fsa::new(&["init", "s1", "goal"], "init", "goal")
            .unwrap()
            .with_edge("init", "a & can", "goal")
            .unwrap()
            .with_edge("init", "a & !can", "s1")
            .unwrap()
            .with_edge("s1", "b", "goal")
            .unwrap();
        let cfg = QrmConfig {
            episodes: 400,
            max_steps: 30,
            seed: 2,
            start: Some(2),
            ..Default::default()
        };
        let mut l = QrmLearner::new(&env, &fsa, EventMode::PerDecision, &cfg).unwrap();
        l.run_episode();
        assert_eq!(l.model.updates, l.steps_taken * 4);
        for _ in 1..cfg.episodes {
            l.run_episode();
        }
        let m = &l.model;
        // both go right to a first
        assert_eq!(m.greedy_action(0, 0, 2), Action::Right.index());
        assert_eq!(m.greedy_action(0, 1, 2), Action::Right.index());
        assert!((m.row(0, 1, 3)[Action::Right.index()] + 1.0).abs() < 1e-6);
        assert!((m.row(0, 0, 3)[Action::Right.index()] + 5.0).abs() < 1e-6);
    }
}
