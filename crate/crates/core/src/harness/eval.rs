use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{Fsa, FsaTable, Task};
use crate::gridworld::EnvironmentMdp;
use crate::planner::{hmdp_value_iteration, HmdpSolution};
use crate::runtime::{
    check_satisfaction, normalize_return, rollout, Controller, EpisodeReturn, RolloutSetup,
    TaskBounds, TerminalStatus, Trace,
};

use super::{derive_seed, EpisodeRow, HarnessError, Method, MetricsRow};

/// Result of one batch of evaluation rollouts.
#[derive(Debug, Clone)]
pub struct EvalPoint {
    pub mean_normalized: f64,
    pub std: f64,
    pub satisfaction_rate: f64,
    pub mean_raw: f64,
    pub episodes: Vec<(Trace, EpisodeReturn, bool)>,
}

impl EvalPoint {
    #[allow(clippy::too_many_arguments)]
    pub fn row(
        &self,
        experiment: &str,
        method: Method,
        task: Task,
        seed: usize,
        steps: u64,
        meta_steps: u64,
    ) -> MetricsRow {
        MetricsRow {
            experiment: experiment.to_string(),
            method,
            task,
            seed,
            steps,
            meta_steps,
            mean_normalized: self.mean_normalized,
            std: self.std,
            satisfaction_rate: self.satisfaction_rate,
            mean_raw: self.mean_raw,
        }
    }

    pub fn episode_rows(
        &self,
        experiment: &str,
        method: Method,
        task: Task,
        seed: usize,
        steps: u64,
    ) -> Vec<EpisodeRow> {
        self.episodes
            .iter()
            .map(|(t, ret, sat)| EpisodeRow {
                experiment: experiment.to_string(),
                method,
                task,
                seed,
                steps,
                episode_steps: t.steps(),
                raw: ret.raw,
                normalized: ret.normalized,
                satisfied: *sat,
            })
            .collect()
    }
}

/// Rollout batches for one task on one map, normalised against the optimal
/// flat return for the drawn events and start cell.
pub struct Evaluator<'a> {
    pub env: &'a EnvironmentMdp,
    pub fsa: &'a Fsa,
    pub table: FsaTable,
    optimal: Vec<HmdpSolution>,
    free: Vec<usize>,
    pub cap: usize,
    pub rollouts: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        env: &'a EnvironmentMdp,
        fsa: &'a Fsa,
        cap: usize,
        rollouts: usize,
    ) -> Result<Self, HarnessError> {
        let table = fsa
            .compile(&env.partition)
            .map_err(|e| HarnessError::job("compiling task automaton", e))?;
        let optimal = (0..env.n_event_masks() as u32)
            .map(|mask| hmdp_value_iteration(fsa, env, mask, 1e-9))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| HarnessError::job("computing return bounds", e))?;
        Ok(Evaluator {
            env,
            fsa,
            table,
            optimal,
            free: env.free_cells(),
            cap,
            rollouts,
        })
    }

    pub fn bounds(&self, mask: u32, start: usize) -> TaskBounds {
        let best = self.optimal[mask as usize].value(self.fsa.initial, 0, start);
        TaskBounds::new(best, self.env, self.cap)
    }

    /// Rollout `r` of a batch seeded with `seed`: events and start cell.
    /// Batches with the same seed see the same draws whatever the policy.
    pub fn draw(&self, seed: u64, r: usize) -> (u32, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[r as u64]));
        let events = self.env.sample_events(&mut rng).mask;
        let start = self
            .env
            .start_cell()
            .unwrap_or_else(|| self.free[rng.gen_range(0..self.free.len())]);
        (events, start)
    }

    pub fn evaluate<'c, P>(&self, seed: u64, pick: P) -> Result<EvalPoint, HarnessError>
    where
        P: Fn(u32) -> Controller<'c>,
    {
        let setup = RolloutSetup {
            fsa: &self.table,
            safety: None,
            env: self.env,
        };
        let mut episodes = Vec::with_capacity(self.rollouts);
        for r in 0..self.rollouts {
            let (mask, start) = self.draw(seed, r);
            let events = crate::gridworld::EventAssignment::fixed(mask);
            let trace = rollout(
                pick(mask),
                setup,
                events,
                start,
                derive_seed(seed, &[r as u64, 1]),
                self.cap,
            );
            let sat = check_satisfaction(&trace, self.fsa, self.env)
                .map_err(|e| HarnessError::job("replay", e))?;
            // A stuck agent idles until the cap, like one that never finishes.
            let idle = match trace.status {
                TerminalStatus::Stuck => {
                    (self.cap - trace.records.len()) as f64
                        * self.table.reward[trace.final_f]
                        * self.env.step_reward
                }
                _ => 0.0,
            };
            let ret = normalize_return(trace.raw_return + idle, self.bounds(mask, start))
                .map_err(|e| HarnessError::job("normalising", e))?;
            episodes.push((trace, ret, sat));
        }
        let n = episodes.len() as f64;
        let mean_normalized = episodes.iter().map(|e| e.1.normalized).sum::<f64>() / n;
        let var = episodes
            .iter()
            .map(|e| (e.1.normalized - mean_normalized).powi(2))
            .sum::<f64>()
            / n;
        Ok(EvalPoint {
            mean_normalized,
            std: var.sqrt(),
            satisfaction_rate: episodes.iter().filter(|e| e.2).count() as f64 / n,
            mean_raw: episodes.iter().map(|e| e.1.raw).sum::<f64>() / n,
            episodes,
        })
    }
}
