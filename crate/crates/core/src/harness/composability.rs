use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automata::{hand_coded_task_fsas, Task};
use crate::gridworld::EnvironmentMdp;
use crate::options::OptionSet;
use crate::planner::{EventMode, LofQLearner, LviSolver, PlannerConfig};
use crate::runtime::Controller;

use super::eval::Evaluator;
use super::{derive_seed, ExperimentConfig, HarnessError, HarnessOutput, Method};

const EXPERIMENT: &str = "composability";

/// Per task and seed: how fast each meta-learner reached the planner's
/// converged return.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposabilitySummary {
    pub task: Task,
    pub seed: usize,
    /// Sweeps until every event assignment's sup-norm change fell below the
    /// tolerance, if that happened within the sweep budget.
    pub lvi_sweeps: Option<usize>,
    pub lvi_final_raw: f64,
    pub greedy_raw: f64,
    /// First episode whose evaluation return matched `lvi_final_raw`.
    pub ql_first_match: Option<usize>,
}

#[derive(Debug, Default)]
pub struct ComposabilityOutput {
    pub output: HarnessOutput,
    pub summaries: Vec<ComposabilitySummary>,
}

/// Retraining curves for a fixed set of options: LVI after each sweep,
/// option-level Q-learning after each episode, and Greedy, which never
/// retrains. All evaluations of a task and seed share rollout draws.
pub fn run_composability(
    cfg: &ExperimentConfig,
    env: &EnvironmentMdp,
    options: &OptionSet,
) -> Result<ComposabilityOutput, HarnessError> {
    cfg.validate()?;
    let fsas = hand_coded_task_fsas();
    let jobs: Vec<(Task, usize)> = cfg
        .tasks
        .iter()
        .flat_map(|&t| (0..cfg.seeds.count).map(move |s| (t, s)))
        .collect();
    let parts = jobs
        .par_iter()
        .map(|&(task, seed)| job(cfg, env, options, &fsas[&task], task, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = ComposabilityOutput::default();
    for (o, s) in parts {
        out.output.extend(o);
        out.summaries.push(s);
    }
    out.output.sort();
    out.summaries.sort_by_key(|s| (s.task, s.seed));
    Ok(out)
}

fn job(
    cfg: &ExperimentConfig,
    env: &EnvironmentMdp,
    options: &OptionSet,
    fsa: &crate::automata::Fsa,
    task: Task,
    seed: usize,
) -> Result<(HarnessOutput, ComposabilitySummary), HarnessError> {
    let ctx = |m: Method| format!("{m} on {task} (seed {seed})");
    let cc = &cfg.composability;
    let ev = Evaluator::new(env, fsa, cfg.step_cap, cfg.rollouts)?;
    let tag = Task::ALL.iter().position(|t| *t == task).unwrap() as u64;
    let run_seed = cfg.run_seed(seed);
    let eval_seed = derive_seed(run_seed, &[6, tag]);
    let masks = 0..env.n_event_masks() as u32;
    let mut out = HarnessOutput::default();

    let mut solvers = masks
        .clone()
        .map(|m| {
            let pc = PlannerConfig {
                max_sweeps: cc.max_sweeps,
                tolerance: cc.tolerance,
                mode: EventMode::Fixed(m),
            };
            LviSolver::new(fsa, None, options, env, &pc)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| HarnessError::job(ctx(Method::LofVi), e))?;
    let mut lvi_sweeps = None;
    let mut last = None;
    for k in 0..=cc.max_sweeps {
        let point = ev.evaluate(eval_seed, |m| Controller::Meta {
            policy: &solvers[m as usize].policy,
            options,
        })?;
        out.rows
            .push(point.row(EXPERIMENT, Method::LofVi, task, seed, k as u64, k as u64));
        if lvi_sweeps.is_none() && solvers.iter().all(|s| s.policy.converged) {
            lvi_sweeps = Some(k);
        }
        if k < cc.max_sweeps {
            for s in solvers.iter_mut().filter(|s| !s.policy.converged) {
                s.sweep();
            }
        }
        last = Some(point);
    }
    let last = last.expect("at least one evaluation");
    out.episodes.extend(last.episode_rows(
        EXPERIMENT,
        Method::LofVi,
        task,
        seed,
        cc.max_sweeps as u64,
    ));
    let lvi_final_raw = last.mean_raw;

    let greedy = ev.evaluate(eval_seed, |_| Controller::Greedy { options })?;
    for k in 0..=cc.max_sweeps {
        out.rows
            .push(greedy.row(EXPERIMENT, Method::Greedy, task, seed, k as u64, 0));
    }

    let mut learners = masks
        .map(|m| {
            let mut qcfg = cfg.lof_ql.clone();
            qcfg.seed = derive_seed(run_seed, &[7, tag, m as u64]);
            LofQLearner::new(fsa, options, env, EventMode::Fixed(m), &qcfg)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| HarnessError::job(ctx(Method::LofQl), e))?;
    let mut ql_first_match = None;
    for k in 0..=cc.ql_episodes {
        let point = ev.evaluate(eval_seed, |m| Controller::Meta {
            policy: &learners[m as usize].policy,
            options,
        })?;
        let decisions = learners.iter().map(|l| l.decisions).sum();
        out.rows
            .push(point.row(EXPERIMENT, Method::LofQl, task, seed, k as u64, decisions));
        if ql_first_match.is_none() && point.mean_raw >= lvi_final_raw - 1e-9 {
            ql_first_match = Some(k);
        }
        if k < cc.ql_episodes {
            learners.iter_mut().for_each(|l| l.run_episode());
        }
    }
    let summary = ComposabilitySummary {
        task,
        seed,
        lvi_sweeps,
        lvi_final_raw,
        greedy_raw: greedy.mean_raw,
        ql_first_match,
    };
    Ok((out, summary))
}
