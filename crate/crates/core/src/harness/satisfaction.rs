use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::automata::{hand_coded_task_fsas, Fsa, Task};
use crate::baselines::{FlatLearner, QrmLearner};
use crate::gridworld::EnvironmentMdp;
use crate::options::{
    LogicalOption, OptionError, OptionLearner, OptionSet, OptionTrainConfig, Schedule,
    SharedOptionLearner,
};
use crate::planner::{logical_value_iteration, EventMode, LofQLearner, MetaPolicy, PlannerConfig};
use crate::runtime::Controller;

use super::eval::{EvalPoint, Evaluator};
use super::{derive_seed, ExperimentConfig, HarnessError, HarnessOutput, Method};

const EXPERIMENT: &str = "satisfaction";

enum Job {
    Options { seed: usize },
    Qrm { task: Task, seed: usize },
}

/// Learning curves for every method, task and seed.
///
/// Option-based methods share one round-robin option-training run per
/// seed; their x-axis is option-training steps. At every evaluation the
/// meta-level is rebuilt from scratch on the current options (planning per
/// event assignment for the methods that see the automaton). QRM's x-axis is
/// its own environment steps.
pub fn run_satisfaction(
    cfg: &ExperimentConfig,
    env: &EnvironmentMdp,
) -> Result<HarnessOutput, HarnessError> {
    cfg.validate()?;
    let all = hand_coded_task_fsas();
    let fsas: BTreeMap<Task, &Fsa> = cfg.tasks.iter().map(|t| (*t, &all[t])).collect();
    let evaluators = fsas
        .iter()
        .map(|(t, f)| Ok((*t, Evaluator::new(env, f, cfg.step_cap, cfg.rollouts)?)))
        .collect::<Result<BTreeMap<_, _>, HarnessError>>()?;
    let mut jobs = Vec::new();
    for seed in 0..cfg.seeds.count {
        if cfg.methods.iter().any(|m| m.uses_options()) {
            jobs.push(Job::Options { seed });
        }
        if cfg.methods.contains(&Method::Qrm) {
            jobs.extend(cfg.tasks.iter().map(|&task| Job::Qrm { task, seed }));
        }
    }
    let parts = jobs
        .par_iter()
        .map(|job| match *job {
            Job::Options { seed } => options_job(cfg, env, &fsas, &evaluators, seed),
            Job::Qrm { task, seed } => {
                qrm_job(cfg, env, fsas[&task], &evaluators[&task], task, seed)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = HarnessOutput::default();
    for p in parts {
        out.extend(p);
    }
    out.sort();
    Ok(out)
}

fn task_tag(task: Task) -> u64 {
    Task::ALL.iter().position(|t| *t == task).unwrap() as u64
}

#[allow(clippy::too_many_arguments)]
fn record(
    out: &mut HarnessOutput,
    point: &EvalPoint,
    method: Method,
    task: Task,
    seed: usize,
    steps: u64,
    meta: u64,
    last: bool,
) {
    out.rows
        .push(point.row(EXPERIMENT, method, task, seed, steps, meta));
    if last {
        out.episodes
            .extend(point.episode_rows(EXPERIMENT, method, task, seed, steps));
        if let Some((trace, _, _)) = point.episodes.first() {
            out.traces
                .push((format!("{method}-{task}-seed{seed}"), trace.clone()));
        }
    }
}

fn options_job(
    cfg: &ExperimentConfig,
    env: &EnvironmentMdp,
    fsas: &BTreeMap<Task, &Fsa>,
    evaluators: &BTreeMap<Task, Evaluator<'_>>,
    seed: usize,
) -> Result<HarnessOutput, HarnessError> {
    let ctx = |what: &str| format!("{what} (seed {seed})");
    let run_seed = cfg.run_seed(seed);
    let mut ocfg = cfg.options.clone();
    ocfg.seed = derive_seed(run_seed, &[0]);
    let mut learner =
        OptionTrainer::new(env, &ocfg).map_err(|e| HarnessError::job(ctx("option training"), e))?;
    let mut out = HarnessOutput::default();
    let mut next_eval = 0u64;
    let mut evals = 0u64;
    loop {
        let total = learner.steps_taken();
        let done = learner.finished();
        if total >= next_eval || done {
            let options = learner
                .current_options()
                .map_err(|e| HarnessError::job(ctx("option models"), e))?;
            evaluate_options(
                cfg, env, fsas, evaluators, &options, seed, total, evals, done, &mut out,
            )?;
            if done && seed == 0 {
                let bundle = options.to_bundle(Some(&env.map.to_string()));
                out.artifacts
                    .push(("options-seed0".into(), serde_json::to_value(bundle)?));
            }
            evals += 1;
            next_eval = (total / cfg.eval_every + 1) * cfg.eval_every;
        }
        if done {
            break;
        }
        learner.run_round();
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn evaluate_options(
    cfg: &ExperimentConfig,
    env: &EnvironmentMdp,
    fsas: &BTreeMap<Task, &Fsa>,
    evaluators: &BTreeMap<Task, Evaluator<'_>>,
    options: &OptionSet,
    seed: usize,
    steps: u64,
    eval: u64,
    last: bool,
    out: &mut HarnessOutput,
) -> Result<(), HarnessError> {
    let run_seed = cfg.run_seed(seed);
    let masks = 0..env.n_event_masks() as u32;
    let flat = if cfg.methods.contains(&Method::Flat) {
        let mut fcfg = cfg.flat.clone();
        fcfg.seed = derive_seed(run_seed, &[3, eval]);
        let mut l = FlatLearner::new(env, options, &fcfg)
            .map_err(|e| HarnessError::job("flat options", e))?;
        for _ in 0..fcfg.episodes {
            l.run_episode();
        }
        Some(l.policy)
    } else {
        None
    };
    for (&task, fsa) in fsas {
        let ev = &evaluators[&task];
        let ctx = |m: Method| format!("{m} on {task} (seed {seed})");
        let eval_seed = derive_seed(run_seed, &[1, task_tag(task), eval]);
        for &method in &cfg.methods {
            let (point, meta) = match method {
                Method::LofVi => {
                    let pols = masks
                        .clone()
                        .map(|m| {
                            logical_value_iteration(fsa, options, env, &PlannerConfig::fixed(m))
                        })
                        .collect::<Result<Vec<MetaPolicy>, _>>()
                        .map_err(|e| HarnessError::job(ctx(method), e))?;
                    let meta = pols.iter().map(|p| p.sweeps as u64).sum();
                    if last && seed == 0 {
                        for (m, p) in pols.iter().enumerate() {
                            out.artifacts
                                .push((format!("lof-vi-{task}-events{m}-seed0"), p.to_json()));
                        }
                    }
                    let point = ev.evaluate(eval_seed, |m| Controller::Meta {
                        policy: &pols[m as usize],
                        options,
                    })?;
                    (point, meta)
                }
                Method::LofQl => {
                    let mut meta = 0;
                    let mut pols = Vec::new();
                    for m in masks.clone() {
                        let mut qcfg = cfg.lof_ql.clone();
                        qcfg.seed = derive_seed(run_seed, &[2, task_tag(task), m as u64, eval]);
                        let mut l = LofQLearner::new(fsa, options, env, EventMode::Fixed(m), &qcfg)
                            .map_err(|e| HarnessError::job(ctx(method), e))?;
                        for _ in 0..qcfg.episodes {
                            l.run_episode();
                        }
                        meta += l.decisions;
                        pols.push(l.policy);
                    }
                    let point = ev.evaluate(eval_seed, |m| Controller::Meta {
                        policy: &pols[m as usize],
                        options,
                    })?;
                    (point, meta)
                }
                Method::Greedy => (
                    ev.evaluate(eval_seed, |_| Controller::Greedy { options })?,
                    0,
                ),
                Method::Flat => {
                    let policy = flat.as_ref().expect("trained above");
                    (
                        ev.evaluate(eval_seed, |_| Controller::Flat { policy, options })?,
                        cfg.flat.episodes as u64,
                    )
                }
                Method::Qrm => continue,
            };
            record(out, &point, method, task, seed, steps, meta, last);
        }
    }
    Ok(())
}

fn qrm_job(
    cfg: &ExperimentConfig,
    env: &EnvironmentMdp,
    fsa: &Fsa,
    ev: &Evaluator<'_>,
    task: Task,
    seed: usize,
) -> Result<HarnessOutput, HarnessError> {
    let run_seed = cfg.run_seed(seed);
    let mut qcfg = cfg.qrm.clone();
    qcfg.seed = derive_seed(run_seed, &[4, task_tag(task)]);
    if qcfg.start.is_none() {
        qcfg.start = env.start_cell();
    }
    let mut l = QrmLearner::new(env, fsa, EventMode::PerDecision, &qcfg)
        .map_err(|e| HarnessError::job(format!("qrm on {task} (seed {seed})"), e))?;
    let mut out = HarnessOutput::default();
    let mut next_eval = 0u64;
    let mut evals = 0u64;
    loop {
        let done = l.episodes_done >= qcfg.episodes;
        if l.steps_taken >= next_eval || done {
            let eval_seed = derive_seed(run_seed, &[5, task_tag(task), evals]);
            let point = ev.evaluate(eval_seed, |_| Controller::Qrm { model: &l.model })?;
            record(
                &mut out,
                &point,
                Method::Qrm,
                task,
                seed,
                l.steps_taken,
                0,
                done,
            );
            evals += 1;
            next_eval = (l.steps_taken / cfg.eval_every + 1) * cfg.eval_every;
        }
        if done {
            break;
        }
        l.run_episode();
    }
    Ok(out)
}

/// Option training advanced in rounds so the harness can evaluate between them.
enum OptionTrainer<'a> {
    Independent(Vec<OptionLearner<'a>>),
    Shared(Box<SharedOptionLearner<'a>>),
}

impl<'a> OptionTrainer<'a> {
    fn new(env: &'a EnvironmentMdp, cfg: &OptionTrainConfig) -> Result<Self, OptionError> {
        if cfg.schedule != Schedule::Independent {
            return Ok(Self::Shared(Box::new(SharedOptionLearner::new(
                env, None, cfg,
            )?)));
        }
        let learners = env
            .partition
            .subgoals
            .iter()
            .map(|name| OptionLearner::new(env, None, name, cfg))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::Independent(learners))
    }

    fn steps_taken(&self) -> u64 {
        match self {
            Self::Independent(ls) => ls.iter().map(|l| l.steps_taken).sum(),
            Self::Shared(l) => l.steps_taken,
        }
    }

    fn finished(&self) -> bool {
        match self {
            Self::Independent(ls) => ls.iter().all(|l| l.finished()),
            Self::Shared(l) => l.finished(),
        }
    }

    /// One episode per unfinished learner, or one shared episode.
    fn run_round(&mut self) {
        match self {
            Self::Independent(ls) => {
                for l in ls.iter_mut().filter(|l| !l.finished()) {
                    l.run_episode();
                }
            }
            Self::Shared(l) => {
                l.run_episode();
            }
        }
    }

    fn current_options(&self) -> Result<OptionSet, OptionError> {
        match self {
            Self::Independent(ls) => Ok(OptionSet {
                options: ls
                    .iter()
                    .map(|l| l.current_option())
                    .collect::<Result<Vec<LogicalOption>, _>>()?,
                general: false,
            }),
            Self::Shared(l) => l.current_options(),
        }
    }
}
