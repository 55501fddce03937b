//! Executing hierarchical policies on the product of task automaton,
//! safety automaton and environment, with satisfaction checks and return
//! normalisation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{Fsa, FsaTable, SafetyTable};
use crate::baselines::{FlatOptionsPolicy, QrmModel};
use crate::gridworld::{EnvironmentMdp, EventAssignment};
use crate::options::OptionSet;
use crate::planner::{greedy_metapolicy, MetaPolicy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("replay disagrees with the trace at step {t}: {detail}")]
    ReplayMismatch { t: usize, detail: String },
    #[error("degenerate return bounds: min = max = {0}")]
    DegenerateBounds(f64),
    #[error("{0}")]
    Setup(String),
}

/// What picks actions during a rollout.
#[derive(Debug, Clone, Copy)]
pub enum Controller<'a> {
    /// Meta-policy over options (from LVI or option-level Q-learning).
    Meta {
        policy: &'a MetaPolicy,
        options: &'a OptionSet,
    },
    Greedy {
        options: &'a OptionSet,
    },
    Flat {
        policy: &'a FlatOptionsPolicy,
        options: &'a OptionSet,
    },
    Qrm {
        model: &'a QrmModel,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalStatus {
    GoalReached,
    StepCap,
    Stuck,
}

/// One primitive step: state before, action, reward and state after.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub f: usize,
    pub fs: usize,
    pub s: usize,
    pub a: usize,
    pub option: Option<usize>,
    pub reward: f64,
    pub s_next: usize,
    pub subgoal: Option<usize>,
    pub safety: u32,
    pub fs_next: usize,
    pub f_next: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub start: usize,
    pub events: u32,
    pub records: Vec<StepRecord>,
    pub status: TerminalStatus,
    pub raw_return: f64,
    pub final_f: usize,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.records.len()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// FSA states visited, without repeats of consecutive duplicates.
    pub fn fsa_path(&self, initial: usize) -> Vec<usize> {
        let mut path = vec![initial];
        for r in &self.records {
            if *path.last().unwrap() != r.f_next {
                path.push(r.f_next);
            }
        }
        path
    }
}

/// Rollout inputs shared across episodes.
#[derive(Debug, Clone, Copy)]
pub struct RolloutSetup<'a> {
    pub fsa: &'a FsaTable,
    pub safety: Option<&'a SafetyTable>,
    pub env: &'a EnvironmentMdp,
}

/// Run one episode from `start` with events frozen for the whole episode.
///
/// Options run until they reach their subgoal; the next option is chosen in
/// the state reached then. The FSA advances on the label of every entered
/// cell.
pub fn rollout(
    controller: Controller<'_>,
    setup: RolloutSetup<'_>,
    events: EventAssignment,
    start: usize,
    seed: u64,
    cap: usize,
) -> Trace {
    let RolloutSetup { fsa, safety, env } = setup;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = fsa.initial;
    let mut fs = safety.map_or(0, |t| t.initial);
    let mut s = start;
    let mut active: Option<usize> = None;
    let mut records = Vec::new();
    let mut raw = 0.0;
    let mut status = TerminalStatus::StepCap;
    loop {
        if f == fsa.goal {
            status = TerminalStatus::GoalReached;
            break;
        }
        if records.len() >= cap {
            break;
        }
        let a = match controller {
            Controller::Qrm { model } => model.greedy_action(f, events.mask, s),
            Controller::Meta { options, .. }
            | Controller::Greedy { options }
            | Controller::Flat { options, .. } => {
                if active.is_none() {
                    active = match controller {
                        Controller::Meta { policy, .. } => {
                            policy.choose(f, if policy.n_fs > 1 { fs } else { 0 }, s)
                        }
                        Controller::Greedy { options } => greedy_metapolicy(
                            fsa,
                            options,
                            f,
                            if options.general { fs } else { 0 },
                            s,
                            events.mask,
                        )
                        .ok(),
                        Controller::Flat { policy, .. } => policy.choose(s),
                        Controller::Qrm { .. } => unreachable!(),
                    };
                }
                match active {
                    Some(o) => {
                        let opt = &options.options[o];
                        opt.action(if opt.model.n_fs > 1 { fs } else { 0 }, s)
                    }
                    None => {
                        status = TerminalStatus::Stuck;
                        break;
                    }
                }
            }
        };
        let s2 = env.sample_step(s, a, &mut rng);
        let label = env.label(s2);
        let (fs2, r) = match safety {
            None => (0, env.reward(s, a)),
            Some(t) => {
                let (f2, rs) = t.step(fs, label.safety, events.mask);
                (f2, env.step_reward + rs)
            }
        };
        let f2 = fsa.next(f, label.subgoal, events.mask);
        let reward = fsa.reward[f] * r;
        raw += reward;
        records.push(StepRecord {
            t: records.len(),
            f,
            fs,
            s,
            a,
            option: active,
            reward,
            s_next: s2,
            subgoal: label.subgoal,
            safety: label.safety,
            fs_next: fs2,
            f_next: f2,
        });
        if let (
            Some(o),
            Controller::Meta { options, .. }
            | Controller::Greedy { options }
            | Controller::Flat { options, .. },
        ) = (active, controller)
        {
            if options.options[o].beta(s2) {
                active = None;
            }
        }
        s = s2;
        fs = fs2;
        f = f2;
    }
    Trace {
        start,
        events: events.mask,
        records,
        status,
        raw_return: raw,
        final_f: f,
    }
}

/// Whether the trace satisfies the task, after replaying its labels through
/// the automaton's guards and checking every recorded transition.
pub fn check_satisfaction(
    trace: &Trace,
    fsa: &Fsa,
    env: &EnvironmentMdp,
) -> Result<bool, RuntimeError> {
    let p = &env.partition;
    let mut f = fsa.initial;
    for r in &trace.records {
        if r.f != f {
            return Err(RuntimeError::ReplayMismatch {
                t: r.t,
                detail: format!(
                    "trace is in {} but replay is in {}",
                    fsa.states[r.f], fsa.states[f]
                ),
            });
        }
        let holds = |name: &str| {
            if let Some(i) = p.subgoal_index(name) {
                r.subgoal == Some(i)
            } else if let Some(i) = p.event_index(name) {
                trace.events & (1 << i) != 0
            } else {
                false
            }
        };
        f = fsa
            .step(f, &holds)
            .map_err(|e| RuntimeError::ReplayMismatch {
                t: r.t,
                detail: e.to_string(),
            })?;
        if f != r.f_next {
            return Err(RuntimeError::ReplayMismatch {
                t: r.t,
                detail: format!(
                    "trace moved to {} but replay to {}",
                    fsa.states[r.f_next], fsa.states[f]
                ),
            });
        }
    }
    let reached = f == fsa.goal;
    if reached != (trace.status == TerminalStatus::GoalReached) {
        return Err(RuntimeError::ReplayMismatch {
            t: trace.records.len(),
            detail: format!(
                "status {:?} but replay ends in {}",
                trace.status, fsa.states[f]
            ),
        });
    }
    Ok(reached)
}

/// Bracket used to normalise returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskBounds {
    pub min: f64,
    pub max: f64,
}

impl TaskBounds {
    /// `max` is the optimal return; `min` is a capped episode that pays
    /// only the step cost.
    pub fn new(optimal: f64, env: &EnvironmentMdp, cap: usize) -> Self {
        TaskBounds {
            min: cap as f64 * env.step_reward,
            max: optimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReturn {
    pub raw: f64,
    pub normalized: f64,
}

/// `(raw - min) / (max - min)` clipped to `[0, 1]`.
pub fn normalize_return(raw: f64, bounds: TaskBounds) -> Result<EpisodeReturn, RuntimeError> {
    let span = bounds.max - bounds.min;
    if span == 0.0 || !span.is_finite() {
        return Err(RuntimeError::DegenerateBounds(bounds.max));
    }
    Ok(EpisodeReturn {
        raw,
        normalized: ((raw - bounds.min) / span).clamp(0.0, 1.0),
    })
}
