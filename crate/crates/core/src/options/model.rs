use serde::{Deserialize, Serialize};

use crate::automata::SafetyTable;
use crate::gridworld::{EnvironmentMdp, N_ACTIONS};

use super::learn::OptionTrainConfig;
use super::OptionError;

/// Exact reward and transition model of an option policy on product states
/// `fs * n_cells + s`.
///
/// Dynamics are deterministic, so each start state has one terminal pair
/// `(terminal_fs, goal_cell)` reached after `duration` steps with discount
/// mass `discount = γ^duration`. States whose trajectory never reaches the
/// subgoal carry `reward = -inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionModel {
    pub n_fs: usize,
    pub n_cells: usize,
    pub policy: Vec<usize>,
    pub reward: Vec<f64>,
    pub terminal_fs: Vec<usize>,
    pub discount: Vec<f64>,
    pub duration: Vec<usize>,
}

impl OptionModel {
    #[inline]
    pub fn terminates(&self, x: usize) -> bool {
        self.reward[x] > f64::NEG_INFINITY
    }
}

/// A learned option for one subgoal. Initiation set: every state;
/// termination: the subgoal cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalOption {
    pub name: String,
    pub subgoal: usize,
    pub goal_cell: usize,
    pub config: OptionTrainConfig,
    /// Environment steps spent learning the policy.
    pub training_steps: u64,
    pub model: OptionModel,
}

impl LogicalOption {
    pub fn beta(&self, s: usize) -> bool {
        s == self.goal_cell
    }

    pub fn action(&self, fs: usize, s: usize) -> usize {
        self.model.policy[fs * self.model.n_cells + s]
    }
}

/// Follow `policy` from every product state and record the exact models.
pub fn evaluate_option_models(
    env: &EnvironmentMdp,
    safety: Option<&SafetyTable>,
    policy: &[usize],
    subgoal: usize,
) -> Result<OptionModel, OptionError> {
    if env.slip > 0.0 {
        return Err(OptionError::Stochastic);
    }
    let n = env.n_states();
    let n_fs = safety.map_or(1, |t| t.n_states);
    let total = n * n_fs;
    if policy.len() != total || policy.iter().any(|&a| a >= N_ACTIONS) {
        return Err(OptionError::Config(format!(
            "policy has {} entries for {total} states",
            policy.len()
        )));
    }
    if safety.is_some_and(|t| t.uses_events) {
        return Err(OptionError::Config(
            "exact models need a safety automaton whose guards ignore events".into(),
        ));
    }
    let goal = env.subgoal_cell(subgoal);
    let mut model = OptionModel {
        n_fs,
        n_cells: n,
        policy: policy.to_vec(),
        reward: vec![f64::NEG_INFINITY; total],
        terminal_fs: vec![0; total],
        discount: vec![0.0; total],
        duration: vec![0; total],
    };
    for x0 in 0..total {
        let (mut fs, mut s) = (x0 / n, x0 % n);
        if !env.map.is_free(s) {
            continue;
        }
        let mut ret = 0.0;
        let mut disc = 1.0;
        let mut k = 0;
        // a deterministic chain that has not terminated after visiting
        // every product state once is cycling
        while s != goal && k <= total {
            let a = policy[fs * n + s];
            let s2 = env.step(s, a);
            let (fs2, r) = match safety {
                None => (0, env.reward(s, a)),
                Some(t) => {
                    let (f2, rs) = t.step(fs, env.label(s2).safety, 0);
                    (f2, env.step_reward + rs)
                }
            };
            ret += disc * r;
            disc *= env.gamma;
            k += 1;
            s = s2;
            fs = fs2;
        }
        if s == goal {
            model.reward[x0] = ret;
            model.terminal_fs[x0] = fs;
            model.discount[x0] = disc;
            model.duration[x0] = k;
        }
    }
    Ok(model)
}

/// Product states (as `(fs, cell)`) from which the option never terminates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub subgoal: String,
    pub failing: Vec<(usize, usize)>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failing.is_empty()
    }

    pub fn failing_cells(&self) -> Vec<usize> {
        let mut cells: Vec<usize> = self.failing.iter().map(|&(_, c)| c).collect();
        cells.sort_unstable();
        cells.dedup();
        cells
    }
}

/// Check that the option reaches its subgoal from every free cell.
///
/// With a safety automaton the violation sink is not checked; it is
/// only ever entered after a violation.
pub fn verify_option(env: &EnvironmentMdp, option: &LogicalOption) -> VerifyReport {
    let m = &option.model;
    let checked_fs = if m.n_fs > 1 { m.n_fs - 1 } else { 1 };
    let mut failing = Vec::new();
    for fs in 0..checked_fs {
        for s in env.free_cells() {
            if !m.terminates(fs * m.n_cells + s) {
                failing.push((fs, s));
            }
        }
    }
    VerifyReport {
        subgoal: option.name.clone(),
        failing,
    }
}

/// One option per subgoal, indexed like `partition.subgoals`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionSet {
    pub options: Vec<LogicalOption>,
    /// Whether the models are over safety-automaton product states.
    pub general: bool,
}

impl OptionSet {
    pub fn n_fs(&self) -> usize {
        self.options.first().map_or(1, |o| o.model.n_fs)
    }

    pub fn training_steps(&self) -> u64 {
        self.options.iter().map(|o| o.training_steps).sum()
    }

    pub fn to_bundle(&self, map_text: Option<&str>) -> OptionBundle {
        OptionBundle {
            kind: "options".into(),
            general: self.general,
            map: map_text.map(str::to_string),
            options: self
                .options
                .iter()
                .map(|o| OptionRecord {
                    subgoal: o.name.clone(),
                    goal_cell: o.goal_cell,
                    n_fs: o.model.n_fs,
                    n_cells: o.model.n_cells,
                    seed: o.config.seed,
                    config: o.config.clone(),
                    training_steps: o.training_steps,
                    policy: o.model.policy.clone(),
                    reward: o
                        .model
                        .reward
                        .iter()
                        .map(|&r| r.is_finite().then_some(r))
                        .collect(),
                    terminal_fs: o.model.terminal_fs.clone(),
                    discount: o.model.discount.clone(),
                    duration: o.model.duration.clone(),
                })
                .collect(),
        }
    }

    /// Rebuild from a bundle, checking it against `env`.
    pub fn from_bundle(bundle: &OptionBundle, env: &EnvironmentMdp) -> Result<Self, OptionError> {
        if bundle.kind != "options" {
            return Err(OptionError::Bundle(format!(
                "expected kind \"options\", got {:?}",
                bundle.kind
            )));
        }
        let mut options = Vec::new();
        for (i, name) in env.partition.subgoals.iter().enumerate() {
            let rec = bundle
                .options
                .iter()
                .find(|r| &r.subgoal == name)
                .ok_or_else(|| OptionError::Bundle(format!("no option for subgoal {name:?}")))?;
            let total = rec.n_fs * rec.n_cells;
            let lens = [
                rec.policy.len(),
                rec.reward.len(),
                rec.terminal_fs.len(),
                rec.discount.len(),
                rec.duration.len(),
            ];
            if rec.n_cells != env.n_states() || lens.iter().any(|&l| l != total) {
                return Err(OptionError::Bundle(format!(
                    "option {name:?} does not fit the map"
                )));
            }
            if rec.goal_cell != env.subgoal_cell(i) {
                return Err(OptionError::Bundle(format!(
                    "option {name:?} targets another cell"
                )));
            }
            options.push(LogicalOption {
                name: name.clone(),
                subgoal: i,
                goal_cell: rec.goal_cell,
                config: rec.config.clone(),
                training_steps: rec.training_steps,
                model: OptionModel {
                    n_fs: rec.n_fs,
                    n_cells: rec.n_cells,
                    policy: rec.policy.clone(),
                    reward: rec
                        .reward
                        .iter()
                        .map(|r| r.unwrap_or(f64::NEG_INFINITY))
                        .collect(),
                    terminal_fs: rec.terminal_fs.clone(),
                    discount: rec.discount.clone(),
                    duration: rec.duration.clone(),
                },
            });
        }
        Ok(OptionSet {
            options,
            general: bundle.general,
        })
    }
}

/// On-disk option bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionBundle {
    pub kind: String,
    #[serde(default)]
    pub general: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    pub options: Vec<OptionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionRecord {
    pub subgoal: String,
    pub goal_cell: usize,
    pub n_fs: usize,
    pub n_cells: usize,
    pub seed: u64,
    pub config: OptionTrainConfig,
    pub training_steps: u64,
    pub policy: Vec<usize>,
    /// `null` marks states that never reach the subgoal.
    pub reward: Vec<Option<f64>>,
    pub terminal_fs: Vec<usize>,
    pub discount: Vec<f64>,
    pub duration: Vec<usize>,
}
