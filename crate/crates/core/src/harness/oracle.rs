use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automata::{fsa_isomorphism, hand_coded_task_fsas, Fsa, Task};
use crate::gridworld::EnvironmentMdp;
use crate::ltl::{parse_formula, split_spec, translate_cosafe_to_fsa, DEFAULT_STATE_CAP};
use crate::options::{train_all_options, verify_option, OptionSet};
use crate::planner::{hmdp_value_iteration, logical_value_iteration, PlannerConfig};

use super::{derive_seed, ExperimentConfig, HarnessError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&OracleCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    fn push(&mut self, name: String, passed: bool, detail: String) {
        self.checks.push(OracleCheck {
            name,
            passed,
            detail,
        });
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        let failed = self.failures().len();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

/// Train options with the configured settings and run [`oracle_checks`]
/// against the hand-coded task automata.
pub fn run_oracle_suite(
    cfg: &ExperimentConfig,
    env: &EnvironmentMdp,
) -> Result<OracleReport, HarnessError> {
    let mut ocfg = cfg.options.clone();
    ocfg.seed = derive_seed(cfg.run_seed(0), &[0]);
    let options =
        train_all_options(env, None, &ocfg).map_err(|e| HarnessError::job("option training", e))?;
    let tasks: BTreeMap<Task, Fsa> = hand_coded_task_fsas()
        .into_iter()
        .filter(|(t, _)| cfg.tasks.contains(t))
        .collect();
    Ok(oracle_checks(env, &options, &tasks))
}

/// Condition 1 for every option, equality of the option-level plan with the
/// flat optimum from the start cell for every task and event assignment,
/// and agreement of each automaton with the translation of its formula.
pub fn oracle_checks(
    env: &EnvironmentMdp,
    options: &OptionSet,
    tasks: &BTreeMap<Task, Fsa>,
) -> OracleReport {
    let mut report = OracleReport::default();
    for opt in &options.options {
        let v = verify_option(env, opt);
        let cells: Vec<String> = v
            .failing_cells()
            .into_iter()
            .map(|c| {
                let (x, y) = env.map.coords(c);
                format!("({x},{y})")
            })
            .collect();
        let detail = if cells.is_empty() {
            "reaches its subgoal from every free cell".to_string()
        } else {
            format!("does not reach its subgoal from {}", cells.join(" "))
        };
        report.push(
            format!("condition-1/{}", opt.name),
            cells.is_empty(),
            detail,
        );
    }

    let s0 = env
        .start_cell()
        .or_else(|| env.free_cells().first().copied());
    for (task, fsa) in tasks {
        for mask in 0..env.n_event_masks() as u32 {
            let name = format!("theorem-1/{task}/events{mask}");
            let Some(s0) = s0 else {
                report.push(name, false, "map has no free cell".into());
                continue;
            };
            let lvi = logical_value_iteration(fsa, options, env, &PlannerConfig::fixed(mask));
            let flat = hmdp_value_iteration(fsa, env, mask, 1e-9);
            match (lvi, flat) {
                (Ok(mp), Ok(h)) => {
                    let (a, b) = (mp.value(fsa.initial, 0, s0), h.value(fsa.initial, 0, s0));
                    let passed = a.is_finite() && (a - b).abs() <= 1e-9;
                    report.push(name, passed, format!("options {a} vs flat {b}"));
                }
                (Err(e), _) | (_, Err(e)) => report.push(name, false, e.to_string()),
            }
        }
    }

    for (task, fsa) in tasks {
        let name = format!("translation/{task}");
        let p = &env.partition;
        let result = parse_formula(task.formula())
            .and_then(|f| split_spec(&f, &p.safety))
            .and_then(|s| translate_cosafe_to_fsa(&s.liveness, p, DEFAULT_STATE_CAP))
            .map_err(|e| e.to_string())
            .and_then(|t| fsa_isomorphism(&t, fsa, p).map(|_| t.n_states()));
        match result {
            Ok(n) => report.push(
                name,
                true,
                format!("translation is isomorphic ({n} states)"),
            ),
            Err(e) => report.push(name, false, format!("{task}: {e}")),
        }
    }
    report
}
