use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::fsa::{EdgeJson, FsaEdge};
use super::guard::Guard;
use super::partition::{PropKind, PropositionPartition};
use super::AutomatonError;

/// Cost `cost` charged in `state` whenever every proposition in `props` holds.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyCost {
    pub state: usize,
    pub props: BTreeSet<String>,
    pub cost: f64,
}

/// Safety automaton over safety and event propositions.
///
/// Every state is accepting. A step that matches no edge moves to an extra
/// violation sink and is charged `violation_cost`.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyAutomaton {
    pub states: Vec<String>,
    pub edges: Vec<FsaEdge>,
    pub costs: Vec<SafetyCost>,
    pub initial: Vec<usize>,
    pub violation_cost: f64,
}

impl SafetyAutomaton {
    /// One state with a self-loop on everything and cost `cost` on `prop`.
    pub fn trivial(prop: &str, cost: f64) -> Self {
        SafetyAutomaton {
            states: vec!["q0".into()],
            edges: vec![FsaEdge {
                from: 0,
                to: 0,
                guard: Guard::True,
            }],
            costs: vec![SafetyCost {
                state: 0,
                props: BTreeSet::from([prop.to_string()]),
                cost,
            }],
            initial: vec![0],
            violation_cost: cost,
        }
    }

    /// The default `o -> -1000` penalty automaton.
    pub fn default_obstacle() -> Self {
        SafetyAutomaton::trivial("o", -1000.0)
    }

    pub fn index(&self, name: &str) -> Result<usize, AutomatonError> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| AutomatonError::UnknownState(name.to_string()))
    }

    pub fn compile(&self, partition: &PropositionPartition) -> Result<SafetyTable, AutomatonError> {
        let n = self.states.len();
        if self.initial.is_empty() {
            return Err(AutomatonError::Safety("no initial state".into()));
        }
        if self.initial.iter().any(|&i| i >= n) {
            return Err(AutomatonError::Safety("initial state out of range".into()));
        }
        for e in &self.edges {
            if e.from >= n || e.to >= n {
                return Err(AutomatonError::Safety(
                    "edge references a missing state".into(),
                ));
            }
            for p in e.guard.propositions() {
                match partition.kind_of(&p) {
                    Some(PropKind::Safety) | Some(PropKind::Event) => {}
                    Some(PropKind::Subgoal) => {
                        return Err(AutomatonError::Safety(format!(
                            "guard uses subgoal {p:?}; liveness-dependent safety is not supported"
                        )))
                    }
                    None => {
                        return Err(AutomatonError::Safety(format!(
                            "undeclared proposition {p:?}"
                        )))
                    }
                }
            }
        }
        for c in &self.costs {
            if c.state >= n {
                return Err(AutomatonError::Safety(
                    "cost references a missing state".into(),
                ));
            }
            if !(c.cost.is_finite() && c.cost <= 0.0) {
                return Err(AutomatonError::Safety(format!(
                    "cost {} must be finite and <= 0",
                    c.cost
                )));
            }
            if let Some(p) = c
                .props
                .iter()
                .find(|p| partition.kind_of(p) != Some(PropKind::Safety))
            {
                return Err(AutomatonError::Safety(format!(
                    "{p:?} is not a safety proposition"
                )));
            }
        }
        if !(self.violation_cost.is_finite() && self.violation_cost <= 0.0) {
            return Err(AutomatonError::Safety(
                "violation cost must be finite and <= 0".into(),
            ));
        }

        let n_safety = partition.safety.len();
        let n_masks = 1usize << n_safety;
        let n_events = partition.n_event_masks();
        let sink = n;
        let total = n + 1;
        let mut next = vec![sink; total * n_masks * n_events];
        let mut violation = vec![false; total * n_masks * n_events];
        let mut cost = vec![0.0; total * n_masks];
        let mut uses_events = false;
        for e in &self.edges {
            if e.guard
                .propositions()
                .iter()
                .any(|p| partition.kind_of(p) == Some(PropKind::Event))
            {
                uses_events = true;
            }
        }
        for f in 0..total {
            for m in 0..n_masks {
                if f < n {
                    cost[f * n_masks + m] = self
                        .costs
                        .iter()
                        .filter(|c| c.state == f)
                        .filter(|c| {
                            c.props.iter().all(|p| {
                                let i = partition.safety.iter().position(|s| s == p).unwrap();
                                m & (1 << i) != 0
                            })
                        })
                        .map(|c| c.cost)
                        .sum();
                }
                for ev in 0..n_events {
                    let slot = (f * n_masks + m) * n_events + ev;
                    if f == sink {
                        next[slot] = sink;
                        continue;
                    }
                    let holds = |p: &str| {
                        if let Some(i) = partition.safety.iter().position(|s| s == p) {
                            m & (1 << i) != 0
                        } else if let Some(i) = partition.event_index(p) {
                            ev & (1 << i) != 0
                        } else {
                            false
                        }
                    };
                    let mut target = None;
                    for e in self.edges.iter().filter(|e| e.from == f) {
                        if e.guard.eval(&holds) {
                            match target {
                                Some(t) if t != e.to => {
                                    return Err(AutomatonError::Nondeterministic {
                                        state: self.states[f].clone(),
                                        detail: format!("safety mask {m:#b}, events {ev:#b}"),
                                    })
                                }
                                _ => target = Some(e.to),
                            }
                        }
                    }
                    match target {
                        Some(t) => next[slot] = t,
                        None => violation[slot] = true,
                    }
                }
            }
        }
        Ok(SafetyTable {
            n_states: total,
            n_safety_masks: n_masks,
            n_event_masks: n_events,
            next,
            violation,
            cost,
            violation_cost: self.violation_cost,
            initial: self.initial[0],
            sink,
            uses_events,
        })
    }

    pub fn to_json(&self) -> SafetyJson {
        SafetyJson {
            states: self.states.clone(),
            initial: self
                .initial
                .iter()
                .map(|&i| self.states[i].clone())
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    from: self.states[e.from].clone(),
                    to: self.states[e.to].clone(),
                    guard: e.guard.to_string(),
                })
                .collect(),
            costs: self
                .costs
                .iter()
                .map(|c| CostJson {
                    state: self.states[c.state].clone(),
                    props: c.props.iter().cloned().collect(),
                    cost: c.cost,
                })
                .collect(),
            violation_cost: self.violation_cost,
            liveness_dependent: false,
            reward: BTreeMap::new(),
        }
    }

    pub fn from_json(doc: &SafetyJson) -> Result<Self, AutomatonError> {
        if doc.liveness_dependent {
            return Err(AutomatonError::Safety(
                "liveness-dependent safety automata are not supported".into(),
            ));
        }
        let mut sa = SafetyAutomaton {
            states: doc.states.clone(),
            edges: Vec::new(),
            costs: Vec::new(),
            initial: Vec::new(),
            violation_cost: doc.violation_cost,
        };
        for name in &doc.initial {
            let i = sa.index(name)?;
            sa.initial.push(i);
        }
        for e in &doc.edges {
            sa.edges.push(FsaEdge {
                from: sa.index(&e.from)?,
                to: sa.index(&e.to)?,
                guard: Guard::parse(&e.guard)?,
            });
        }
        for c in &doc.costs {
            sa.costs.push(SafetyCost {
                state: sa.index(&c.state)?,
                props: c.props.iter().cloned().collect(),
                cost: c.cost,
            });
        }
        Ok(sa)
    }

    pub fn from_json_str(text: &str) -> Result<Self, AutomatonError> {
        let doc: SafetyJson =
            serde_json::from_str(text).map_err(|e| AutomatonError::Json(e.to_string()))?;
        SafetyAutomaton::from_json(&doc)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("safety automaton serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostJson {
    pub state: String,
    pub props: Vec<String>,
    pub cost: f64,
}

/// On-disk safety automaton: the FSA schema plus costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyJson {
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub edges: Vec<EdgeJson>,
    #[serde(default)]
    pub costs: Vec<CostJson>,
    #[serde(default = "default_violation_cost")]
    pub violation_cost: f64,
    #[serde(default)]
    pub liveness_dependent: bool,
    /// Accepted for schema compatibility with FSA files; unused.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reward: BTreeMap<String, f64>,
}

fn default_violation_cost() -> f64 {
    -1000.0
}

/// Safety automaton tabulated over (state, safety mask, event mask); the
/// last state is the violation sink.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyTable {
    pub n_states: usize,
    pub n_safety_masks: usize,
    pub n_event_masks: usize,
    next: Vec<usize>,
    violation: Vec<bool>,
    cost: Vec<f64>,
    pub violation_cost: f64,
    pub initial: usize,
    pub sink: usize,
    /// Whether any guard mentions an event proposition.
    pub uses_events: bool,
}

impl SafetyTable {
    /// Successor and safety reward for entering a cell with `safety` labels.
    #[inline]
    pub fn step(&self, fs: usize, safety: u32, events: u32) -> (usize, f64) {
        let slot =
            (fs * self.n_safety_masks + safety as usize) * self.n_event_masks + events as usize;
        let mut r = self.cost[fs * self.n_safety_masks + safety as usize];
        if self.violation[slot] {
            r += self.violation_cost;
        }
        (self.next[slot], r)
    }

    /// `R_S(f_s, labels)` alone.
    pub fn cost(&self, fs: usize, safety: u32) -> f64 {
        self.cost[fs * self.n_safety_masks + safety as usize]
    }

    /// Most negative reward a single step can incur.
    pub fn min_step_cost(&self) -> f64 {
        let worst_cost = self.cost.iter().copied().fold(0.0, f64::min);
        let any_violation = self.violation.iter().any(|&v| v);
        worst_cost
            + if any_violation {
                self.violation_cost
            } else {
                0.0
            }
    }
}
