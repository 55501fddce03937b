use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::guard::Guard;
use super::partition::{Letter, PropKind, PropositionPartition};
use super::AutomatonError;

#[derive(Debug, Clone, PartialEq)]
pub struct FsaEdge {
    pub from: usize,
    pub to: usize,
    pub guard: Guard,
}

/// Deterministic liveness automaton with a single initial and goal state.
///
/// Assignments that match no explicit edge leave the state unchanged, and
/// the goal state is absorbing.
#[derive(Debug, Clone, PartialEq)]
pub struct Fsa {
    pub states: Vec<String>,
    pub edges: Vec<FsaEdge>,
    pub reward: Vec<f64>,
    pub initial: usize,
    pub goal: usize,
}

impl Fsa {
    /// Automaton over `states` with no edges and unit rewards.
    pub fn new(states: &[&str], initial: &str, goal: &str) -> Result<Self, AutomatonError> {
        let states: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let find = |n: &str| {
            states
                .iter()
                .position(|s| s == n)
                .ok_or_else(|| AutomatonError::UnknownState(n.to_string()))
        };
        Ok(Fsa {
            initial: find(initial)?,
            goal: find(goal)?,
            reward: vec![1.0; states.len()],
            states,
            edges: Vec::new(),
        })
    }

    pub fn add_edge(&mut self, from: &str, guard: &str, to: &str) -> Result<(), AutomatonError> {
        let from = self.index(from)?;
        let to = self.index(to)?;
        self.edges.push(FsaEdge {
            from,
            to,
            guard: Guard::parse(guard)?,
        });
        Ok(())
    }

    pub fn with_edge(mut self, from: &str, guard: &str, to: &str) -> Result<Self, AutomatonError> {
        self.add_edge(from, guard, to)?;
        Ok(self)
    }

    pub fn index(&self, name: &str) -> Result<usize, AutomatonError> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| AutomatonError::UnknownState(name.to_string()))
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Successor of `f` under the valuation `holds`.
    pub fn step<A: Fn(&str) -> bool + ?Sized>(
        &self,
        f: usize,
        holds: &A,
    ) -> Result<usize, AutomatonError> {
        if f == self.goal {
            return Ok(f);
        }
        let mut target: Option<usize> = None;
        for e in self.edges.iter().filter(|e| e.from == f) {
            if e.guard.eval(holds) {
                match target {
                    Some(t) if t != e.to => {
                        return Err(AutomatonError::Nondeterministic {
                            state: self.states[f].clone(),
                            detail: format!(
                                "edges to {} and {} both fire",
                                self.states[t], self.states[e.to]
                            ),
                        })
                    }
                    _ => target = Some(e.to),
                }
            }
        }
        Ok(target.unwrap_or(f))
    }

    pub fn step_letter(
        &self,
        partition: &PropositionPartition,
        f: usize,
        letter: Letter,
    ) -> Result<usize, AutomatonError> {
        self.step(f, &|p: &str| partition.holds(letter, p))
    }

    /// Dense transition table over the legal letters of `partition`.
    pub fn compile(&self, partition: &PropositionPartition) -> Result<FsaTable, AutomatonError> {
        let letters = partition.letters();
        let mut next = Vec::with_capacity(self.n_states() * letters.len());
        for f in 0..self.n_states() {
            for &l in &letters {
                next.push(self.step_letter(partition, f, l)?);
            }
        }
        Ok(FsaTable {
            names: self.states.clone(),
            n_letters: letters.len(),
            n_event_masks: partition.n_event_masks(),
            next,
            reward: self.reward.clone(),
            initial: self.initial,
            goal: self.goal,
        })
    }

    pub fn to_json(&self) -> FsaJson {
        FsaJson {
            states: self.states.clone(),
            initial: self.states[self.initial].clone(),
            goal: self.states[self.goal].clone(),
            reward: self
                .states
                .iter()
                .cloned()
                .zip(self.reward.iter().copied())
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
        }
    }

    pub fn from_json(doc: &FsaJson) -> Result<Self, AutomatonError> {
        let names: Vec<&str> = doc.states.iter().map(String::as_str).collect();
        let mut fsa = Fsa::new(&names, &doc.initial, &doc.goal)?;
        for (name, r) in &doc.reward {
            let i = fsa.index(name)?;
            fsa.reward[i] = *r;
        }
        for e in &doc.edges {
            fsa.add_edge(&e.from, &e.guard, &e.to)?;
        }
        Ok(fsa)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("FSA serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, AutomatonError> {
        let doc: FsaJson =
            serde_json::from_str(text).map_err(|e| AutomatonError::Json(e.to_string()))?;
        Fsa::from_json(&doc)
    }
}

/// On-disk FSA document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsaJson {
    pub states: Vec<String>,
    pub initial: String,
    pub goal: String,
    #[serde(default)]
    pub reward: BTreeMap<String, f64>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    pub guard: String,
}

/// FSA transitions tabulated per legal letter.
#[derive(Debug, Clone, PartialEq)]
pub struct FsaTable {
    pub names: Vec<String>,
    pub n_letters: usize,
    pub n_event_masks: usize,
    next: Vec<usize>,
    pub reward: Vec<f64>,
    pub initial: usize,
    pub goal: usize,
}

impl FsaTable {
    pub fn n_states(&self) -> usize {
        self.names.len()
    }

    #[inline]
    pub fn next(&self, f: usize, subgoal: Option<usize>, events: u32) -> usize {
        let letter = subgoal.map_or(0, |i| i + 1) * self.n_event_masks + events as usize;
        self.next[f * self.n_letters + letter]
    }

    #[inline]
    pub fn next_by_index(&self, f: usize, letter: usize) -> usize {
        self.next[f * self.n_letters + letter]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FsaViolation {
    DuplicateState(String),
    EdgeOutOfRange(usize),
    RewardLength { expected: usize, found: usize },
    NonPositiveReward { state: String, reward: f64 },
    UndeclaredProposition { edge: usize, prop: String },
    SafetyPropositionInGuard { edge: usize, prop: String },
    Nondeterministic { state: String, letter: String },
    GoalUnreachable { state: String },
}

impl fmt::Display for FsaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FsaViolation::DuplicateState(s) => write!(f, "state {s:?} declared more than once"),
            FsaViolation::EdgeOutOfRange(i) => write!(f, "edge {i} references a missing state"),
            FsaViolation::RewardLength { expected, found } => {
                write!(f, "reward table has {found} entries for {expected} states")
            }
            FsaViolation::NonPositiveReward { state, reward } => {
                write!(f, "state {state:?} has non-positive reward {reward}")
            }
            FsaViolation::UndeclaredProposition { edge, prop } => {
                write!(f, "edge {edge} uses undeclared proposition {prop:?}")
            }
            FsaViolation::SafetyPropositionInGuard { edge, prop } => {
                write!(f, "edge {edge} uses safety proposition {prop:?}")
            }
            FsaViolation::Nondeterministic { state, letter } => {
                write!(f, "state {state:?} has several successors under {letter}")
            }
            FsaViolation::GoalUnreachable { state } => {
                write!(
                    f,
                    "goal is unreachable from state {state:?} using subgoals alone"
                )
            }
        }
    }
}

fn describe(partition: &PropositionPartition, l: Letter) -> String {
    let mut parts = vec![l
        .subgoal
        .map_or("no subgoal".to_string(), |i| partition.subgoals[i].clone())];
    for (i, e) in partition.events.iter().enumerate() {
        let v = l.events & (1 << i) != 0;
        parts.push(format!("{e}={}", v as u8));
    }
    format!("{{{}}}", parts.join(", "))
}

/// Structural checks; an empty list means the automaton is usable.
pub fn validate_fsa(fsa: &Fsa, partition: &PropositionPartition) -> Vec<FsaViolation> {
    let mut out = Vec::new();
    let n = fsa.n_states();
    for (i, s) in fsa.states.iter().enumerate() {
        if fsa.states[..i].contains(s) {
            out.push(FsaViolation::DuplicateState(s.clone()));
        }
    }
    if fsa.reward.len() != n {
        out.push(FsaViolation::RewardLength {
            expected: n,
            found: fsa.reward.len(),
        });
    }
    for (i, r) in fsa.reward.iter().enumerate().take(n) {
        if !(r.is_finite() && *r > 0.0) {
            out.push(FsaViolation::NonPositiveReward {
                state: fsa.states[i].clone(),
                reward: *r,
            });
        }
    }
    let mut edges_ok = true;
    for (i, e) in fsa.edges.iter().enumerate() {
        if e.from >= n || e.to >= n {
            out.push(FsaViolation::EdgeOutOfRange(i));
            edges_ok = false;
            continue;
        }
        for p in e.guard.propositions() {
            match partition.kind_of(&p) {
                None => out.push(FsaViolation::UndeclaredProposition { edge: i, prop: p }),
                Some(PropKind::Safety) => {
                    out.push(FsaViolation::SafetyPropositionInGuard { edge: i, prop: p })
                }
                _ => {}
            }
        }
    }
    if !edges_ok || fsa.initial >= n || fsa.goal >= n {
        return out;
    }

    let letters = partition.letters();
    for f in (0..n).filter(|&f| f != fsa.goal) {
        for &l in &letters {
            if fsa.step_letter(partition, f, l).is_err() {
                out.push(FsaViolation::Nondeterministic {
                    state: fsa.states[f].clone(),
                    letter: describe(partition, l),
                });
            }
        }
    }

    // backward search from the goal over event-free letters
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for f in 0..n {
        for l in letters.iter().filter(|l| l.events == 0) {
            if let Ok(t) = fsa.step_letter(partition, f, *l) {
                preds[t].push(f);
            }
        }
    }
    let mut reach = vec![false; n];
    reach[fsa.goal] = true;
    let mut queue = VecDeque::from([fsa.goal]);
    while let Some(t) = queue.pop_front() {
        for &p in &preds[t] {
            if !reach[p] {
                reach[p] = true;
                queue.push_back(p);
            }
        }
    }
    for (f, ok) in reach.into_iter().enumerate() {
        if !ok {
            out.push(FsaViolation::GoalUnreachable {
                state: fsa.states[f].clone(),
            });
        }
    }
    out
}
