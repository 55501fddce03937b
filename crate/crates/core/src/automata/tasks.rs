use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::fsa::Fsa;
use super::partition::PropositionPartition;

/// The four delivery tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Sequential,
    If,
    Or,
    Composite,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Sequential, Task::If, Task::Or, Task::Composite];

    pub fn name(self) -> &'static str {
        match self {
            Task::Sequential => "sequential",
            Task::If => "if",
            Task::Or => "or",
            Task::Composite => "composite",
        }
    }

    /// Full specification including the obstacle safety conjunct.
    pub fn formula(self) -> &'static str {
        match self {
            Task::Sequential => "F(a & F(b & F(c & F h))) & G !o",
            Task::If => "(F(c & F a) | (F a & F can)) & G !o",
            Task::Or => "F((a | b) & F c) & G !o",
            Task::Composite => "(F((a | b) & F(c & F h)) | (F((a | b) & F h) & F can)) & G !o",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown task {s:?} (expected sequential, if, or, composite)"))
    }
}

fn build(states: &[&str], edges: &[(&str, &str, &str)]) -> Fsa {
    let mut fsa = Fsa::new(states, "init", "goal").expect("hand-coded states");
    for (from, guard, to) in edges {
        fsa.add_edge(from, guard, to).expect("hand-coded edge");
    }
    fsa
}

/// FSAs of the four delivery tasks, written out edge by edge.
pub fn hand_coded_task_fsas() -> BTreeMap<Task, Fsa> {
    let sequential = build(
        &["init", "s1", "s2", "s3", "goal"],
        &[
            ("init", "a", "s1"),
            ("s1", "b", "s2"),
            ("s2", "c", "s3"),
            ("s3", "h", "goal"),
        ],
    );
    let if_task = build(
        &["init", "s1", "s2", "s3", "goal"],
        &[
            ("init", "a & !can", "s1"),
            ("init", "c | can & !a", "s3"),
            ("init", "a & can", "goal"),
            ("s1", "c & !can", "s2"),
            ("s1", "can", "goal"),
            ("s2", "a | can", "goal"),
            ("s3", "a", "goal"),
        ],
    );
    let or_task = build(
        &["init", "s1", "goal"],
        &[("init", "a | b", "s1"), ("s1", "c", "goal")],
    );
    let composite = build(
        &["init", "s1", "s2", "s3", "s4", "s5", "goal"],
        &[
            ("init", "(a | b) & !can", "s1"),
            ("init", "can & !a & !b", "s4"),
            ("init", "(a | b) & can", "s5"),
            ("s1", "h & !can", "s2"),
            ("s1", "c | can & !h", "s5"),
            ("s1", "h & can", "goal"),
            ("s2", "c & !can", "s3"),
            ("s2", "can", "goal"),
            ("s3", "h | can", "goal"),
            ("s4", "a | b", "s5"),
            ("s5", "h", "goal"),
        ],
    );
    BTreeMap::from([
        (Task::Sequential, sequential),
        (Task::If, if_task),
        (Task::Or, or_task),
        (Task::Composite, composite),
    ])
}

/// Check that two FSAs are the same machine up to state names.
///
/// Guards are compared through their behaviour on every legal letter, so
/// syntactically different but equivalent guards match. On success the
/// returned vector maps each state of `a` to its partner in `b`.
pub fn fsa_isomorphism(
    a: &Fsa,
    b: &Fsa,
    partition: &PropositionPartition,
) -> Result<Vec<usize>, String> {
    if a.n_states() != b.n_states() {
        return Err(format!("{} states versus {}", a.n_states(), b.n_states()));
    }
    let ta = a.compile(partition).map_err(|e| e.to_string())?;
    let tb = b.compile(partition).map_err(|e| e.to_string())?;
    let n = a.n_states();
    let mut map: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    map[a.initial] = Some(b.initial);
    used[b.initial] = true;
    let mut queue = VecDeque::from([a.initial]);
    while let Some(fa) = queue.pop_front() {
        let fb = map[fa].unwrap();
        if (fa == a.goal) != (fb == b.goal) {
            return Err(format!(
                "goal mismatch at {} / {}",
                a.states[fa], b.states[fb]
            ));
        }
        if a.reward[fa] != b.reward[fb] {
            return Err(format!(
                "reward mismatch at {} / {}",
                a.states[fa], b.states[fb]
            ));
        }
        for l in 0..ta.n_letters {
            let (na, nb) = (ta.next_by_index(fa, l), tb.next_by_index(fb, l));
            match map[na] {
                Some(m) if m == nb => {}
                Some(m) => {
                    return Err(format!(
                        "state {} goes to {} where {} goes to {} (expected {})",
                        a.states[fa], a.states[na], b.states[fb], b.states[nb], b.states[m]
                    ))
                }
                None => {
                    if used[nb] {
                        return Err(format!(
                            "state {} of the second automaton is reached twice",
                            b.states[nb]
                        ));
                    }
                    map[na] = Some(nb);
                    used[nb] = true;
                    queue.push_back(na);
                }
            }
        }
    }
    map.into_iter()
        .enumerate()
        .map(|(i, m)| m.ok_or_else(|| format!("state {} is unreachable", a.states[i])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::validate_fsa;

    #[test]
    fn state_counts() {
        let fsas = hand_coded_task_fsas();
        let counts: Vec<usize> = Task::ALL.iter().map(|t| fsas[t].n_states()).collect();
        assert_eq!(counts, vec![5, 5, 3, 7]);
    }

    #[test]
    fn shipped_fsas_validate() {
        let p = PropositionPartition::delivery();
        for (task, fsa) in hand_coded_task_fsas() {
            assert_eq!(validate_fsa(&fsa, &p), vec![], "{task}");
        }
    }

    #[test]
    fn exactly_one_successor_everywhere() {
        let p = PropositionPartition::delivery();
        for fsa in hand_coded_task_fsas().values() {
            for f in 0..fsa.n_states() {
                for l in p.letters() {
                    let holds = |x: &str| p.holds(l, x);
                    let fired: Vec<usize> = fsa
                        .edges
                        .iter()
                        .filter(|e| e.from == f && e.guard.eval(&holds))
                        .map(|e| e.to)
                        .collect();
                    assert!(fired.len() <= 1);
                }
            }
        }
    }

    #[test]
    fn isomorphism_detects_dropped_edge() {
        let p = PropositionPartition::delivery();
        let fsas = hand_coded_task_fsas();
        let composite = &fsas[&Task::Composite];
        assert!(fsa_isomorphism(composite, composite, &p).is_ok());
        let mut broken = composite.clone();
        broken.edges.remove(2);
        assert!(fsa_isomorphism(composite, &broken, &p).is_err());
    }

    #[test]
    fn task_names_parse() {
        for t in Task::ALL {
            assert_eq!(t.name().parse::<Task>().unwrap(), t);
        }
        assert!("nope".parse::<Task>().is_err());
    }
}
