use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::AutomatonError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropKind {
    Subgoal,
    Safety,
    Event,
}

/// Subgoal, safety and event propositions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropositionPartition {
    pub subgoals: Vec<String>,
    pub safety: Vec<String>,
    pub events: Vec<String>,
}

/// One legal liveness-alphabet symbol: at most one subgoal plus a full event
/// assignment (bit `i` of `events` is `partition.events[i]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub subgoal: Option<usize>,
    pub events: u32,
}

impl PropositionPartition {
    pub fn new(
        subgoals: Vec<String>,
        safety: Vec<String>,
        events: Vec<String>,
    ) -> Result<Self, AutomatonError> {
        let p = PropositionPartition {
            subgoals,
            safety,
            events,
        };
        p.check()?;
        Ok(p)
    }

    /// `{a, b, c, h}`, `{e, o}`, `{can}`.
    pub fn delivery() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        PropositionPartition {
            subgoals: s(&["a", "b", "c", "h"]),
            safety: s(&["e", "o"]),
            events: s(&["can"]),
        }
    }

    pub fn check(&self) -> Result<(), AutomatonError> {
        if self.events.len() > 16 {
            return Err(AutomatonError::Partition(
                "at most 16 event propositions".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for name in self.subgoals.iter().chain(&self.safety).chain(&self.events) {
            if name.is_empty() {
                return Err(AutomatonError::Partition("empty proposition name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(AutomatonError::Partition(format!(
                    "proposition {name:?} appears more than once"
                )));
            }
        }
        Ok(())
    }

    pub fn kind_of(&self, name: &str) -> Option<PropKind> {
        if self.subgoals.iter().any(|p| p == name) {
            Some(PropKind::Subgoal)
        } else if self.safety.iter().any(|p| p == name) {
            Some(PropKind::Safety)
        } else if self.events.iter().any(|p| p == name) {
            Some(PropKind::Event)
        } else {
            None
        }
    }

    pub fn subgoal_index(&self, name: &str) -> Option<usize> {
        self.subgoals.iter().position(|p| p == name)
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|p| p == name)
    }

    pub fn all(&self) -> Vec<String> {
        self.subgoals
            .iter()
            .chain(&self.safety)
            .chain(&self.events)
            .cloned()
            .collect()
    }

    pub fn n_event_masks(&self) -> usize {
        1 << self.events.len()
    }

    /// `(|P_G| + 1) * 2^|P_E|`
    pub fn n_letters(&self) -> usize {
        (self.subgoals.len() + 1) * self.n_event_masks()
    }

    pub fn letter_index(&self, letter: Letter) -> usize {
        letter.subgoal.map_or(0, |i| i + 1) * self.n_event_masks() + letter.events as usize
    }

    pub fn letters(&self) -> Vec<Letter> {
        let masks = self.n_event_masks() as u32;
        std::iter::once(None)
            .chain((0..self.subgoals.len()).map(Some))
            .flat_map(|subgoal| (0..masks).map(move |events| Letter { subgoal, events }))
            .collect()
    }

    /// Truth of `name` under `letter`; safety propositions are false.
    pub fn holds(&self, letter: Letter, name: &str) -> bool {
        if let Some(i) = self.subgoal_index(name) {
            return letter.subgoal == Some(i);
        }
        if let Some(i) = self.event_index(name) {
            return letter.events & (1 << i) != 0;
        }
        false
    }

    /// Variables of the liveness alphabet in bit order: subgoals, then events.
    pub fn liveness_vars(&self) -> Vec<String> {
        self.subgoals.iter().chain(&self.events).cloned().collect()
    }

    /// Bit pattern of `letter` over [`Self::liveness_vars`].
    pub fn letter_bits(&self, letter: Letter) -> u32 {
        let sub = letter.subgoal.map_or(0, |i| 1u32 << i);
        sub | (letter.events << self.subgoals.len())
    }

    /// Bit patterns with two or more subgoals set.
    pub fn illegal_bits(&self) -> Vec<u32> {
        let n = self.subgoals.len();
        let masks = self.n_event_masks() as u32;
        (0u32..(1 << n))
            .filter(|s| s.count_ones() >= 2)
            .flat_map(|s| (0..masks).map(move |e| s | (e << n)))
            .collect()
    }
}
