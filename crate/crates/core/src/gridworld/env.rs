use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::automata::PropositionPartition;

use super::map::{load_map, Cell, GridMap};
use super::GridError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Stay,
}

pub const N_ACTIONS: usize = 5;

impl Action {
    pub const ALL: [Action; N_ACTIONS] = [
        Action::Up,
        Action::Down,
        Action::Left,
        Action::Right,
        Action::Stay,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Action {
        Action::ALL[i]
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            Action::Stay => (0, 0),
        }
    }
}

/// Labels of one cell: at most one subgoal and a safety bitmask over
/// `partition.safety`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Label {
    pub subgoal: Option<usize>,
    pub safety: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventProvenance {
    EpisodicDraw,
    Fixed,
    PerDecision,
}

/// Truth values of the event propositions (bit `i` is `partition.events[i]`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventAssignment {
    pub mask: u32,
    pub provenance: EventProvenance,
}

impl EventAssignment {
    pub fn fixed(mask: u32) -> Self {
        EventAssignment {
            mask,
            provenance: EventProvenance::Fixed,
        }
    }

    /// Parse `can=1,other=0`; unnamed events are false.
    pub fn parse(partition: &PropositionPartition, text: &str) -> Result<Self, GridError> {
        let mut mask = 0;
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, v) = item
                .split_once('=')
                .ok_or_else(|| GridError::Events(format!("expected name=0|1, got {item:?}")))?;
            let i = partition
                .event_index(name.trim())
                .ok_or_else(|| GridError::Events(format!("unknown event {name:?}")))?;
            match v.trim() {
                "1" | "true" => mask |= 1 << i,
                "0" | "false" => {}
                other => return Err(GridError::Events(format!("bad value {other:?} for {name}"))),
            }
        }
        Ok(EventAssignment::fixed(mask))
    }

    pub fn holds(&self, i: usize) -> bool {
        self.mask & (1 << i) != 0
    }
}

/// Deterministic gridworld MDP with proposition labels and composed rewards.
#[derive(Debug, Clone)]
pub struct EnvironmentMdp {
    pub map: GridMap,
    pub partition: PropositionPartition,
    pub gamma: f64,
    pub step_reward: f64,
    /// Cost per safety proposition, aligned with `partition.safety`.
    pub safety_costs: Vec<f64>,
    /// Bernoulli probability per event, aligned with `partition.events`.
    pub event_probs: Vec<f64>,
    /// Probability that a uniformly random action replaces the chosen one.
    pub slip: f64,
    next: Vec<usize>,
    labels: Vec<Label>,
    reward: Vec<f64>,
}

pub const EMPTY_PROP: &str = "e";
pub const OBSTACLE_PROP: &str = "o";

impl EnvironmentMdp {
    pub fn new(map: GridMap) -> Result<Self, GridError> {
        let partition = PropositionPartition::new(
            map.subgoal_names(),
            vec![EMPTY_PROP.to_string(), OBSTACLE_PROP.to_string()],
            map.events.iter().map(|(n, _)| n.clone()).collect(),
        )
        .map_err(|e| GridError::Partition(e.to_string()))?;
        if !(map.step_reward.is_finite() && map.step_reward < 0.0) {
            return Err(GridError::Reward(format!(
                "step reward {} must be finite and negative",
                map.step_reward
            )));
        }
        let mut safety_costs = vec![0.0; partition.safety.len()];
        for (name, &c) in &map.costs {
            let i = partition
                .safety
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| {
                    GridError::Reward(format!("cost for unknown safety proposition {name:?}"))
                })?;
            if !(c.is_finite() && c <= 0.0) {
                return Err(GridError::Reward(format!(
                    "cost {c} of {name} must be finite and <= 0"
                )));
            }
            safety_costs[i] = c;
        }
        let event_probs = map.events.iter().map(|(_, p)| *p).collect();

        let n = map.n_cells();
        let e_bit = 1u32 << 0;
        let o_bit = 1u32 << 1;
        let labels: Vec<Label> = map
            .cells
            .iter()
            .map(|c| match c {
                Cell::Subgoal(i) => Label {
                    subgoal: Some(*i),
                    safety: e_bit,
                },
                Cell::Hazard => Label {
                    subgoal: None,
                    safety: o_bit,
                },
                _ => Label {
                    subgoal: None,
                    safety: e_bit,
                },
            })
            .collect();
        let mut next = vec![0; n * N_ACTIONS];
        for s in 0..n {
            let (x, y) = map.coords(s);
            for a in Action::ALL {
                let (dx, dy) = a.delta();
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                let inside =
                    nx >= 0 && ny >= 0 && (nx as usize) < map.width && (ny as usize) < map.height;
                let t = if inside {
                    map.cell_id(nx as usize, ny as usize)
                } else {
                    s
                };
                next[s * N_ACTIONS + a.index()] = if map.is_free(t) { t } else { s };
            }
        }
        let mut env = EnvironmentMdp {
            step_reward: map.step_reward,
            map,
            partition,
            gamma: 1.0,
            safety_costs,
            event_probs,
            slip: 0.0,
            next,
            labels,
            reward: Vec::new(),
        };
        env.reward = (0..n * N_ACTIONS)
            .map(|i| env.step_reward + env.safety_reward(env.next[i]))
            .collect();
        Ok(env)
    }

    pub fn from_text(text: &str) -> Result<Self, GridError> {
        EnvironmentMdp::new(load_map(text)?)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        assert!(gamma > 0.0 && gamma <= 1.0, "discount must lie in (0, 1]");
        self.gamma = gamma;
        self
    }

    pub fn n_states(&self) -> usize {
        self.map.n_cells()
    }

    pub fn n_subgoals(&self) -> usize {
        self.partition.subgoals.len()
    }

    #[inline]
    pub fn step(&self, s: usize, a: usize) -> usize {
        self.next[s * N_ACTIONS + a]
    }

    /// Like [`Self::step`] but honours the slip probability.
    pub fn sample_step<R: Rng>(&self, s: usize, a: usize, rng: &mut R) -> usize {
        if self.slip > 0.0 && rng.gen::<f64>() < self.slip {
            self.step(s, rng.gen_range(0..N_ACTIONS))
        } else {
            self.step(s, a)
        }
    }

    #[inline]
    pub fn label(&self, s: usize) -> Label {
        self.labels[s]
    }

    /// Label as proposition names: (subgoals, safety).
    pub fn label_names(&self, s: usize) -> (Vec<String>, Vec<String>) {
        let l = self.labels[s];
        let sub = l
            .subgoal
            .map(|i| self.partition.subgoals[i].clone())
            .into_iter()
            .collect();
        let safety = self
            .partition
            .safety
            .iter()
            .enumerate()
            .filter(|(i, _)| l.safety & (1 << i) != 0)
            .map(|(_, n)| n.clone())
            .collect();
        (sub, safety)
    }

    /// Step reward plus the safety costs of the cell entered by `(s, a)`.
    #[inline]
    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * N_ACTIONS + a]
    }

    /// Sum of the safety costs labelling `s`.
    pub fn safety_reward(&self, s: usize) -> f64 {
        let mask = self.labels[s].safety;
        self.safety_costs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn min_step_reward(&self) -> f64 {
        self.step_reward + self.safety_costs.iter().copied().fold(0.0, f64::min)
    }

    pub fn subgoal_cell(&self, subgoal: usize) -> usize {
        self.map.subgoals[subgoal].1
    }

    pub fn free_cells(&self) -> Vec<usize> {
        self.map.free_cells()
    }

    pub fn start_cell(&self) -> Option<usize> {
        self.map.start_cell()
    }

    pub fn sample_events<R: Rng>(&self, rng: &mut R) -> EventAssignment {
        let mut mask = 0;
        for (i, &p) in self.event_probs.iter().enumerate() {
            if rng.gen::<f64>() < p {
                mask |= 1 << i;
            }
        }
        EventAssignment {
            mask,
            provenance: EventProvenance::EpisodicDraw,
        }
    }

    /// Probability of drawing `mask`.
    pub fn event_prob(&self, mask: u32) -> f64 {
        self.event_probs
            .iter()
            .enumerate()
            .map(|(i, &p)| if mask & (1 << i) != 0 { p } else { 1.0 - p })
            .product()
    }

    pub fn n_event_masks(&self) -> usize {
        self.partition.n_event_masks()
    }
}
