//! Oracles shared by the integration tests. Nothing here calls the planner,
//! the option model evaluation or the automaton isomorphism check under test.
#![allow(dead_code)]

pub mod semantics;

use std::collections::{BTreeMap, VecDeque};

use lof::automata::Fsa;
use lof::gridworld::{Cell, EnvironmentMdp, N_ACTIONS};
use lof::options::LogicalOption;

pub const DELIVERY: &str = include_str!("../../data/delivery.txt");
pub const GREEDY_OR: &str = include_str!("../../data/greedy_or.txt");

/// Deterministic shortest-path value iteration: every state starts at minus
/// infinity except goals at zero, and sweeps repeat until nothing changes.
/// States that cannot reach a goal stay at minus infinity.
pub fn max_reward_values<M>(n: usize, is_goal: impl Fn(usize) -> bool, moves: M) -> Vec<f64>
where
    M: Fn(usize) -> Vec<(f64, usize)>,
{
    let mut v: Vec<f64> = (0..n)
        .map(|x| if is_goal(x) { 0.0 } else { f64::NEG_INFINITY })
        .collect();
    let table: Vec<Vec<(f64, usize)>> = (0..n)
        .map(|x| if is_goal(x) { Vec::new() } else { moves(x) })
        .collect();
    for _ in 0..=n {
        let next: Vec<f64> = (0..n)
            .map(|x| {
                if is_goal(x) {
                    return 0.0;
                }
                table[x]
                    .iter()
                    .map(|&(r, y)| r + v[y])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        if next == v {
            break;
        }
        v = next;
    }
    v
}

/// Name of the subgoal at cell `s`, if any.
pub fn subgoal_at(env: &EnvironmentMdp, s: usize) -> Option<&str> {
    match env.map.cells[s] {
        Cell::Subgoal(i) => Some(env.partition.subgoals[i].as_str()),
        _ => None,
    }
}

/// Valuation seen on entering `s` with the event mask fixed.
pub fn valuation<'a>(env: &'a EnvironmentMdp, s: usize, events: u32) -> impl Fn(&str) -> bool + 'a {
    let here = subgoal_at(env, s);
    move |p: &str| {
        if here == Some(p) {
            return true;
        }
        match env.partition.events.iter().position(|e| e == p) {
            Some(i) => events >> i & 1 == 1,
            None => false,
        }
    }
}

/// Optimal primitive-action values on automaton state × cell, with the
/// automaton advanced on the label of each entered cell. Index `f * n + s`.
pub fn flat_task_values(env: &EnvironmentMdp, fsa: &Fsa, events: u32) -> Vec<f64> {
    let n = env.map.n_cells();
    let free: Vec<bool> = (0..n).map(|s| env.map.is_free(s)).collect();
    max_reward_values(
        fsa.n_states() * n,
        |x| x / n == fsa.goal,
        |x| {
            let (f, s) = (x / n, x % n);
            if !free[s] {
                return Vec::new();
            }
            (0..N_ACTIONS)
                .map(|a| {
                    let s2 = env.step(s, a);
                    let f2 = fsa.step(f, &valuation(env, s2, events)).unwrap();
                    (fsa.reward[f] * env.reward(s, a), f2 * n + s2)
                })
                .collect()
        },
    )
}

/// Free cells (other than the goal) from which following the option's
/// greedy actions never reaches its subgoal.
pub fn cells_missing_goal(env: &EnvironmentMdp, opt: &LogicalOption) -> Vec<usize> {
    let n = env.map.n_cells();
    (0..n)
        .filter(|&s| env.map.is_free(s) && s != opt.goal_cell)
        .filter(|&start| {
            let mut s = start;
            for _ in 0..n {
                s = env.step(s, opt.action(0, s));
                if s == opt.goal_cell {
                    return false;
                }
            }
            true
        })
        .collect()
}

/// Structural isomorphism of two deterministic automata over the letters
/// "at most one subgoal, any event mask", found by walking both in lockstep
/// from their initial states.
pub fn isomorphic(a: &Fsa, b: &Fsa, subgoals: &[String], events: &[String]) -> Result<(), String> {
    if a.n_states() != b.n_states() {
        return Err(format!("{} states vs {}", a.n_states(), b.n_states()));
    }
    let mut letters: Vec<Vec<&str>> = Vec::new();
    for g in std::iter::once(None).chain(subgoals.iter().map(Some)) {
        for mask in 0..1u32 << events.len() {
            let mut on: Vec<&str> = g.map(|g| vec![g.as_str()]).unwrap_or_default();
            on.extend(
                events
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, e)| e.as_str()),
            );
            letters.push(on);
        }
    }
    let mut map: BTreeMap<usize, usize> = BTreeMap::from([(a.initial, b.initial)]);
    let mut queue = VecDeque::from([(a.initial, b.initial)]);
    while let Some((x, y)) = queue.pop_front() {
        if (x == a.goal) != (y == b.goal) {
            return Err(format!(
                "{} and {} disagree on acceptance",
                a.states[x], b.states[y]
            ));
        }
        for on in &letters {
            let holds = |p: &str| on.contains(&p);
            let x2 = a.step(x, &holds).map_err(|e| e.to_string())?;
            let y2 = b.step(y, &holds).map_err(|e| e.to_string())?;
            match map.get(&x2) {
                Some(&m) if m != y2 => {
                    return Err(format!(
                        "on {on:?}: {} -> {} maps to {} but {} -> {}",
                        a.states[x], a.states[x2], b.states[m], b.states[y], b.states[y2]
                    ))
                }
                Some(_) => {}
                None => {
                    map.insert(x2, y2);
                    queue.push_back((x2, y2));
                }
            }
        }
    }
    let mut images: Vec<usize> = map.values().copied().collect();
    images.sort();
    images.dedup();
    if map.len() != a.n_states() || images.len() != b.n_states() {
        return Err(format!(
            "only {} of {} states reachable in lockstep",
            map.len(),
            a.n_states()
        ));
    }
    Ok(())
}
