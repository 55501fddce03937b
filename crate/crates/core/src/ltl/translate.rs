use std::collections::{HashMap, VecDeque};

use crate::automata::{Fsa, FsaEdge, Guard, PropKind, PropositionPartition};

use super::formula::{check_cosafe, LtlFormula};
use super::progress::{canonicalize, step};
use super::LtlError;

pub const DEFAULT_STATE_CAP: usize = 10_000;

/// Translate a co-safe formula into a deterministic FSA over the legal
/// letters of `partition` (at most one subgoal per step).
///
/// Residuals are explored by progression, merged by Moore minimization,
/// and dead states are dropped so that the assignments leading into them
/// become implicit self-loops.
pub fn translate_cosafe_to_fsa(
    f: &LtlFormula,
    partition: &PropositionPartition,
    cap: usize,
) -> Result<Fsa, LtlError> {
    let check = check_cosafe(f);
    if !check.is_cosafe {
        return Err(LtlError::NotCosafe {
            path: check.violation.unwrap_or_default(),
        });
    }
    for p in f.propositions() {
        match partition.kind_of(&p) {
            Some(PropKind::Subgoal) | Some(PropKind::Event) => {}
            Some(PropKind::Safety) => return Err(LtlError::NotLiveness(p)),
            None => return Err(LtlError::UndeclaredProposition(p)),
        }
    }

    let letters = partition.letters();
    let n_letters = letters.len();
    let start = canonicalize(&f.to_nnf());
    let mut residuals = vec![start.clone()];
    let mut index: HashMap<LtlFormula, usize> = HashMap::from([(start, 0)]);
    let mut delta: Vec<usize> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let current = residuals[i].clone();
        let row_start = delta.len();
        delta.resize(row_start + n_letters, 0);
        for (li, &l) in letters.iter().enumerate() {
            let next = step(&current, &|p: &str| partition.holds(l, p));
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if residuals.len() >= cap {
                        return Err(LtlError::StateExplosion(cap));
                    }
                    let j = residuals.len();
                    index.insert(next.clone(), j);
                    residuals.push(next);
                    queue.push_back(j);
                    j
                }
            };
            delta[row_start + li] = j;
        }
    }
    // BFS order means row i of delta belongs to residual i
    let n = residuals.len();
    let accepting: Vec<bool> = residuals.iter().map(|r| *r == LtlFormula::True).collect();

    let mut live = accepting.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            if !live[s]
                && delta[s * n_letters..(s + 1) * n_letters]
                    .iter()
                    .any(|&t| live[t])
            {
                live[s] = true;
                changed = true;
            }
        }
    }
    if !live[0] {
        return Err(LtlError::Unsatisfiable);
    }

    // Moore refinement; blocks: 0 = accepting, 1 = dead, 2.. = the rest
    let mut block: Vec<usize> = (0..n)
        .map(|s| {
            if accepting[s] {
                0
            } else if !live[s] {
                1
            } else {
                2
            }
        })
        .collect();
    loop {
        let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next_block = vec![0; n];
        for s in 0..n {
            let sig: Vec<usize> = if accepting[s] || !live[s] {
                Vec::new()
            } else {
                delta[s * n_letters..(s + 1) * n_letters]
                    .iter()
                    .map(|&t| block[t])
                    .collect()
            };
            let fresh = ids.len();
            next_block[s] = *ids.entry((block[s], sig)).or_insert(fresh);
        }
        let before = block.iter().collect::<std::collections::HashSet<_>>().len();
        let after = ids.len();
        block = next_block;
        if after == before {
            break;
        }
    }

    // number the quotient in BFS order from the initial block
    let rep_of = |b: usize| (0..n).find(|&s| block[s] == b).expect("block has a member");
    let mut order: Vec<usize> = vec![block[0]];
    let mut seen: HashMap<usize, usize> = HashMap::from([(block[0], 0)]);
    let mut k = 0;
    while k < order.len() {
        let rep = rep_of(order[k]);
        for li in 0..n_letters {
            let t = delta[rep * n_letters + li];
            let b = block[t];
            if live[t] && !seen.contains_key(&b) {
                seen.insert(b, order.len());
                order.push(b);
            }
        }
        k += 1;
    }

    let goal_pos = order.iter().position(|&b| accepting[rep_of(b)]);
    let goal_pos = goal_pos.ok_or(LtlError::Unsatisfiable)?;
    let mut names = Vec::with_capacity(order.len());
    let mut counter = 0;
    for (pos, _) in order.iter().enumerate() {
        if pos == goal_pos {
            names.push("goal".to_string());
        } else if pos == 0 {
            names.push("init".to_string());
        } else {
            counter += 1;
            names.push(format!("s{counter}"));
        }
    }

    let vars = partition.liveness_vars();
    let dont_care = partition.illegal_bits();
    let mut edges = Vec::new();
    for (pos, &b) in order.iter().enumerate() {
        if pos == goal_pos {
            continue;
        }
        let rep = rep_of(b);
        let mut on: Vec<Vec<u32>> = vec![Vec::new(); order.len()];
        for (li, &l) in letters.iter().enumerate() {
            let t = delta[rep * n_letters + li];
            if !live[t] {
                continue;
            }
            let tp = seen[&block[t]];
            if tp != pos {
                on[tp].push(partition.letter_bits(l));
            }
        }
        for (tp, minterms) in on.into_iter().enumerate() {
            if !minterms.is_empty() {
                edges.push(FsaEdge {
                    from: pos,
                    to: tp,
                    guard: Guard::from_minterms(&vars, &minterms, &dont_care),
                });
            }
        }
    }

    Ok(Fsa {
        reward: vec![1.0; names.len()],
        states: names,
        edges,
        initial: 0,
        goal: goal_pos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::validate_fsa;
    use crate::ltl::parse_formula;

    fn translate(text: &str) -> Result<Fsa, LtlError> {
        translate_cosafe_to_fsa(
            &parse_formula(text).unwrap(),
            &PropositionPartition::delivery(),
            DEFAULT_STATE_CAP,
        )
    }

    #[test]
    fn eventually_is_two_states() {
        let fsa = translate("F a").unwrap();
        assert_eq!(fsa.states, vec!["init", "goal"]);
        assert_eq!(fsa.edges.len(), 1);
        assert_eq!(fsa.edges[0].guard, Guard::prop("a"));
    }

    #[test]
    fn sequential_chain() {
        let fsa = translate("F(a & F(b & F(c & F h)))").unwrap();
        assert_eq!(fsa.n_states(), 5);
        assert!(validate_fsa(&fsa, &PropositionPartition::delivery()).is_empty());
    }

    #[test]
    fn trivial_formula_is_single_state() {
        let fsa = translate("true").unwrap();
        assert_eq!(fsa.n_states(), 1);
        assert_eq!(fsa.initial, fsa.goal);
    }

    #[test]
    fn rejections() {
        assert!(matches!(translate("G a"), Err(LtlError::NotCosafe { .. })));
        assert!(matches!(translate("F o"), Err(LtlError::NotLiveness(_))));
        assert!(matches!(
            translate("F zz"),
            Err(LtlError::UndeclaredProposition(_))
        ));
        assert!(matches!(
            translate("F (a & b)"),
            Err(LtlError::Unsatisfiable)
        ));
    }

    #[test]
    fn state_cap() {
        let f = parse_formula("F(a & F(b & F(c & F h)))").unwrap();
        let r = translate_cosafe_to_fsa(&f, &PropositionPartition::delivery(), 3);
        assert_eq!(r, Err(LtlError::StateExplosion(3)));
    }

    #[test]
    fn task_formulas_match_hand_coded() {
        use crate::automata::{fsa_isomorphism, hand_coded_task_fsas};
        use crate::ltl::split_spec;
        let p = PropositionPartition::delivery();
        for (task, expected) in hand_coded_task_fsas() {
            let spec = parse_formula(task.formula()).unwrap();
            let split = split_spec(&spec, &p.safety).unwrap();
            let fsa = translate_cosafe_to_fsa(&split.liveness, &p, DEFAULT_STATE_CAP).unwrap();
            if let Err(e) = fsa_isomorphism(&fsa, &expected, &p) {
                panic!("{task}: {e}\n{}", fsa.to_json_string());
            }
        }
    }
}
