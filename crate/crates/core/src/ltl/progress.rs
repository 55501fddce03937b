//! Formula progression and the Boolean canonical form of residuals.

use super::formula::LtlFormula;
use LtlFormula::*;

/// Rewrite `f` to its canonical form.
///
/// Conjunctions and disjunctions are flattened, constant-folded,
/// deduplicated, absorbed (`x & (x | y) = x`, `x | (x & y) = x`), sorted
/// and rebuilt left-nested. `p & !p` folds to `false`; `p | !p` is left
/// alone because it does not hold on the empty suffix.
pub fn canonicalize(f: &LtlFormula) -> LtlFormula {
    match f {
        True | False | Prop(_) => f.clone(),
        Not(a) => match canonicalize(a) {
            True => False,
            False => True,
            Not(inner) => *inner,
            other => LtlFormula::not(other),
        },
        And(..) => {
            let parts = f.conjuncts().into_iter().map(canonicalize).collect();
            build_and(parts)
        }
        Or(..) => {
            let parts = f.disjuncts().into_iter().map(canonicalize).collect();
            build_or(parts)
        }
        Next(a) => LtlFormula::next(canonicalize(a)),
        Until(a, b) => {
            let (a, b) = (canonicalize(a), canonicalize(b));
            match (&a, &b) {
                (_, True) => True,
                (_, False) => False,
                (False, _) => b,
                (True, _) => canonicalize(&LtlFormula::eventually(b)),
                _ => LtlFormula::until(a, b),
            }
        }
        Eventually(a) => match canonicalize(a) {
            True => True,
            False => False,
            Eventually(inner) => Eventually(inner),
            other => LtlFormula::eventually(other),
        },
        Always(a) => match canonicalize(a) {
            True => True,
            False => False,
            other => LtlFormula::always(other),
        },
    }
}

fn complementary(items: &[LtlFormula]) -> bool {
    items.iter().any(|x| match x {
        Not(inner) => items.contains(inner),
        _ => false,
    })
}

/// Conjunction of canonical operands.
pub(crate) fn build_and(parts: Vec<LtlFormula>) -> LtlFormula {
    let mut items = Vec::with_capacity(parts.len());
    for p in parts {
        match p {
            True => {}
            False => return False,
            And(..) => items.extend(p.conjuncts().into_iter().cloned()),
            other => items.push(other),
        }
    }
    items.sort();
    items.dedup();
    if complementary(&items) {
        return False;
    }
    let absorbed: Vec<bool> = items
        .iter()
        .map(|x| match x {
            Or(..) => x
                .disjuncts()
                .into_iter()
                .any(|d| items.iter().any(|y| y != x && y == d)),
            _ => false,
        })
        .collect();
    let kept = items
        .into_iter()
        .zip(absorbed)
        .filter_map(|(x, gone)| (!gone).then_some(x));
    LtlFormula::conjunction(kept)
}

/// Disjunction of canonical operands.
pub(crate) fn build_or(parts: Vec<LtlFormula>) -> LtlFormula {
    let mut items = Vec::with_capacity(parts.len());
    for p in parts {
        match p {
            False => {}
            True => return True,
            Or(..) => items.extend(p.disjuncts().into_iter().cloned()),
            other => items.push(other),
        }
    }
    items.sort();
    items.dedup();
    let absorbed: Vec<bool> = items
        .iter()
        .map(|x| match x {
            And(..) => x
                .conjuncts()
                .into_iter()
                .any(|d| items.iter().any(|y| y != x && y == d)),
            _ => false,
        })
        .collect();
    let kept = items
        .into_iter()
        .zip(absorbed)
        .filter_map(|(x, gone)| (!gone).then_some(x));
    LtlFormula::disjunction(kept)
}

/// One-step progression of `f` through a single assignment.
///
/// `f` should be in negation normal form. The result is canonical, so
/// residuals that differ only in operand order or duplication compare equal.
pub fn progress<A>(f: &LtlFormula, holds: &A) -> LtlFormula
where
    A: Fn(&str) -> bool + ?Sized,
{
    step(&canonicalize(f), holds)
}

/// Progression of a formula that is already canonical.
pub(crate) fn step<A>(f: &LtlFormula, holds: &A) -> LtlFormula
where
    A: Fn(&str) -> bool + ?Sized,
{
    match f {
        True => True,
        False => False,
        Prop(p) => {
            if holds(p) {
                True
            } else {
                False
            }
        }
        Not(a) => match a.as_ref() {
            Prop(p) => {
                if holds(p) {
                    False
                } else {
                    True
                }
            }
            // not in NNF; progress the operand and negate
            other => canonicalize(&LtlFormula::not(step(other, holds))),
        },
        And(..) => build_and(f.conjuncts().into_iter().map(|c| step(c, holds)).collect()),
        Or(..) => build_or(f.disjuncts().into_iter().map(|c| step(c, holds)).collect()),
        Next(a) => a.as_ref().clone(),
        Until(a, b) => {
            let rest = build_and(vec![step(a, holds), f.clone()]);
            build_or(vec![step(b, holds), rest])
        }
        Eventually(a) => build_or(vec![step(a, holds), f.clone()]),
        Always(a) => build_and(vec![step(a, holds), f.clone()]),
    }
}

/// Iterated progression over a finite trace of assignments.
pub fn progress_trace<A, I>(f: &LtlFormula, trace: I) -> LtlFormula
where
    A: Fn(&str) -> bool,
    I: IntoIterator<Item = A>,
{
    let mut current = canonicalize(&f.to_nnf());
    for assignment in trace {
        if matches!(current, True | False) {
            break;
        }
        current = self::step(&current, &assignment);
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_formula;

    fn with<'a>(trues: &'a [&'a str]) -> impl Fn(&str) -> bool + 'a {
        move |p| trues.contains(&p)
    }

    #[test]
    fn eventually_examples() {
        let f = parse_formula("F a").unwrap();
        assert_eq!(progress(&f, &with(&["a"])), True);
        assert_eq!(progress(&f, &with(&[])), f);
    }

    #[test]
    fn until_stays_when_lhs_holds() {
        let f = parse_formula("a U b").unwrap();
        assert_eq!(progress(&f, &with(&["a"])), f);
        assert_eq!(progress(&f, &with(&["b"])), True);
        assert_eq!(progress(&f, &with(&[])), False);
    }

    #[test]
    fn residuals_are_order_insensitive() {
        let x = parse_formula("F a & F b").unwrap();
        let y = parse_formula("F b & F a").unwrap();
        assert_eq!(progress(&x, &with(&[])), progress(&y, &with(&[])));
    }

    #[test]
    fn boolean_simplification() {
        let f = parse_formula("(a | F b) & a & a").unwrap();
        assert_eq!(canonicalize(&f), LtlFormula::prop("a"));
        let g = parse_formula("a | a & F b").unwrap();
        assert_eq!(canonicalize(&g), LtlFormula::prop("a"));
        let h = parse_formula("a & !a & F b").unwrap();
        assert_eq!(canonicalize(&h), False);
        let t = parse_formula("false | true & F true").unwrap();
        assert_eq!(canonicalize(&t), True);
    }

    #[test]
    fn sequential_progression_chain() {
        let f = parse_formula("F(a & F(b & F c))").unwrap();
        let r1 = progress(&f, &with(&["a"]));
        assert_eq!(
            r1,
            canonicalize(&parse_formula("F(b & F c) | F(a & F(b & F c))").unwrap())
        );
        let r2 = progress(&r1, &with(&["b"]));
        let r3 = progress(&r2, &with(&["c"]));
        assert_eq!(r3, True);
    }
}
