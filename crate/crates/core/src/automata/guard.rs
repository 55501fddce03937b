use std::collections::BTreeSet;
use std::fmt;

use crate::ltl::{parse_formula, LtlFormula};

use super::AutomatonError;

/// Propositional edge label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    True,
    False,
    Prop(String),
    Not(Box<Guard>),
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

impl Guard {
    pub fn prop(name: impl Into<String>) -> Self {
        Guard::Prop(name.into())
    }

    /// Parse a guard written in the LTL surface syntax; temporal operators
    /// are rejected.
    pub fn parse(text: &str) -> Result<Self, AutomatonError> {
        let f = parse_formula(text).map_err(|e| AutomatonError::Guard {
            guard: text.to_string(),
            reason: e.to_string(),
        })?;
        Guard::from_formula(&f).ok_or_else(|| AutomatonError::Guard {
            guard: text.to_string(),
            reason: "temporal operators are not allowed in guards".into(),
        })
    }

    pub fn from_formula(f: &LtlFormula) -> Option<Self> {
        Some(match f {
            LtlFormula::True => Guard::True,
            LtlFormula::False => Guard::False,
            LtlFormula::Prop(p) => Guard::Prop(p.clone()),
            LtlFormula::Not(a) => Guard::Not(Box::new(Guard::from_formula(a)?)),
            LtlFormula::And(..) => Guard::And(
                f.conjuncts()
                    .into_iter()
                    .map(Guard::from_formula)
                    .collect::<Option<_>>()?,
            ),
            LtlFormula::Or(..) => Guard::Or(
                f.disjuncts()
                    .into_iter()
                    .map(Guard::from_formula)
                    .collect::<Option<_>>()?,
            ),
            _ => return None,
        })
    }

    pub fn eval<A: Fn(&str) -> bool + ?Sized>(&self, holds: &A) -> bool {
        match self {
            Guard::True => true,
            Guard::False => false,
            Guard::Prop(p) => holds(p),
            Guard::Not(g) => !g.eval(holds),
            Guard::And(gs) => gs.iter().all(|g| g.eval(holds)),
            Guard::Or(gs) => gs.iter().any(|g| g.eval(holds)),
        }
    }

    pub fn propositions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            Guard::Prop(p) => {
                out.insert(p.clone());
            }
            Guard::Not(g) => g.collect(out),
            Guard::And(gs) | Guard::Or(gs) => gs.iter().for_each(|g| g.collect(out)),
            Guard::True | Guard::False => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Guard::Or(gs) if gs.len() > 1 => 1,
            Guard::And(gs) if gs.len() > 1 => 2,
            _ => 3,
        }
    }

    /// Smallest sum-of-products cover found by prime-implicant search.
    ///
    /// `vars` names the variables in bit order. Assignments in `on` must
    /// satisfy the result, those in `dont_care` may, all others must not.
    pub fn from_minterms(vars: &[String], on: &[u32], dont_care: &[u32]) -> Guard {
        if on.is_empty() {
            return Guard::False;
        }
        let primes = prime_implicants(vars.len(), on, dont_care);
        let cover = choose_cover(&primes, on);
        let terms: Vec<Guard> = cover
            .into_iter()
            .map(|cube| {
                let lits: Vec<Guard> = (0..vars.len())
                    .filter(|i| cube.care & (1 << i) != 0)
                    .map(|i| {
                        let p = Guard::prop(vars[i].clone());
                        if cube.value & (1 << i) != 0 {
                            p
                        } else {
                            Guard::Not(Box::new(p))
                        }
                    })
                    .collect();
                match lits.len() {
                    0 => Guard::True,
                    1 => lits.into_iter().next().unwrap(),
                    _ => Guard::And(lits),
                }
            })
            .collect();
        if terms.contains(&Guard::True) {
            return Guard::True;
        }
        if terms.len() == 1 {
            terms.into_iter().next().unwrap()
        } else {
            Guard::Or(terms)
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, gs: &[Guard], op: &str, prec: u8| {
            for (i, g) in gs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                if g.precedence() <= prec && gs.len() > 1 {
                    write!(f, "({g})")?;
                } else {
                    write!(f, "{g}")?;
                }
            }
            Ok(())
        };
        match self {
            Guard::True => write!(f, "true"),
            Guard::False => write!(f, "false"),
            Guard::Prop(p) => write!(f, "{p}"),
            Guard::Not(g) if g.precedence() < 3 => write!(f, "!({g})"),
            Guard::Not(g) => write!(f, "!{g}"),
            Guard::And(gs) if gs.is_empty() => write!(f, "true"),
            Guard::Or(gs) if gs.is_empty() => write!(f, "false"),
            Guard::And(gs) => join(f, gs, "&", 1),
            Guard::Or(gs) => join(f, gs, "|", 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Cube {
    value: u32,
    care: u32,
}

impl Cube {
    fn covers(&self, m: u32) -> bool {
        m & self.care == self.value
    }
}

fn prime_implicants(nvars: usize, on: &[u32], dont_care: &[u32]) -> Vec<Cube> {
    let full = if nvars >= 32 {
        u32::MAX
    } else {
        (1u32 << nvars) - 1
    };
    let mut current: BTreeSet<Cube> = on
        .iter()
        .chain(dont_care)
        .map(|&m| Cube {
            value: m,
            care: full,
        })
        .collect();
    let mut primes = BTreeSet::new();
    while !current.is_empty() {
        let items: Vec<Cube> = current.iter().copied().collect();
        let mut merged = vec![false; items.len()];
        let mut next = BTreeSet::new();
        for i in 0..items.len() {
            for j in (i + 1)..items.len() {
                let (a, b) = (items[i], items[j]);
                if a.care != b.care {
                    continue;
                }
                let diff = a.value ^ b.value;
                if diff.count_ones() == 1 {
                    next.insert(Cube {
                        value: a.value & !diff,
                        care: a.care & !diff,
                    });
                    merged[i] = true;
                    merged[j] = true;
                }
            }
        }
        for (c, m) in items.into_iter().zip(merged) {
            if !m {
                primes.insert(c);
            }
        }
        current = next;
    }
    // primes made only of don't-cares are useless
    primes
        .into_iter()
        .filter(|p| on.iter().any(|&m| p.covers(m)))
        .collect()
}

fn choose_cover(primes: &[Cube], on: &[u32]) -> Vec<Cube> {
    let mut uncovered: BTreeSet<u32> = on.iter().copied().collect();
    let mut chosen: Vec<Cube> = Vec::new();
    // essential primes first
    for &m in on {
        let covering: Vec<&Cube> = primes.iter().filter(|p| p.covers(m)).collect();
        if covering.len() == 1 && !chosen.contains(covering[0]) {
            chosen.push(*covering[0]);
        }
    }
    for c in &chosen {
        uncovered.retain(|&m| !c.covers(m));
    }
    while !uncovered.is_empty() {
        let best = primes
            .iter()
            .filter(|p| !chosen.contains(p))
            .max_by_key(|p| {
                let gain = uncovered.iter().filter(|&&m| p.covers(m)).count();
                (gain, std::cmp::Reverse(p.care.count_ones()))
            })
            .copied()
            .expect("primes cover every on-set minterm");
        uncovered.retain(|&m| !best.covers(m));
        chosen.push(best);
    }
    chosen.sort_by_key(|c| (c.care.count_ones(), c.care, c.value));
    chosen
}
