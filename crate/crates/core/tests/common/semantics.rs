//! Finite-trace LTL semantics, evaluated directly on traces.
//!
//! A formula is judged on a finite trace with three truth values: what the
//! trace decides is true or false, anything depending on positions past the
//! end is unknown. The trace is a good prefix exactly when the value is true.
//!
//! Values are computed for all traces up to a length bound at once. Every
//! table is indexed by trace code, and the suffix of a trace without its
//! first letter always has a smaller code, so one forward pass suffices.

use lof::ltl::LtlFormula;

pub const F: u8 = 0;
pub const U: u8 = 1;
pub const T: u8 = 2;

/// All traces over `n_props` propositions up to `max_len` letters.
pub struct TraceSpace {
    pub n_props: usize,
    pub max_len: usize,
    /// First code of each length.
    offsets: Vec<usize>,
    letters: usize,
}

impl TraceSpace {
    pub fn new(n_props: usize, max_len: usize) -> Self {
        let letters = 1usize << n_props;
        let mut offsets = vec![0];
        for len in 0..max_len {
            offsets.push(offsets[len] + letters.pow(len as u32));
        }
        TraceSpace {
            n_props,
            max_len,
            offsets,
            letters,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets[self.max_len] + self.letters.pow(self.max_len as u32)
    }

    /// Letters are stored little-endian: the first letter is the lowest digit.
    pub fn code(&self, trace: &[usize]) -> usize {
        let mut v = 0;
        for &l in trace.iter().rev() {
            v = v * self.letters + l;
        }
        self.offsets[trace.len()] + v
    }

    pub fn decode(&self, code: usize) -> Vec<usize> {
        let len = self.offsets.iter().rposition(|&o| o <= code).unwrap();
        let mut v = code - self.offsets[len];
        (0..len)
            .map(|_| {
                let l = v % self.letters;
                v /= self.letters;
                l
            })
            .collect()
    }

    /// `None` for the empty trace, else the first letter and the code of
    /// the rest.
    fn split(&self, code: usize) -> Option<(usize, usize)> {
        if code == 0 {
            return None;
        }
        let len = self.offsets.iter().rposition(|&o| o <= code).unwrap();
        let v = code - self.offsets[len];
        Some((v % self.letters, self.offsets[len - 1] + v / self.letters))
    }

    pub fn prop(&self, i: usize) -> Vec<u8> {
        (0..self.len())
            .map(|c| match self.split(c) {
                None => U,
                Some((l, _)) if l >> i & 1 == 1 => T,
                Some(_) => F,
            })
            .collect()
    }

    pub fn not(&self, a: &[u8]) -> Vec<u8> {
        a.iter().map(|&x| T - x).collect()
    }

    pub fn and(&self, a: &[u8], b: &[u8]) -> Vec<u8> {
        a.iter().zip(b).map(|(&x, &y)| x.min(y)).collect()
    }

    pub fn or(&self, a: &[u8], b: &[u8]) -> Vec<u8> {
        a.iter().zip(b).map(|(&x, &y)| x.max(y)).collect()
    }

    pub fn next(&self, a: &[u8]) -> Vec<u8> {
        (0..self.len())
            .map(|c| self.split(c).map_or(U, |(_, rest)| a[rest]))
            .collect()
    }

    pub fn until(&self, a: &[u8], b: &[u8]) -> Vec<u8> {
        let mut out = vec![U; self.len()];
        for c in 1..self.len() {
            let (_, rest) = self.split(c).unwrap();
            out[c] = b[c].max(a[c].min(out[rest]));
        }
        out
    }

    pub fn eventually(&self, a: &[u8]) -> Vec<u8> {
        let mut out = vec![U; self.len()];
        for c in 1..self.len() {
            let (_, rest) = self.split(c).unwrap();
            out[c] = a[c].max(out[rest]);
        }
        out
    }

    pub fn always(&self, a: &[u8]) -> Vec<u8> {
        let mut out = vec![U; self.len()];
        for c in 1..self.len() {
            let (_, rest) = self.split(c).unwrap();
            out[c] = a[c].min(out[rest]);
        }
        out
    }
}

/// Every formula over `props` whose syntax tree has height at most `depth`,
/// with its truth table over `space`.
pub fn formulas_with_tables(
    props: &[&str],
    depth: usize,
    space: &TraceSpace,
) -> Vec<(LtlFormula, Vec<u8>)> {
    let mut level: Vec<(LtlFormula, Vec<u8>)> = props
        .iter()
        .enumerate()
        .map(|(i, p)| (LtlFormula::prop(*p), space.prop(i)))
        .collect();
    for _ in 1..depth {
        let mut next = level.clone();
        next.extend(level.iter().flat_map(|(f, t)| {
            [
                (LtlFormula::not(f.clone()), space.not(t)),
                (LtlFormula::next(f.clone()), space.next(t)),
                (LtlFormula::eventually(f.clone()), space.eventually(t)),
                (LtlFormula::always(f.clone()), space.always(t)),
            ]
        }));
        for (f, tf) in &level {
            for (g, tg) in &level {
                next.push((LtlFormula::and(f.clone(), g.clone()), space.and(tf, tg)));
                next.push((LtlFormula::or(f.clone(), g.clone()), space.or(tf, tg)));
                next.push((LtlFormula::until(f.clone(), g.clone()), space.until(tf, tg)));
            }
        }
        level = next;
    }
    level
}

/// Direct recursive evaluation at position `i`; used to spot-check the
/// table construction.
pub fn eval_at(f: &LtlFormula, props: &[&str], trace: &[usize], i: usize) -> u8 {
    use LtlFormula::*;
    let n = trace.len();
    match f {
        True => T,
        False => F,
        Prop(p) => {
            if i >= n {
                U
            } else {
                let bit = props.iter().position(|q| q == p).unwrap();
                if trace[i] >> bit & 1 == 1 {
                    T
                } else {
                    F
                }
            }
        }
        Not(a) => T - eval_at(a, props, trace, i),
        And(a, b) => eval_at(a, props, trace, i).min(eval_at(b, props, trace, i)),
        Or(a, b) => eval_at(a, props, trace, i).max(eval_at(b, props, trace, i)),
        Next(a) => {
            if i >= n {
                U
            } else {
                eval_at(a, props, trace, i + 1)
            }
        }
        Eventually(a) => {
            let mut v = U;
            for j in (i..n).rev() {
                v = eval_at(a, props, trace, j).max(v);
            }
            v
        }
        Always(a) => {
            let mut v = U;
            for j in (i..n).rev() {
                v = eval_at(a, props, trace, j).min(v);
            }
            v
        }
        Until(a, b) => {
            let mut v = U;
            for j in (i..n).rev() {
                v = eval_at(b, props, trace, j).max(eval_at(a, props, trace, j).min(v));
            }
            v
        }
    }
}
