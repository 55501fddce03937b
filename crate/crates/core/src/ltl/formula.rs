use std::collections::BTreeSet;
use std::fmt;

/// LTL formula over named propositions.
///
/// Derived operators `->` and `<->` are desugared by the parser; `F` and `G`
/// keep their own node kinds. The derived `Ord` is the canonical order used to
/// sort the operands of conjunctions and disjunctions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LtlFormula {
    True,
    False,
    Prop(String),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
    Eventually(Box<LtlFormula>),
    Always(Box<LtlFormula>),
}

use LtlFormula::*;

impl LtlFormula {
    pub fn prop(name: impl Into<String>) -> Self {
        Prop(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: LtlFormula) -> Self {
        Not(Box::new(f))
    }

    pub fn and(a: LtlFormula, b: LtlFormula) -> Self {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: LtlFormula, b: LtlFormula) -> Self {
        Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: LtlFormula) -> Self {
        Next(Box::new(f))
    }

    pub fn until(a: LtlFormula, b: LtlFormula) -> Self {
        Until(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: LtlFormula) -> Self {
        Eventually(Box::new(f))
    }

    pub fn always(f: LtlFormula) -> Self {
        Always(Box::new(f))
    }

    /// Left-nested conjunction of `items`; `True` when empty.
    pub fn conjunction(items: impl IntoIterator<Item = LtlFormula>) -> Self {
        items.into_iter().reduce(LtlFormula::and).unwrap_or(True)
    }

    /// Left-nested disjunction of `items`; `False` when empty.
    pub fn disjunction(items: impl IntoIterator<Item = LtlFormula>) -> Self {
        items.into_iter().reduce(LtlFormula::or).unwrap_or(False)
    }

    pub fn children(&self) -> Vec<&LtlFormula> {
        match self {
            True | False | Prop(_) => vec![],
            Not(a) | Next(a) | Eventually(a) | Always(a) => vec![a],
            And(a, b) | Or(a, b) | Until(a, b) => vec![a, b],
        }
    }

    /// Node reached by following child indices from the root.
    pub fn at_path(&self, path: &[usize]) -> Option<&LtlFormula> {
        let mut node = self;
        for &i in path {
            node = *node.children().get(i)?;
        }
        Some(node)
    }

    pub fn propositions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        if let Prop(p) = self {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_props(out);
        }
    }

    pub fn is_temporal(&self) -> bool {
        match self {
            Next(_) | Until(..) | Eventually(_) | Always(_) => true,
            _ => self.children().iter().any(|c| c.is_temporal()),
        }
    }

    /// Height of the syntax tree; leaves have depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Operands of a (possibly nested) conjunction.
    pub fn conjuncts(&self) -> Vec<&LtlFormula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a LtlFormula, out: &mut Vec<&'a LtlFormula>) {
            match f {
                And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Operands of a (possibly nested) disjunction.
    pub fn disjuncts(&self) -> Vec<&LtlFormula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a LtlFormula, out: &mut Vec<&'a LtlFormula>) {
            match f {
                Or(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Negation normal form: negations pushed onto propositions.
    ///
    /// `!(a U b)` has no NNF without a release operator; it is kept as a
    /// negated until (with NNF operands) and fails the co-safety check.
    pub fn to_nnf(&self) -> LtlFormula {
        self.nnf(true)
    }

    fn nnf(&self, positive: bool) -> LtlFormula {
        match (self, positive) {
            (True, true) | (False, false) => True,
            (False, true) | (True, false) => False,
            (Prop(_), true) => self.clone(),
            (Prop(_), false) => LtlFormula::not(self.clone()),
            (Not(a), p) => a.nnf(!p),
            (And(a, b), true) => LtlFormula::and(a.nnf(true), b.nnf(true)),
            (And(a, b), false) => LtlFormula::or(a.nnf(false), b.nnf(false)),
            (Or(a, b), true) => LtlFormula::or(a.nnf(true), b.nnf(true)),
            (Or(a, b), false) => LtlFormula::and(a.nnf(false), b.nnf(false)),
            (Next(a), p) => LtlFormula::next(a.nnf(p)),
            (Eventually(a), true) => LtlFormula::eventually(a.nnf(true)),
            (Eventually(a), false) => LtlFormula::always(a.nnf(false)),
            (Always(a), true) => LtlFormula::always(a.nnf(true)),
            (Always(a), false) => LtlFormula::eventually(a.nnf(false)),
            (Until(a, b), true) => LtlFormula::until(a.nnf(true), b.nnf(true)),
            (Until(a, b), false) => LtlFormula::not(LtlFormula::until(a.nnf(true), b.nnf(true))),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Until(..) => 1,
            Or(..) => 2,
            And(..) => 3,
            Not(_) | Next(_) | Eventually(_) | Always(_) => 4,
            True | False | Prop(_) => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &LtlFormula, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// ASCII surface syntax with minimal parentheses; reparses to an equal AST.
impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = self.precedence();
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Prop(p) => write!(f, "{p}"),
            Not(a) | Next(a) | Eventually(a) | Always(a) => {
                let op = match self {
                    Not(_) => "!",
                    Next(_) => "X ",
                    Eventually(_) => "F ",
                    _ => "G ",
                };
                write!(f, "{op}")?;
                write_operand(f, a, a.precedence() < prec)
            }
            And(a, b) | Or(a, b) => {
                let op = if matches!(self, And(..)) {
                    " & "
                } else {
                    " | "
                };
                write_operand(f, a, a.precedence() < prec)?;
                write!(f, "{op}")?;
                write_operand(f, b, b.precedence() <= prec)
            }
            Until(a, b) => {
                write_operand(f, a, a.precedence() <= prec)?;
                write!(f, " U ")?;
                write_operand(f, b, b.precedence() < prec)
            }
        }
    }
}

/// Result of the co-safety check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosafeCheck {
    pub is_cosafe: bool,
    /// Child-index path (in the input formula) to the first offending node.
    pub violation: Option<Vec<usize>>,
}

/// Syntactic co-safety: after NNF there is no `G`, and `X`, `U`, `F` occur
/// only positively.
pub fn check_cosafe(f: &LtlFormula) -> CosafeCheck {
    fn walk(f: &LtlFormula, positive: bool, path: &mut Vec<usize>) -> bool {
        let bad = match f {
            Always(_) => positive,
            Eventually(_) | Until(..) => !positive,
            _ => false,
        };
        if bad {
            return false;
        }
        let child_polarity = if matches!(f, Not(_)) {
            !positive
        } else {
            positive
        };
        for (i, c) in f.children().into_iter().enumerate() {
            path.push(i);
            if !walk(c, child_polarity, path) {
                return false;
            }
            path.pop();
        }
        true
    }
    let mut path = Vec::new();
    if walk(f, true, &mut path) {
        CosafeCheck {
            is_cosafe: true,
            violation: None,
        }
    } else {
        CosafeCheck {
            is_cosafe: false,
            violation: Some(path),
        }
    }
}
