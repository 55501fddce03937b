use super::formula::{check_cosafe, LtlFormula};
use super::LtlError;

/// A specification factored into a co-safe liveness part and a list of
/// safety propositions that must never hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecSplit {
    pub liveness: LtlFormula,
    pub safety_conjuncts: Vec<String>,
}

impl SpecSplit {
    /// `liveness & G !p1 & G !p2 ...`
    pub fn reassemble(&self) -> LtlFormula {
        let safety = self
            .safety_conjuncts
            .iter()
            .map(|p| LtlFormula::always(LtlFormula::not(LtlFormula::prop(p.clone()))));
        LtlFormula::conjunction(std::iter::once(self.liveness.clone()).chain(safety))
    }
}

fn safety_shape(f: &LtlFormula) -> Option<&str> {
    if let LtlFormula::Always(inner) = f {
        if let LtlFormula::Not(p) = inner.as_ref() {
            if let LtlFormula::Prop(name) = p.as_ref() {
                return Some(name);
            }
        }
    }
    None
}

/// Split a top-level conjunction into liveness and `G !p` safety conjuncts.
pub fn split_spec<S: AsRef<str>>(
    f: &LtlFormula,
    safety_props: &[S],
) -> Result<SpecSplit, LtlError> {
    let mut liveness = Vec::new();
    let mut safety = Vec::new();
    for conjunct in f.conjuncts() {
        match safety_shape(conjunct) {
            Some(p) if safety_props.iter().any(|s| s.as_ref() == p) => {
                if !safety.iter().any(|s: &String| s == p) {
                    safety.push(p.to_string());
                }
            }
            _ if check_cosafe(conjunct).is_cosafe => liveness.push(conjunct.clone()),
            _ => return Err(LtlError::NonFactorable(conjunct.to_string())),
        }
    }
    if liveness.is_empty() {
        return Err(LtlError::EmptyLiveness);
    }
    Ok(SpecSplit {
        liveness: LtlFormula::conjunction(liveness),
        safety_conjuncts: safety,
    })
}
