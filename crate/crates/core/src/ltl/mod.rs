//! LTL front end: parsing, co-safety, progression and translation to FSAs.

mod formula;
mod parser;
pub mod progress;
mod split;
mod translate;

use thiserror::Error;

pub use formula::{check_cosafe, CosafeCheck, LtlFormula};
pub use parser::{parse_formula, parse_ltl};
pub use progress::{canonicalize, progress, progress_trace};
pub use split::{split_spec, SpecSplit};
pub use translate::{translate_cosafe_to_fsa, DEFAULT_STATE_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared proposition {0:?}")]
    UndeclaredProposition(String),
    #[error("conjunct `{0}` is neither co-safe nor of the form G !p")]
    NonFactorable(String),
    #[error("specification has no liveness part")]
    EmptyLiveness,
    #[error("formula is not co-safe (offending node at path {path:?})")]
    NotCosafe { path: Vec<usize> },
    #[error("proposition {0:?} is not a subgoal or event proposition")]
    NotLiveness(String),
    #[error("translation exceeded {0} automaton states")]
    StateExplosion(usize),
    #[error("formula is unsatisfiable on the legal alphabet")]
    Unsatisfiable,
}
