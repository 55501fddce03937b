use crate::automata::FsaTable;
use crate::options::OptionSet;

use super::PlanError;

/// The option whose subgoal moves the FSA out of `f` at the lowest cost
/// from here, with no lookahead. Ties go to the lowest option index.
pub fn greedy_metapolicy(
    fsa: &FsaTable,
    options: &OptionSet,
    f: usize,
    fs: usize,
    s: usize,
    events: u32,
) -> Result<usize, PlanError> {
    let mut best: Option<(usize, f64)> = None;
    for (o, opt) in options.options.iter().enumerate() {
        let x = fs * opt.model.n_cells + s;
        if s == opt.goal_cell || !opt.model.terminates(x) {
            continue;
        }
        if fsa.next(f, Some(o), events) == f {
            continue;
        }
        let r = opt.model.reward[x];
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((o, r));
        }
    }
    best.map(|(o, _)| o).ok_or(PlanError::Stuck { f, cell: s })
}
