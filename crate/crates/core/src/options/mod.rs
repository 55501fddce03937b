//! Logical options: one Q-learned policy per subgoal, with exact reward and
//! transition models.

mod learn;
mod model;
mod shared;

use rayon::prelude::*;
use thiserror::Error;

use crate::automata::SafetyTable;
use crate::gridworld::EnvironmentMdp;

pub(crate) use learn::argmax;
pub use learn::{
    train_option, train_option_general, OptionLearner, OptionTrainConfig, QTable, Schedule,
};
pub use model::{
    evaluate_option_models, verify_option, LogicalOption, OptionBundle, OptionModel, OptionRecord,
    OptionSet, VerifyReport,
};
pub use shared::SharedOptionLearner;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptionError {
    #[error("unknown subgoal {0:?}")]
    UnknownSubgoal(String),
    #[error("invalid option training config: {0}")]
    Config(String),
    #[error("exact option models need deterministic dynamics (slip = 0)")]
    Stochastic,
    #[error("option bundle: {0}")]
    Bundle(String),
}

/// Train one option per subgoal. Independent learners run in parallel, each
/// on its own stream of the seeded generator, so results do not depend on
/// thread scheduling. The shared schedules learn all options from one stream.
pub fn train_all_options(
    env: &EnvironmentMdp,
    safety: Option<&SafetyTable>,
    cfg: &OptionTrainConfig,
) -> Result<OptionSet, OptionError> {
    if cfg.schedule != Schedule::Independent {
        return SharedOptionLearner::new(env, safety, cfg)?.train();
    }
    let options = env
        .partition
        .subgoals
        .par_iter()
        .map(|name| {
            OptionLearner::new(env, safety, name, cfg)?
                .train()
                .map(|(_, o)| o)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OptionSet {
        options,
        general: safety.is_some(),
    })
}
