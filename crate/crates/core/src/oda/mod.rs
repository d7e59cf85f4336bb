//! Online deterministic annealing for clustering and classification.
//!
//! A learner keeps a codebook of [`Codevector`]s and anneals a temperature
//! from `t_max` down to `t_min`. At every temperature level each codevector
//! is split into a perturbed pair, the pair is trained with a
//! stochastic-approximation rule until the codebook stops moving, coincident
//! same-label codevectors are merged back and idle ones pruned. Pairs only
//! stay apart below the critical temperature of their cell, so the codebook
//! grows progressively and at most doubles per level.

mod codebook;
mod params;
mod state;

pub use codebook::{
    converged_at_temperature, gibbs_association, merge_effective, nearest, perturb_pairs, prune_idle,
    Codevector,
};
pub use params::{
    stepsize, AnnealParams, ParamOverrides, DEFAULT_CHECK_EVERY, DEFAULT_LEVEL_BUDGET, WARMUP_SAMPLES,
};
pub(crate) use state::mix_seed;
pub use state::{
    init_state, run_oda, run_oda_with, train, warm_up, AnnealState, LevelRecord, Phase, RunOptions,
    StepEvent, Supervision,
};
