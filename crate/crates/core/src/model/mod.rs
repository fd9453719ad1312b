//! The scaled reverse circulant matrix, its entry distributions and the
//! replicate sampler for `w_p` / `w_Q`.

mod distribution;
mod matrix;
mod samples;

pub use distribution::{
    check_declared_moments, replicate_rng, sample_entries, CustomSampler, DistributionKind,
    EntryDistribution, MomentProfile, DEFAULT_MOMENT_ORDER,
};
pub use matrix::{build_rc, FastTracer, RcMatrix};
pub use samples::{w_samples, CenteringRecord, StatisticKind, WSamples};
