//! Partial sums of dependent lattice fields, the block-average variance
//! estimator `C(U)`, and CLT statistics normalized by it.

mod estimator;
mod gap;
mod statistic;

pub use estimator::{
    default_bandwidth, partial_sum, scheduled_bandwidth, variance_estimator, BandwidthRule,
    EstimatorConfig, Region, DEFAULT_ETA,
};
pub use gap::{gap_envelope, variance_gap, GapRegime, GapRow};
pub use statistic::{
    confidence_interval, ntcp_estimate, self_normalized_statistic, ConfidenceInterval,
    Normalization, NormalizationKind, NormalizedStatistic, SampleSummary,
};
