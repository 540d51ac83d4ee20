//! Critical-volume NTCP for `n` independent, identically irradiated FSUs.
//!
//! The number of killed FSUs is `S_n ~ Bin(n, p(D))` and the complication
//! probability is `P(S_n >= L)`. Exact tails serve as the reference for the
//! normal and Weiss approximations, each of which carries a guaranteed
//! absolute error.

mod approx;
mod binomial;
mod fraction;
pub mod normal;
mod organ;

pub use approx::{
    binomial_sigma, ntcp_exact_result, ntcp_normal, ntcp_normal_integer_threshold, ntcp_weiss,
    ntcp_weiss_tail, threshold_for_confidence, ApproxResult, Method, BERRY_ESSEEN_CONSTANT,
    WEISS_MIN_SIGMA,
};
pub use binomial::ntcp_exact;
pub use fraction::{
    dose_for_fraction, fraction_curve_features, fraction_scale, invert_fraction, kill_fraction,
    FractionCurveFeatures,
};
pub use normal::{normal_cdf, normal_pdf, normal_quantile, normal_sf};
pub use organ::{OrganSpec, Reserve};
