//! Strictly stationary random fields of FSU states on integer cubes of
//! `Z^d`, with exact oracles for their mean and covariances.
//!
//! All models are moving-window functionals of iid Bernoulli noise, which
//! makes them m-dependent: sites farther apart than twice the window radius
//! are independent, so the maximal correlation between field values on
//! distant sets is zero and every power-decay dependence condition holds.

mod cube;
pub mod io;
mod model;
mod moments;
pub mod rng;
mod sample;

pub use cube::{LatticeCube, MAX_DIM};
pub use io::{decode_sample, encode_sample, read_sample, write_sample};
pub use model::{FieldKind, FieldModel, DEFAULT_LEVELS};
pub use moments::{
    binomial_pmf, covariance_at_lag, exact_variance_ratio, model_mean, model_sigma2,
    LongRunVariance, DEGENERATE_SIGMA2,
};
pub use sample::{sample_field, sample_field_capped, FieldSample, DEFAULT_MAX_CELLS};
