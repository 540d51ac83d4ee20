//! Critical-volume NTCP modelling for independent and dependent functional
//! subunits.
//!
//! * [`dose_response`]: surviving-fraction curves and FSU kill probability.
//! * [`cv_ntcp`]: binomial NTCP with certified normal and Weiss
//!   approximations, kill-fraction thresholds and dose inversion.
//! * [`lattice_fields`]: stationary m-dependent random fields of FSU states on
//!   integer cubes, with exact mean and covariance oracles.
//! * [`dependent_clt`]: partial sums, the block-average variance estimator
//!   and self-normalized statistics.
//! * [`experiment_harness`]: seeded Monte Carlo campaigns and reports.

// `!(x > 0.0)` is how NaN gets rejected alongside the range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cv_ntcp;
pub mod dependent_clt;
pub mod dose_response;
mod error;
pub mod experiment_harness;
pub mod lattice_fields;

pub use cv_ntcp::{normal_cdf, normal_quantile, ApproxResult, Method, OrganSpec, Reserve};
pub use dose_response::{CellPopulation, DoseResponseModel};
pub use error::{Error, Result};
pub use lattice_fields::{FieldKind, FieldModel, FieldSample, LatticeCube};
