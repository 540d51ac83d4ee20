//! Normal and Weiss approximations to the binomial tail with their
//! guaranteed error bounds.

use serde::Serialize;

use super::binomial::{check_probability, ntcp_exact};
use super::normal::{normal_cdf, normal_quantile, normal_sf, INV_SQRT_2PI};
use crate::error::{Error, Result};

/// Upper bound on the absolute constant in the Berry-Esseen inequality for
/// Bernoulli sums: `sup_x |P(S_n >= x) - 1 + Phi(z)| <= c / sqrt(npq)`.
pub const BERRY_ESSEEN_CONSTANT: f64 = 0.7975;

/// The Weiss error bound is only guaranteed for `sigma >= WEISS_MIN_SIGMA`.
pub const WEISS_MIN_SIGMA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Normal,
    NormalIntegerThreshold,
    Weiss,
}

/// An approximate probability together with its certified absolute error.
///
/// `error_bound` is `None` when the method offers no guarantee at the given
/// parameters (Weiss with `sigma < 5`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxResult {
    pub value: f64,
    pub error_bound: Option<f64>,
    pub method: Method,
}

impl ApproxResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error_bound: Some(0.0),
            method: Method::Exact,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.error_bound.is_some()
    }
}

/// Exact tail wrapped as an [`ApproxResult`] with zero error.
pub fn ntcp_exact_result(n: u64, p: f64, threshold: u64) -> Result<ApproxResult> {
    ntcp_exact(n, p, threshold).map(ApproxResult::exact)
}

/// Standard deviation `sqrt(npq)` of `Bin(n, p)`, rejecting degenerate laws.
pub fn binomial_sigma(n: u64, p: f64) -> Result<f64> {
    check_probability(p)?;
    if n == 0 || p == 0.0 || p == 1.0 {
        return Err(Error::Degenerate(format!(
            "Bin({n}, {p}) has zero variance"
        )));
    }
    Ok((n as f64 * p * (1.0 - p)).sqrt())
}

/// Normal approximation `P(S_n >= x) ~ 1 - Phi((x - np) / sqrt(npq))`.
pub fn ntcp_normal(n: u64, p: f64, x: f64) -> Result<ApproxResult> {
    let sigma = binomial_sigma(n, p)?;
    let z = (x - n as f64 * p) / sigma;
    Ok(ApproxResult {
        value: normal_sf(z),
        error_bound: Some(BERRY_ESSEEN_CONSTANT / sigma),
        method: Method::Normal,
    })
}

/// `x_gamma = np + sqrt(npq) z_gamma`, the threshold whose normal-approximate
/// exceedance probability is `1 - gamma`.
pub fn threshold_for_confidence(n: u64, p: f64, gamma: f64) -> Result<f64> {
    let sigma = binomial_sigma(n, p)?;
    let z = normal_quantile(gamma)?;
    Ok(n as f64 * p + sigma * z)
}

/// Integer threshold `L = floor(x_gamma)` and the approximation
/// `P(S_n >= L) ~ 1 - gamma`, whose bound picks up the modulus of continuity
/// of `Phi` on top of the Berry-Esseen term.
///
/// `L` is clamped into `[0, n + 1]`; the tail probability is unchanged by
/// the clamp.
pub fn ntcp_normal_integer_threshold(n: u64, p: f64, gamma: f64) -> Result<(u64, ApproxResult)> {
    let sigma = binomial_sigma(n, p)?;
    let x = threshold_for_confidence(n, p, gamma)?;
    let threshold = x.floor().clamp(0.0, (n + 1) as f64) as u64;
    Ok((
        threshold,
        ApproxResult {
            value: 1.0 - gamma,
            error_bound: Some((BERRY_ESSEEN_CONSTANT + INV_SQRT_2PI) / sigma),
            method: Method::NormalIntegerThreshold,
        },
    ))
}

fn weiss_shape(t: f64) -> f64 {
    (1.0 - t * t) * (-0.5 * t * t).exp()
}

/// Weiss's skewness-corrected approximation of `P(k <= S_n <= m)`:
///
/// `Phi(t2) - Phi(t1) + (q - p) / (6 sqrt(2 pi) sigma) [(1 - t^2) e^{-t^2/2}]_{t1}^{t2}`
///
/// with continuity-corrected `t1 = (k - 1/2 - np)/sigma`,
/// `t2 = (m + 1/2 - np)/sigma`. The error bound
/// `(0.12 + 0.18|p - q|)/sigma^2 + exp(-3 sigma / 2)` holds for `sigma >= 5`.
pub fn ntcp_weiss(n: u64, p: f64, k: u64, m: u64) -> Result<ApproxResult> {
    if k > m || m > n {
        return Err(Error::Domain(format!(
            "Weiss interval needs 0 <= k <= m <= n, got k={k} m={m} n={n}"
        )));
    }
    let sigma = binomial_sigma(n, p)?;
    let q = 1.0 - p;
    let np = n as f64 * p;
    let t1 = (k as f64 - 0.5 - np) / sigma;
    let t2 = (m as f64 + 0.5 - np) / sigma;

    let main = normal_cdf(t2) - normal_cdf(t1);
    let skew = (q - p) * INV_SQRT_2PI / (6.0 * sigma) * (weiss_shape(t2) - weiss_shape(t1));

    let error_bound = (sigma >= WEISS_MIN_SIGMA)
        .then(|| (0.12 + 0.18 * (p - q).abs()) / (sigma * sigma) + (-1.5 * sigma).exp());

    Ok(ApproxResult {
        value: main + skew,
        error_bound,
        method: Method::Weiss,
    })
}

/// NTCP `P(S_n >= threshold)` through [`ntcp_weiss`] on `[threshold, n]`.
pub fn ntcp_weiss_tail(n: u64, p: f64, threshold: u64) -> Result<ApproxResult> {
    if threshold > n {
        return Err(Error::Domain(format!(
            "Weiss tail needs threshold <= n, got {threshold} > {n}"
        )));
    }
    ntcp_weiss(n, p, threshold, n)
}
