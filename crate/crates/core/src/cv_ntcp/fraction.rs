//! Kill-fraction thresholds `kappa = p + c sqrt(p(1-p))` with
//! `c = z_gamma / sqrt(n)`, and their inversion back to a dose.

use serde::Serialize;

use super::normal::normal_quantile;
use crate::dose_response::{CellPopulation, DoseResponseModel};
use crate::error::{Error, Result};

fn check_c(c: f64) -> Result<()> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("c must be finite and nonnegative, got {c}")));
    }
    Ok(())
}

/// `c = z_gamma / sqrt(n)`; requires `gamma >= 1/2` so that `c >= 0`.
pub fn fraction_scale(n: u64, gamma: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("FSU count must be positive".into()));
    }
    if !(0.5..1.0).contains(&gamma) {
        return Err(Error::Domain(format!(
            "confidence must lie in [0.5, 1) for a kill-fraction threshold, got {gamma}"
        )));
    }
    Ok(normal_quantile(gamma)? / (n as f64).sqrt())
}

/// Threshold fraction of killed FSUs, `kappa(p) = p + c sqrt(p(1-p))`.
pub fn kill_fraction(p: f64, c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    check_c(c)?;
    Ok(p + c * (p * (1.0 - p)).sqrt())
}

/// Landmarks of the concave curve `p -> kappa(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionCurveFeatures {
    /// `kappa(p1) = 1`.
    pub p1: f64,
    /// Location of the maximum.
    pub p_star: f64,
    /// Maximum value, at least 1.
    pub kappa_star: f64,
    pub c: f64,
}

pub fn fraction_curve_features(c: f64) -> Result<FractionCurveFeatures> {
    check_c(c)?;
    let r = (1.0 + c * c).sqrt();
    Ok(FractionCurveFeatures {
        p1: 1.0 / (1.0 + c * c),
        p_star: 0.5 * (1.0 + 1.0 / r),
        kappa_star: 0.5 * (1.0 + r),
        c,
    })
}

/// The unique `p` in `(0, kappa]` with `kill_fraction(p, c) = kappa`.
///
/// Squaring `kappa - p = c sqrt(p(1-p))` gives
/// `(1 + c^2) p^2 - (2 kappa + c^2) p + kappa^2 = 0`. Only the smaller root
/// satisfies `kappa - p >= 0`; the larger one solves `kappa - p = -c sqrt(..)`
/// instead. The smaller root is formed as `kappa^2 / (1 + c^2) / p_plus`
/// from the product of roots, which avoids cancellation for large `c`.
pub fn invert_fraction(kappa: f64, c: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    check_c(c)?;
    if c == 0.0 {
        return Ok(kappa);
    }
    let disc = (kappa - kappa * kappa + 0.25 * c * c).sqrt();
    Ok(kappa * kappa / (kappa + 0.5 * c * c + c * disc))
}

/// Dose at which the kill fraction `kappa` is the `gamma`-confidence
/// threshold for an organ of `n` FSUs.
///
/// Inverts `kappa -> p` with `c = z_gamma / sqrt(n)` and then `p -> D`
/// through the dose-response model; `tolerance` applies to `p(D)`.
pub fn dose_for_fraction(
    model: &DoseResponseModel,
    cells: CellPopulation,
    kappa: f64,
    n: u64,
    gamma: f64,
    tolerance: f64,
) -> Result<f64> {
    let c = fraction_scale(n, gamma)?;
    let p_bar = invert_fraction(kappa, c)?;
    model
        .dose_for_kill_probability(cells, p_bar, tolerance)
        .map_err(|e| match e {
            Error::Unattainable(why) => Error::Unattainable(format!(
                "kill fraction {kappa} needs p = {p_bar}: {why}"
            )),
            other => other,
        })
}
