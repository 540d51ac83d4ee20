//! Cell surviving-fraction curves and the induced FSU kill probability.
//!
//! An FSU of `n0` cells is disabled only when none of its cells survive, so
//! with cells acting independently `p(D) = (1 - SF(D))^n0`. The complement
//! `1 - SF(D)` is formed directly for each variant (never as `1.0 - sf`) so
//! that small doses and large `n0` do not lose precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Doses beyond this are treated as unreachable when inverting `p(D)`.
pub const MAX_DOSE: f64 = (1u64 << 60) as f64;

/// Parametric surviving-fraction family.
///
/// `beta = 0` and `m = 1` are accepted as degenerate boundary values; they
/// collapse the richer variants onto [`DoseResponseModel::SingleHit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DoseResponseModel {
    /// `SF = exp(-alpha D)`; mean lethal dose is `1/alpha`.
    SingleHit { alpha: f64 },
    /// Every one of `m` targets must be hit: `SF = 1 - (1 - exp(-alpha D))^m`.
    MultiTarget { alpha: f64, m: u32 },
    /// Single-hit component with a multi-target shoulder:
    /// `SF = exp(-alpha D) (1 - (1 - exp(-beta D))^m)`.
    Hybrid { alpha: f64, beta: f64, m: u32 },
    /// `SF = exp(-(alpha D + beta D^2))`.
    LinearQuadratic { alpha: f64, beta: f64 },
}

/// Number of cells making up one FSU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellPopulation {
    pub n0: u32,
}

impl CellPopulation {
    pub fn new(n0: u32) -> Result<Self> {
        if n0 == 0 {
            return Err(Error::Parameter("n0 must be at least 1".into()));
        }
        Ok(Self { n0 })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Parameter(format!("beta must be nonnegative, got {beta}")));
    }
    Ok(())
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::Parameter("target count m must be at least 1".into()));
    }
    Ok(())
}

fn check_dose(dose: f64) -> Result<()> {
    if !(dose >= 0.0) || dose.is_nan() {
        return Err(Error::Domain(format!("dose must be nonnegative, got {dose}")));
    }
    Ok(())
}

/// `1 - exp(-x)` without cancellation for small `x`.
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

impl DoseResponseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::SingleHit { alpha } => check_alpha(alpha),
            Self::MultiTarget { alpha, m } => {
                check_alpha(alpha)?;
                check_m(m)
            }
            Self::Hybrid { alpha, beta, m } => {
                check_alpha(alpha)?;
                check_beta(beta)?;
                check_m(m)
            }
            Self::LinearQuadratic { alpha, beta } => {
                check_alpha(alpha)?;
                check_beta(beta)
            }
        }
    }

    /// Mean lethal dose `D0 = 1/alpha` of the single-hit component.
    pub fn mean_lethal_dose(&self) -> f64 {
        let alpha = match *self {
            Self::SingleHit { alpha }
            | Self::MultiTarget { alpha, .. }
            | Self::Hybrid { alpha, .. }
            | Self::LinearQuadratic { alpha, .. } => alpha,
        };
        1.0 / alpha
    }

    /// Surviving fraction `SF(D)`.
    pub fn surviving_fraction(&self, dose: f64) -> Result<f64> {
        self.validate()?;
        check_dose(dose)?;
        Ok(match *self {
            Self::SingleHit { alpha } => (-alpha * dose).exp(),
            Self::MultiTarget { alpha, m } => {
                // 1 - h^m = -expm1(m ln h)
                let h = one_minus_exp_neg(alpha * dose);
                -(f64::from(m) * h.ln()).exp_m1()
            }
            Self::Hybrid { alpha, beta, m } => {
                let h = one_minus_exp_neg(beta * dose);
                (-alpha * dose).exp() * -(f64::from(m) * h.ln()).exp_m1()
            }
            Self::LinearQuadratic { alpha, beta } => (-(alpha * dose + beta * dose * dose)).exp(),
        })
    }

    /// Natural log of `1 - SF(D)`, the per-cell kill probability.
    fn ln_cell_kill(&self, dose: f64) -> f64 {
        match *self {
            Self::SingleHit { alpha } => one_minus_exp_neg(alpha * dose).ln(),
            Self::MultiTarget { alpha, m } => f64::from(m) * one_minus_exp_neg(alpha * dose).ln(),
            Self::Hybrid { alpha, beta, m } => {
                // 1 - SF = (1 - e^{-aD}) + e^{-aD} (1 - e^{-bD})^m, both terms >= 0
                let single = one_minus_exp_neg(alpha * dose);
                let shoulder = (f64::from(m) * one_minus_exp_neg(beta * dose).ln()).exp();
                (single + (-alpha * dose).exp() * shoulder).ln()
            }
            Self::LinearQuadratic { alpha, beta } => {
                one_minus_exp_neg(alpha * dose + beta * dose * dose).ln()
            }
        }
    }

    /// Probability that an FSU of `cells.n0` independent cells is killed.
    pub fn fsu_kill_probability(&self, cells: CellPopulation, dose: f64) -> Result<f64> {
        self.validate()?;
        check_dose(dose)?;
        if cells.n0 == 0 {
            return Err(Error::Parameter("n0 must be at least 1".into()));
        }
        if dose == 0.0 {
            return Ok(0.0);
        }
        Ok((f64::from(cells.n0) * self.ln_cell_kill(dose)).exp())
    }

    /// Dose `D` with `|p(D) - target_p| <= tolerance`, by bracketing bisection.
    ///
    /// The upper bracket doubles from 1 until `p` exceeds the target; if that
    /// does not happen below [`MAX_DOSE`] the target is reported unattainable.
    pub fn dose_for_kill_probability(
        &self,
        cells: CellPopulation,
        target_p: f64,
        tolerance: f64,
    ) -> Result<f64> {
        self.validate()?;
        if !(target_p > 0.0 && target_p < 1.0) {
            return Err(Error::Domain(format!(
                "target kill probability must lie in (0, 1), got {target_p}"
            )));
        }
        if !(tolerance > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tolerance}")));
        }
        let p = |d: f64| self.fsu_kill_probability(cells, d);

        let mut lo = 0.0;
        let mut hi = 1.0;
        while p(hi)? <= target_p {
            lo = hi;
            hi *= 2.0;
            if hi > MAX_DOSE {
                return Err(Error::Unattainable(format!(
                    "p(D) stays below {target_p} for all doses up to {MAX_DOSE:e}"
                )));
            }
        }

        loop {
            let mid = 0.5 * (lo + hi);
            let pm = p(mid)?;
            if (pm - target_p).abs() <= tolerance {
                return Ok(mid);
            }
            if mid <= lo || mid >= hi {
                // bracket exhausted at float resolution
                let (plo, phi) = (p(lo)?, p(hi)?);
                let best = if (plo - target_p).abs() <= (phi - target_p).abs() { lo } else { hi };
                let err = (p(best)? - target_p).abs();
                if err <= tolerance {
                    return Ok(best);
                }
                return Err(Error::Unattainable(format!(
                    "p(D) jumps across {target_p} by more than {tolerance} near D = {best}"
                )));
            }
            if pm < target_p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
}
