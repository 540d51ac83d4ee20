use serde::Serialize;

use crate::cv_ntcp::normal_cdf;
use crate::error::{Error, Result};

/// Kolmogorov-Smirnov distance `sup_x |F_emp(x) - Phi(x)|` to the fixed
/// standard normal law.
///
/// The supremum is attained at a jump of the empirical c.d.f., so it is
/// evaluated exactly from both one-sided limits at every distinct value.
pub fn ks_distance(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Shape("KS distance of an empty sample".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("KS distance of a sample containing NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let phi = normal_cdf(x);
        sup = sup.max((phi - i as f64 / n).abs()).max((j as f64 / n - phi).abs());
        i = j;
    }
    Ok(sup.min(1.0))
}

/// One-sided DKW radius: `P(KS > eps) <= 2 exp(-2 n eps^2)` gives
/// `eps = sqrt(ln(2 / (1 - confidence)) / (2 n))`.
pub fn dkw_radius(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

/// Least-squares power law `ks ~ A |U_n|^-nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Fitted `nu`: the negated slope of `ln ks` against `ln |U_n|`.
    pub exponent: f64,
    /// Fitted `ln A`.
    pub log_constant: f64,
    /// Some KS value was nonpositive and replaced by machine epsilon.
    pub clamped: bool,
}

/// Fits the empirical convergence exponent from `(n, ks)` pairs on cubes of
/// dimension `d`.
pub fn fit_rate(points: &[(usize, f64)], d: usize) -> Result<RateFit> {
    if points.len() < 2 {
        return Err(Error::Domain("rate fit needs at least two points".into()));
    }
    let mut clamped = false;
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, ks)| {
            let ks = if ks > 0.0 {
                ks
            } else {
                clamped = true;
                f64::EPSILON
            };
            (((2 * n + 1) as f64).powi(d as i32).ln(), ks.ln())
        })
        .collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("rate fit needs at least two distinct n".into()));
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        exponent: -slope,
        log_constant: my - slope * mx,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_at_median() {
        assert_eq!(ks_distance(&[0.0]).unwrap(), 0.5);
        assert!(ks_distance(&[]).is_err());
        assert!(ks_distance(&[f64::NAN]).is_err());
    }

    #[test]
    fn ties_and_range() {
        let v = [1.0, 1.0, 1.0, -1.0];
        let d = ks_distance(&v).unwrap();
        // jump at 1 goes from 1/4 to 1; Phi(1) = 0.8413
        let phi1 = normal_cdf(1.0);
        let phim1 = normal_cdf(-1.0);
        let want = (phi1 - 0.25).max(1.0 - phi1).max(phim1).max(0.25 - phim1);
        assert!((d - want).abs() < 1e-15);
        assert!(ks_distance(&[1e300, 2e300]).unwrap() <= 1.0);
    }

    #[test]
    fn quantile_grid_is_close() {
        // values at Phi^{-1}((i - 1/2)/n) sit mid-jump: KS = 1/(2n)
        let n = 1000;
        let v: Vec<f64> = (1..=n)
            .map(|i| crate::cv_ntcp::normal_quantile((i as f64 - 0.5) / n as f64).unwrap())
            .collect();
        assert!((ks_distance(&v).unwrap() - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(usize, f64)> = [10usize, 40, 160, 640]
            .iter()
            .map(|&n| (n, 3.0 * ((2 * n + 1) as f64).powf(-0.5)))
            .collect();
        let fit = fit_rate(&pts, 1).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-9);
        assert!((fit.log_constant - 3.0f64.ln()).abs() < 1e-9);
        assert!(!fit.clamped);

        let flat = fit_rate(&[(1, 0.2), (5, 0.2), (9, 0.2)], 2).unwrap();
        assert!(flat.exponent.abs() < 1e-12);

        let zero = fit_rate(&[(1, 0.0), (5, 0.1)], 1).unwrap();
        assert!(zero.clamped);
        assert!(fit_rate(&[(1, 0.1)], 1).is_err());
        assert!(fit_rate(&[(3, 0.1), (3, 0.2)], 1).is_err());
    }

    #[test]
    fn normal_draws_are_close() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand::rngs::StdRng::seed_from_u64(99);
        let v: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let d = ks_distance(&v).unwrap();
        assert!(d <= dkw_radius(v.len(), 0.99) && d <= 0.01, "{d}");
    }

    #[test]
    fn dkw() {
        assert!((dkw_radius(100_000, 0.99) - 0.005_146).abs() < 1e-5);
    }
}
