//! Monte Carlo check of the finite-cube variance gap
//! `|Var S(U_n) / |U_n| - sigma^2|`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice_fields::rng::derive_seed;
use crate::lattice_fields::{
    exact_variance_ratio, model_mean, model_sigma2, sample_field, FieldModel, LatticeCube,
};

/// Replicates per parallel work unit; fixed so results do not depend on the
/// thread count.
const BLOCK: usize = 1024;

/// Decay regime of the variance gap for covariances decaying like
/// `dist^-lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapRegime {
    /// `d < lambda < d + 1`: `n^(d - lambda)`.
    Slow,
    /// `lambda = d + 1`: `(1 + ln n) / n`.
    Critical,
    /// `lambda > d + 1`, including every m-dependent field: `1 / n`.
    Fast,
}

/// Envelope shape `f(n, d, lambda)` of the gap (up to a constant).
pub fn gap_envelope(n: usize, d: usize, lambda: f64) -> (GapRegime, f64) {
    let n = n.max(1) as f64;
    let d = d as f64;
    if lambda > d + 1.0 {
        (GapRegime::Fast, 1.0 / n)
    } else if lambda == d + 1.0 {
        (GapRegime::Critical, (1.0 + n.ln()) / n)
    } else {
        (GapRegime::Slow, n.powf(d - lambda))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub cube_size: usize,
    /// Monte Carlo `Var S(U_n) / |U_n|`.
    pub mc_ratio: f64,
    /// Standard error of `mc_ratio`.
    pub mc_se: f64,
    /// The same ratio computed exactly from the covariance table.
    pub exact_ratio: f64,
    pub sigma2: f64,
    /// `|mc_ratio - sigma2|`.
    pub gap: f64,
    /// `|exact_ratio - sigma2|`.
    pub exact_gap: f64,
    /// `f(n)` for the model's regime (always `1 / n` here).
    pub envelope: f64,
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: f64,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        let x2 = x * x;
        self.count += 1.0;
        self.s1 += x;
        self.s2 += x2;
        self.s3 += x2 * x;
        self.s4 += x2 * x2;
    }

    fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.s3 += o.s3;
        self.s4 += o.s4;
    }

    /// Unbiased variance and its large-sample standard error.
    fn variance_and_se(&self) -> (f64, f64) {
        let r = self.count;
        let m = self.s1 / r;
        let c2 = self.s2 / r - m * m;
        let c4 = self.s4 / r - 4.0 * m * self.s3 / r + 6.0 * m * m * self.s2 / r - 3.0 * m.powi(4);
        let var = c2 * r / (r - 1.0);
        let se = ((c4 - c2 * c2 * (r - 3.0) / (r - 1.0)) / r).max(0.0).sqrt();
        (var, se)
    }
}

/// Gap between the finite-cube variance ratio and `sigma^2` along a
/// schedule of half-widths.
///
/// Each replicate draws one field on the largest cube; the smaller cubes of
/// the schedule are its centred restrictions (which by construction are
/// exactly the samples those cubes would get with the same seed). Replicate
/// `i` uses seed `derive_seed(master_seed, [i])`.
pub fn variance_gap(
    model: &FieldModel,
    n_schedule: &[usize],
    replicates: usize,
    master_seed: u64,
) -> Result<Vec<GapRow>> {
    if replicates < 4 {
        return Err(Error::Parameter("variance gap needs at least 4 replicates".into()));
    }
    let Some(&n_max) = n_schedule.iter().max() else {
        return Err(Error::Parameter("empty n schedule".into()));
    };
    let sigma2 = model_sigma2(model)?.require()?;
    let mean = model_mean(model)?;
    let big = LatticeCube::new(model.dim, n_max)?;
    let cubes: Vec<LatticeCube> = n_schedule
        .iter()
        .map(|&n| LatticeCube::new(model.dim, n))
        .collect::<Result<_>>()?;

    let blocks: Vec<Result<Vec<Moments>>> = (0..replicates.div_ceil(BLOCK))
        .into_par_iter()
        .map(|block| {
            let mut acc = vec![Moments::default(); cubes.len()];
            for i in block * BLOCK..((block + 1) * BLOCK).min(replicates) {
                let s = sample_field(model, big, derive_seed(master_seed, &[i as u64]))?;
                for (k, cube) in cubes.iter().enumerate() {
                    let sum = centred_cube_sum(&s.values, big, cube.n);
                    acc[k].push(sum - cube.len() as f64 * mean);
                }
            }
            Ok(acc)
        })
        .collect();

    let mut totals = vec![Moments::default(); cubes.len()];
    for block in blocks {
        for (t, m) in totals.iter_mut().zip(block?) {
            t.merge(&m);
        }
    }

    cubes
        .iter()
        .zip(&totals)
        .map(|(cube, m)| {
            let size = cube.len() as f64;
            let (var, se) = m.variance_and_se();
            let mc_ratio = var / size;
            let exact_ratio = exact_variance_ratio(model, cube.n)?;
            Ok(GapRow {
                n: cube.n,
                cube_size: cube.len(),
                mc_ratio,
                mc_se: se / size,
                exact_ratio,
                sigma2,
                gap: (mc_ratio - sigma2).abs(),
                exact_gap: (exact_ratio - sigma2).abs(),
                envelope: gap_envelope(cube.n, model.dim, f64::INFINITY).1,
            })
        })
        .collect()
}

/// Sum over the centred sub-cube of half-width `n` of a row-major array on
/// `big`.
fn centred_cube_sum(values: &[f64], big: LatticeCube, n: usize) -> f64 {
    let side = big.side();
    let off = big.n - n;
    let inner = 2 * n + 1;
    match big.d {
        1 => values[off..off + inner].iter().sum(),
        2 => (off..off + inner)
            .map(|a| values[a * side + off..a * side + off + inner].iter().sum::<f64>())
            .sum(),
        _ => (off..off + inner)
            .flat_map(|a| (off..off + inner).map(move |b| (a, b)))
            .map(|(a, b)| {
                let row = (a * side + b) * side;
                values[row + off..row + off + inner].iter().sum::<f64>()
            })
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependent_clt::{partial_sum, Region};
    use crate::lattice_fields::FieldKind;

    #[test]
    fn centred_sums_match_partial_sum() {
        for d in 1..=3 {
            let m = FieldModel::new(d, FieldKind::MovingWindowThreshold { radius: 1, theta: 0.5, k_min: 2 }).unwrap();
            let big = LatticeCube::new(d, 5).unwrap();
            let s = sample_field(&m, big, 2).unwrap();
            for n in 0..=5 {
                let r = Region::Box { lo: vec![-(n as i64); d], hi: vec![n as i64; d] };
                assert_eq!(centred_cube_sum(&s.values, big, n), partial_sum(&s, &r).unwrap());
            }
        }
    }

    #[test]
    fn iid_gap_is_noise() {
        let m = FieldModel::iid(1, 0.3).unwrap();
        let rows = variance_gap(&m, &[4, 16, 64], 20_000, 1).unwrap();
        for r in rows {
            assert!((r.exact_ratio - 0.21).abs() < 1e-15);
            assert!(r.exact_gap < 1e-15);
            assert!(r.gap < 4.0 * r.mc_se, "{r:?}");
        }
    }

    #[test]
    fn single_site_cube() {
        // Var S(U_0) = cov(X0, X0); gap = sum over j != 0 of cov(X0, Xj)
        let m = FieldModel::majority_1d(0.5).unwrap();
        let rows = variance_gap(&m, &[0], 40_000, 3).unwrap();
        assert_eq!(rows[0].exact_ratio, 0.25);
        assert_eq!(rows[0].exact_gap, 2.0 * (0.125 + 0.0625));
        assert!((rows[0].mc_ratio - 0.25).abs() < 4.0 * rows[0].mc_se);
    }

    #[test]
    fn envelope_regimes() {
        assert_eq!(gap_envelope(10, 1, 5.0), (GapRegime::Fast, 0.1));
        assert_eq!(gap_envelope(10, 1, 2.0).0, GapRegime::Critical);
        let (regime, f) = gap_envelope(16, 2, 2.5);
        assert_eq!(regime, GapRegime::Slow);
        assert!((f - 0.25).abs() < 1e-15);
    }

    #[test]
    fn degenerate_model_rejected() {
        let m = FieldModel::majority_1d(1.0).unwrap();
        assert!(matches!(variance_gap(&m, &[4], 10, 0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn moments_variance() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        let (var, _) = m.variance_and_se();
        assert!((var - 5.0 / 3.0).abs() < 1e-15);
    }
}
