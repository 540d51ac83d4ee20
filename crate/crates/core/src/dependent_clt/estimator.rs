use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice_fields::{FieldSample, LatticeCube, MAX_DIM};

/// Block radius `b` of the variance estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BandwidthRule {
    Fixed { b: usize },
    /// `b_n = ceil(n^eta)` clamped to `[1, max(1, n - 1)]`; any
    /// `eta in (0, 1)` gives `b_n -> inf` and `b_n = o(n)`.
    Schedule { eta: f64 },
}

pub const DEFAULT_ETA: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub bandwidth: BandwidthRule,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            bandwidth: BandwidthRule::Schedule { eta: DEFAULT_ETA },
        }
    }
}

impl EstimatorConfig {
    pub fn fixed(b: usize) -> Self {
        Self {
            bandwidth: BandwidthRule::Fixed { b },
        }
    }

    pub fn schedule(eta: f64) -> Self {
        Self {
            bandwidth: BandwidthRule::Schedule { eta },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.bandwidth {
            BandwidthRule::Fixed { b: 0 } => {
                Err(Error::Parameter("bandwidth must be at least 1".into()))
            }
            BandwidthRule::Schedule { eta } if !(eta > 0.0 && eta < 1.0) => Err(Error::Parameter(
                format!("bandwidth exponent must lie in (0, 1), got {eta}"),
            )),
            _ => Ok(()),
        }
    }

    /// Bandwidth for a cube of half-width `n`.
    pub fn bandwidth(&self, n: usize) -> Result<usize> {
        self.validate()?;
        Ok(match self.bandwidth {
            BandwidthRule::Fixed { b } => b,
            BandwidthRule::Schedule { eta } => scheduled_bandwidth(n, eta),
        })
    }
}

fn clamp_bandwidth(b: usize, n: usize) -> usize {
    b.clamp(1, n.saturating_sub(1).max(1))
}

/// `ceil(n^eta)`, snapping to an integer when `n^eta` is one up to rounding.
pub fn scheduled_bandwidth(n: usize, eta: f64) -> usize {
    let x = (n.max(1) as f64).powf(eta);
    let r = x.round();
    let b = if (x - r).abs() <= 1e-9 * x { r } else { x.ceil() };
    clamp_bandwidth(b as usize, n)
}

/// `ceil(n^(1/3))` clamped to `[1, max(1, n - 1)]`, in integer arithmetic.
pub fn default_bandwidth(n: usize) -> usize {
    let mut b = (n as f64).cbrt().floor() as usize;
    while b.pow(3) < n {
        b += 1;
    }
    clamp_bandwidth(b, n)
}

/// Summed-area table over a cube for O(2^d) box sums.
pub(crate) struct BoxSums {
    d: usize,
    side: usize,
    table: Vec<f64>,
}

impl BoxSums {
    pub(crate) fn new(cube: LatticeCube, values: impl Iterator<Item = f64>) -> Self {
        let d = cube.d;
        let side = cube.side();
        let ext = side + 1;
        let mut table = vec![0.0; ext.pow(d as u32)];
        // place values at offset +1 on every axis
        for (i, v) in values.enumerate() {
            let mut rest = i;
            let mut idx = 0;
            let mut stride = 1;
            for _ in 0..d {
                idx += (rest % side + 1) * stride;
                rest /= side;
                stride *= ext;
            }
            table[idx] = v;
        }
        // cumulative sums along each axis
        let mut stride = 1;
        for _ in 0..d {
            for i in 0..table.len() {
                if (i / stride) % ext > 0 {
                    table[i] += table[i - stride];
                }
            }
            stride *= ext;
        }
        Self { d, side, table }
    }

    /// Sum over the box `lo..=hi` given as 0-based offsets (row-major order,
    /// first axis slowest).
    pub(crate) fn sum(&self, lo: &[usize; MAX_DIM], hi: &[usize; MAX_DIM]) -> f64 {
        let ext = self.side + 1;
        let mut total = 0.0;
        for corner in 0..(1usize << self.d) {
            let mut idx = 0;
            let mut stride = 1;
            let mut skip = false;
            let mut negative = false;
            // axis k of the row-major layout is the (d - 1 - k)-th stride
            for k in (0..self.d).rev() {
                let c = if corner >> k & 1 == 1 {
                    negative = !negative;
                    if lo[k] == 0 {
                        skip = true;
                        break;
                    }
                    lo[k]
                } else {
                    hi[k] + 1
                };
                idx += c * stride;
                stride *= ext;
            }
            if skip {
                continue;
            }
            if negative {
                total -= self.table[idx];
            } else {
                total += self.table[idx];
            }
        }
        total
    }

    pub(crate) fn full(&self) -> f64 {
        *self.table.last().unwrap()
    }
}

/// Subset of a sample's cube to sum over.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Full,
    /// Axis-aligned box `lo..=hi` in lattice coordinates.
    Box { lo: Vec<i64>, hi: Vec<i64> },
    /// Explicit sites; repeats are counted once.
    Sites(Vec<Vec<i64>>),
}

/// `S(U) = sum_{j in U} X_j`.
pub fn partial_sum(sample: &FieldSample, region: &Region) -> Result<f64> {
    let cube = sample.cube;
    match region {
        Region::Full => Ok(sample.values.iter().sum()),
        Region::Box { lo, hi } => {
            if !cube.contains(lo) || !cube.contains(hi) || lo.iter().zip(hi).any(|(a, b)| a > b) {
                return Err(Error::Shape(format!(
                    "box {lo:?}..={hi:?} is not inside the cube of half-width {}",
                    cube.n
                )));
            }
            Ok((0..cube.len())
                .filter(|&i| {
                    let c = cube.coords_of(i);
                    c.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| a <= x && x <= b)
                })
                .map(|i| sample.values[i])
                .sum())
        }
        Region::Sites(sites) => {
            let mut seen = HashSet::new();
            let mut total = 0.0;
            for s in sites {
                let i = cube.index_of(s).ok_or_else(|| {
                    Error::Shape(format!("site {s:?} outside cube of half-width {}", cube.n))
                })?;
                if seen.insert(i) {
                    total += sample.values[i];
                }
            }
            Ok(total)
        }
    }
}

/// Block-average variance estimator
///
/// `C(U) = |U|^-1 sum_{j in U} |Q_j| (S(Q_j)/|Q_j| - S(U)/|U|)^2`
///
/// with `Q_j = U ∩ {t : |t - j|_inf <= b}`. Blocks at the boundary are
/// truncated, never padded or wrapped.
///
/// The estimator is invariant under adding a constant to the field, so the
/// values are shifted by the first one before summing; a constant field
/// then gives exactly zero.
pub fn variance_estimator(sample: &FieldSample, config: &EstimatorConfig) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Shape("empty sample".into()));
    }
    let b = config.bandwidth(sample.cube.n)?;
    Ok(chat_with_bandwidth(sample, b))
}

pub(crate) fn chat_with_bandwidth(sample: &FieldSample, b: usize) -> f64 {
    let cube = sample.cube;
    let shift = sample.values[0];
    let sums = BoxSums::new(cube, sample.values.iter().map(|v| v - shift));
    let size = cube.len() as f64;
    let global = sums.full() / size;
    let side = cube.side();
    let d = cube.d;

    let mut acc = 0.0;
    let mut pos = [0usize; MAX_DIM];
    let mut lo = [0usize; MAX_DIM];
    let mut hi = [0usize; MAX_DIM];
    for _ in 0..cube.len() {
        let mut count = 1usize;
        for k in 0..d {
            lo[k] = pos[k].saturating_sub(b);
            hi[k] = (pos[k] + b).min(side - 1);
            count *= hi[k] - lo[k] + 1;
        }
        let q = count as f64;
        let dev = sums.sum(&lo, &hi) / q - global;
        acc += q * dev * dev;
        // advance the row-major odometer, last axis fastest
        for k in (0..d).rev() {
            pos[k] += 1;
            if pos[k] < side {
                break;
            }
            pos[k] = 0;
        }
    }
    acc / size
}
