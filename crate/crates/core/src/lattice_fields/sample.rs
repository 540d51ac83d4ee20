use serde::{Deserialize, Serialize};

use super::cube::LatticeCube;
use super::model::FieldModel;
use super::rng::{mix64, to_unit};
use crate::error::{Error, Result};

/// Default cap on noise sites generated for one sample.
pub const DEFAULT_MAX_CELLS: usize = 1 << 26;

/// A realized field over an integer cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub cube: LatticeCube,
    /// Row-major over the cube, each in `[0, 1]`.
    pub values: Vec<f64>,
    pub model: FieldModel,
    pub seed: u64,
}

impl FieldSample {
    /// Builds a sample from raw values, checking length and range.
    pub fn from_values(cube: LatticeCube, values: Vec<f64>, model: FieldModel, seed: u64) -> Result<Self> {
        if values.len() != cube.len() {
            return Err(Error::Shape(format!(
                "cube has {} sites, got {} values",
                cube.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Format(format!("field value {v} outside [0, 1]")));
        }
        Ok(Self { cube, values, model, seed })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_at(&self, coords: &[i64]) -> Option<f64> {
        self.cube.index_of(coords).map(|i| self.values[i])
    }

    /// The same realization restricted to a smaller centred cube.
    pub fn restrict(&self, n: usize) -> Result<FieldSample> {
        if n > self.cube.n {
            return Err(Error::Shape(format!(
                "cannot restrict half-width {} to {n}",
                self.cube.n
            )));
        }
        let inner = LatticeCube::new(self.cube.d, n)?;
        let values = (0..inner.len())
            .map(|i| self.values[self.cube.index_of(&inner.coords_of(i)).unwrap()])
            .collect();
        Ok(FieldSample {
            cube: inner,
            values,
            model: self.model,
            seed: self.seed,
        })
    }
}

/// Sliding sum of `width` consecutive entries along `axis`, shrinking that
/// axis by `width - 1`.
fn box_sum(data: &[u32], shape: &[usize], axis: usize, width: usize) -> (Vec<u32>, Vec<usize>) {
    let len = shape[axis];
    let out_len = len + 1 - width;
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![0u32; outer * out_len * inner];
    for o in 0..outer {
        let src = &data[o * len * inner..(o + 1) * len * inner];
        let dst = &mut out[o * out_len * inner..(o + 1) * out_len * inner];
        for i in 0..inner {
            let mut acc: u32 = (0..width).map(|t| src[t * inner + i]).sum();
            dst[i] = acc;
            for k in 1..out_len {
                acc = acc + src[(k + width - 1) * inner + i] - src[(k - 1) * inner + i];
                dst[k * inner + i] = acc;
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = out_len;
    (out, new_shape)
}

/// Bernoulli noise over `[-h, h]^d` with the site-addressed generator.
fn noise_grid(d: usize, h: usize, seed: u64, theta: f64) -> Vec<u32> {
    let side = 2 * h + 1;
    let mut out = Vec::with_capacity(side.pow(d as u32));
    let key = mix64(seed);
    let coord_hash = |c: usize| mix64((c as i64 - h as i64) as u64);
    let hit = |hk: u64| u32::from(to_unit(hk) < theta);
    match d {
        1 => {
            for a in 0..side {
                out.push(hit(mix64(key ^ coord_hash(a))));
            }
        }
        2 => {
            for a in 0..side {
                let ka = mix64(key ^ coord_hash(a));
                for b in 0..side {
                    out.push(hit(mix64(ka ^ coord_hash(b))));
                }
            }
        }
        3 => {
            for a in 0..side {
                let ka = mix64(key ^ coord_hash(a));
                for b in 0..side {
                    let kb = mix64(ka ^ coord_hash(b));
                    for c in 0..side {
                        out.push(hit(mix64(kb ^ coord_hash(c))));
                    }
                }
            }
        }
        _ => unreachable!("dimension validated"),
    }
    out
}

/// Draws a field sample, capping the noise grid at [`DEFAULT_MAX_CELLS`].
pub fn sample_field(model: &FieldModel, cube: LatticeCube, seed: u64) -> Result<FieldSample> {
    sample_field_capped(model, cube, seed, DEFAULT_MAX_CELLS)
}

/// Draws a field sample, failing if more than `max_cells` noise sites would
/// be generated.
///
/// Noise covers the enlarged cube `[-n - r, n + r]^d` so every output site
/// sees its full window. The noise at a site depends only on `(seed, site)`,
/// so samples on nested cubes agree where they overlap.
pub fn sample_field_capped(
    model: &FieldModel,
    cube: LatticeCube,
    seed: u64,
    max_cells: usize,
) -> Result<FieldSample> {
    model.validate()?;
    if cube.d != model.dim {
        return Err(Error::Shape(format!(
            "cube is {}-dimensional, model is {}-dimensional",
            cube.d, model.dim
        )));
    }
    let r = model.radius();
    let h = cube.n + r;
    let cells = (2 * h + 1)
        .checked_pow(cube.d as u32)
        .filter(|&c| c <= max_cells)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "noise grid of half-width {h} in {} dimensions exceeds {max_cells} cells",
                cube.d
            ))
        })?;
    debug_assert!(cells > 0);

    let mut sums = noise_grid(cube.d, h, seed, model.noise_probability());
    if r > 0 {
        let mut shape = vec![2 * h + 1; cube.d];
        for axis in 0..cube.d {
            let (next, next_shape) = box_sum(&sums, &shape, axis, 2 * r + 1);
            sums = next;
            shape = next_shape;
        }
    }
    let table = model.response_table();
    let values = sums.into_iter().map(|s| table[s as usize]).collect();
    Ok(FieldSample {
        cube,
        values,
        model: *model,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice_fields::model::FieldKind;
    use crate::lattice_fields::moments::{covariance_at_lag, model_mean};
    use crate::lattice_fields::rng::site_uniform;

    #[test]
    fn deterministic() {
        let m = FieldModel::new(2, FieldKind::MovingWindowLevels { radius: 1, theta: 0.4, levels: 5 }).unwrap();
        let cube = LatticeCube::new(2, 10).unwrap();
        let a = sample_field(&m, cube, 5).unwrap();
        let b = sample_field(&m, cube, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, sample_field(&m, cube, 6).unwrap().values);
    }

    #[test]
    fn matches_site_addressed_definition() {
        // direct evaluation of the window rule from per-site noise
        let m = FieldModel::new(2, FieldKind::MovingWindowThreshold { radius: 1, theta: 0.5, k_min: 5 }).unwrap();
        let cube = LatticeCube::new(2, 4).unwrap();
        let s = sample_field(&m, cube, 11).unwrap();
        for i in 0..cube.len() {
            let c = cube.coords_of(i);
            let mut hits = 0;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    hits += u32::from(site_uniform(11, &[c[0] + dx, c[1] + dy]) < 0.5);
                }
            }
            assert_eq!(s.values[i], m.response(hits));
        }
    }

    #[test]
    fn nested_cubes_agree() {
        for dim in 1..=3 {
            let m = FieldModel::new(dim, FieldKind::MovingWindowThreshold { radius: 1, theta: 0.3, k_min: 2 }).unwrap();
            let big = sample_field(&m, LatticeCube::new(dim, 6).unwrap(), 77).unwrap();
            let small = sample_field(&m, LatticeCube::new(dim, 3).unwrap(), 77).unwrap();
            assert_eq!(big.restrict(3).unwrap(), small);
        }
    }

    #[test]
    fn capacity_and_shape_errors() {
        let m = FieldModel::iid(3, 0.5).unwrap();
        let cube = LatticeCube::new(3, 50).unwrap();
        assert!(matches!(sample_field_capped(&m, cube, 1, 1000), Err(Error::Capacity(_))));
        assert!(matches!(
            sample_field(&m, LatticeCube::new(2, 3).unwrap(), 1),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn iid_pooled_mean() {
        let m = FieldModel::iid(2, 0.3).unwrap();
        let cube = LatticeCube::new(2, 64).unwrap();
        let mut total = 0.0;
        let mut count = 0usize;
        for seed in 0..100 {
            let s = sample_field(&m, cube, seed).unwrap();
            assert!(s.values.iter().all(|v| *v == 0.0 || *v == 1.0));
            total += s.values.iter().sum::<f64>();
            count += s.len();
        }
        let se = (0.21 / count as f64).sqrt();
        assert!((total / count as f64 - 0.3).abs() < 4.0 * se);
    }

    #[test]
    fn window_field_independent_beyond_range() {
        // m = 1: sites 3 apart share no noise
        let m = FieldModel::majority_1d(0.5).unwrap();
        let cube = LatticeCube::new(1, 2).unwrap();
        let reps = 10_000u64;
        let (mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0);
        for seed in 0..reps {
            let s = sample_field(&m, cube, seed).unwrap();
            let (x, y) = (s.values[0], s.values[3]);
            sx += x;
            sy += y;
            sxy += x * y;
        }
        let r = reps as f64;
        let cov = sxy / r - (sx / r) * (sy / r);
        // Var(XY) <= 1/16 for independent fair indicators
        assert!(cov.abs() < 4.0 * (0.0625f64 / r).sqrt(), "{cov}");
        assert_eq!(covariance_at_lag(&m, &[3]).unwrap(), 0.0);
    }

    #[test]
    fn stationary_window_means() {
        let m = FieldModel::new(1, FieldKind::MovingWindowLevels { radius: 2, theta: 0.35, levels: 5 }).unwrap();
        let mean = model_mean(&m).unwrap();
        let var = covariance_at_lag(&m, &[0]).unwrap();
        let cube = LatticeCube::new(1, 30).unwrap();
        let reps = 4000;
        // left, centre and right sub-windows of 5 sites each
        for start in [0usize, 28, 56] {
            let mut acc = 0.0;
            for seed in 0..reps {
                let s = sample_field(&m, cube, seed).unwrap();
                acc += s.values[start..start + 5].iter().sum::<f64>() / 5.0;
            }
            // sd of a 5-site average is at most sqrt(var)
            let se = var.sqrt() / (reps as f64).sqrt();
            assert!((acc / reps as f64 - mean).abs() < 4.0 * se);
        }
    }
}
