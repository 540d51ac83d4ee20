use serde::{Deserialize, Serialize};

use super::cube::MAX_DIM;
use crate::dose_response::{CellPopulation, DoseResponseModel};
use crate::error::{Error, Result};

/// Default number of output levels for [`FieldKind::MovingWindowLevels`].
pub const DEFAULT_LEVELS: u32 = 5;

/// Site law of a stationary field built from iid Bernoulli noise.
///
/// Every variant is a fixed function of the noise sum over the sup-norm
/// window of radius `radius` around the site, so sites farther apart than
/// `2 * radius` are independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FieldKind {
    /// Independent FSUs killed with probability `p`.
    IidBernoulli { p: f64 },
    /// `X_j = 1` when at least `k_min` noise sites in the window are hit.
    MovingWindowThreshold { radius: u32, theta: f64, k_min: u32 },
    /// `X_j` is the window hit fraction rounded to one of `levels` equally
    /// spaced values in `[0, 1]`.
    MovingWindowLevels {
        radius: u32,
        theta: f64,
        #[serde(default = "default_levels")]
        levels: u32,
    },
}

fn default_levels() -> u32 {
    DEFAULT_LEVELS
}

/// A strictly stationary random field of FSU states on `Z^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldModel {
    pub dim: usize,
    pub kind: FieldKind,
}

impl FieldModel {
    pub fn new(dim: usize, kind: FieldKind) -> Result<Self> {
        let model = Self { dim, kind };
        model.validate()?;
        Ok(model)
    }

    pub fn iid(dim: usize, p: f64) -> Result<Self> {
        Self::new(dim, FieldKind::IidBernoulli { p })
    }

    /// Majority-of-window rule in one dimension: `radius = 1`, `k_min = 2`.
    pub fn majority_1d(theta: f64) -> Result<Self> {
        Self::new(
            1,
            FieldKind::MovingWindowThreshold {
                radius: 1,
                theta,
                k_min: 2,
            },
        )
    }

    /// Iid field with `p = p(D)` from a dose-response model.
    pub fn iid_at_dose(
        dim: usize,
        response: &DoseResponseModel,
        cells: CellPopulation,
        dose: f64,
    ) -> Result<Self> {
        Self::iid(dim, response.fsu_kill_probability(cells, dose)?)
    }

    /// Window-threshold field whose per-site noise is an FSU kill at dose `D`.
    pub fn threshold_at_dose(
        dim: usize,
        radius: u32,
        k_min: u32,
        response: &DoseResponseModel,
        cells: CellPopulation,
        dose: f64,
    ) -> Result<Self> {
        let theta = response.fsu_kill_probability(cells, dose)?;
        Self::new(dim, FieldKind::MovingWindowThreshold { radius, theta, k_min })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::Parameter(format!(
                "field dimension must be 1..={MAX_DIM}, got {}",
                self.dim
            )));
        }
        let prob = self.noise_probability();
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::Parameter(format!("noise probability {prob} outside [0, 1]")));
        }
        match self.kind {
            FieldKind::MovingWindowThreshold { k_min, .. } if k_min as usize > self.window_size() => {
                Err(Error::Parameter(format!(
                    "k_min = {k_min} exceeds window size {}",
                    self.window_size()
                )))
            }
            FieldKind::MovingWindowLevels { levels, .. } if levels < 2 => {
                Err(Error::Parameter(format!("need at least 2 levels, got {levels}")))
            }
            _ => Ok(()),
        }
    }

    pub fn radius(&self) -> usize {
        match self.kind {
            FieldKind::IidBernoulli { .. } => 0,
            FieldKind::MovingWindowThreshold { radius, .. }
            | FieldKind::MovingWindowLevels { radius, .. } => radius as usize,
        }
    }

    /// Success probability of each noise site.
    pub fn noise_probability(&self) -> f64 {
        match self.kind {
            FieldKind::IidBernoulli { p } => p,
            FieldKind::MovingWindowThreshold { theta, .. }
            | FieldKind::MovingWindowLevels { theta, .. } => theta,
        }
    }

    /// Number of noise sites feeding one output site, `(2 radius + 1)^dim`.
    pub fn window_size(&self) -> usize {
        (2 * self.radius() + 1).pow(self.dim as u32)
    }

    /// Sites at sup-norm distance greater than this are independent.
    pub fn dependence_range(&self) -> usize {
        2 * self.radius()
    }

    pub fn is_binary(&self) -> bool {
        !matches!(self.kind, FieldKind::MovingWindowLevels { .. })
    }

    /// Output value as a function of the window noise sum.
    #[inline]
    pub fn response(&self, window_sum: u32) -> f64 {
        match self.kind {
            FieldKind::IidBernoulli { .. } => f64::from(window_sum),
            FieldKind::MovingWindowThreshold { k_min, .. } => {
                if window_sum >= k_min {
                    1.0
                } else {
                    0.0
                }
            }
            FieldKind::MovingWindowLevels { levels, .. } => {
                let steps = f64::from(levels - 1);
                (f64::from(window_sum) / self.window_size() as f64 * steps).round() / steps
            }
        }
    }

    /// Output value for every possible window sum `0..=window_size`.
    pub fn response_table(&self) -> Vec<f64> {
        (0..=self.window_size() as u32).map(|s| self.response(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(FieldModel::iid(2, 1.2).is_err());
        assert!(FieldModel::iid(4, 0.2).is_err());
        let bad = FieldKind::MovingWindowThreshold { radius: 1, theta: 0.5, k_min: 4 };
        assert!(FieldModel::new(1, bad).is_err());
        assert!(FieldModel::new(2, bad).is_ok());
        let bad = FieldKind::MovingWindowLevels { radius: 1, theta: 0.5, levels: 1 };
        assert!(FieldModel::new(1, bad).is_err());
    }

    #[test]
    fn levels_quantize_window_mean() {
        let m = FieldModel::new(1, FieldKind::MovingWindowLevels { radius: 2, theta: 0.5, levels: 5 }).unwrap();
        let table = m.response_table();
        // window of 5: means 0, .2, .4, .6, .8, 1 on a quarter grid
        assert_eq!(table, vec![0.0, 0.25, 0.5, 0.5, 0.75, 1.0]);
        assert!(!m.is_binary());
    }

    #[test]
    fn serde_shape() {
        let m = FieldModel::majority_1d(0.5).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(
            json,
            r#"{"dim":1,"kind":{"type":"moving_window_threshold","radius":1,"theta":0.5,"k_min":2}}"#
        );
        let back: FieldModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn dose_linkage() {
        let response = DoseResponseModel::SingleHit { alpha: 1.0 };
        let cells = CellPopulation::new(1).unwrap();
        let m = FieldModel::iid_at_dose(2, &response, cells, std::f64::consts::LN_2).unwrap();
        assert!((m.noise_probability() - 0.5).abs() < 1e-15);
    }
}
