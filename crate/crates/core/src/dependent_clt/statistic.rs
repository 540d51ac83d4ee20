use serde::Serialize;

use super::estimator::{chat_with_bandwidth, EstimatorConfig};
use crate::cv_ntcp::{normal_quantile, normal_sf};
use crate::error::{Error, Result};
use crate::lattice_fields::FieldSample;

/// Which variance normalizes `S(U) - |U| mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Normalization {
    /// Known long-run variance `sigma^2`.
    TrueSigma { sigma2: f64 },
    /// Data-driven estimate `C(U)`.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    TrueSigma,
    Estimated,
}

impl NormalizationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TrueSigma => "true_sigma",
            Self::Estimated => "estimated",
        }
    }
}

/// `(S(U) - |U| mean) / sqrt(variance |U|)` with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedStatistic {
    pub value: f64,
    pub normalization: NormalizationKind,
    pub sum: f64,
    pub mean: f64,
    pub variance: f64,
    pub cube_size: usize,
}

/// Symmetric normal-theory interval for `E X_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Sum, size and variance estimate of one sample; everything the
/// statistics below need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary {
    pub sum: f64,
    pub cube_size: usize,
    pub bandwidth: usize,
    pub chat: f64,
}

impl SampleSummary {
    pub fn new(sample: &FieldSample, config: &EstimatorConfig) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::Shape("empty sample".into()));
        }
        let bandwidth = config.bandwidth(sample.cube.n)?;
        Ok(Self {
            sum: sample.values.iter().sum(),
            cube_size: sample.len(),
            bandwidth,
            chat: chat_with_bandwidth(sample, bandwidth),
        })
    }

    fn require_chat(&self) -> Result<f64> {
        if self.chat <= 0.0 {
            return Err(Error::Degenerate(
                "variance estimate is zero (constant field); normalization undefined".into(),
            ));
        }
        Ok(self.chat)
    }

    pub fn statistic(&self, mean: f64, mode: Normalization) -> Result<NormalizedStatistic> {
        let (variance, normalization) = match mode {
            Normalization::TrueSigma { sigma2 } => {
                if !(sigma2 > 0.0) {
                    return Err(Error::Degenerate(format!(
                        "sigma^2 = {sigma2} cannot normalize"
                    )));
                }
                (sigma2, NormalizationKind::TrueSigma)
            }
            Normalization::Estimated => (self.require_chat()?, NormalizationKind::Estimated),
        };
        let size = self.cube_size as f64;
        Ok(NormalizedStatistic {
            value: (self.sum - size * mean) / (variance * size).sqrt(),
            normalization,
            sum: self.sum,
            mean,
            variance,
            cube_size: self.cube_size,
        })
    }

    /// `S/|U| +- z_{(1+level)/2} sqrt(variance / |U|)`.
    pub fn interval_with_variance(&self, level: f64, variance: f64) -> Result<ConfidenceInterval> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Domain(format!("confidence level must lie in (0, 1), got {level}")));
        }
        let size = self.cube_size as f64;
        let z = normal_quantile(0.5 * (1.0 + level))?;
        let centre = self.sum / size;
        let half = z * (variance / size).sqrt();
        Ok(ConfidenceInterval {
            lo: centre - half,
            hi: centre + half,
            level,
        })
    }

    pub fn interval(&self, level: f64) -> Result<ConfidenceInterval> {
        let chat = self.require_chat()?;
        self.interval_with_variance(level, chat)
    }

    /// `1 - Phi(xi)`, `xi = (x - |U| mean) / sqrt(C |U|)`.
    pub fn ntcp(&self, x: f64, mean: f64) -> Result<f64> {
        let chat = self.require_chat()?;
        let size = self.cube_size as f64;
        Ok(normal_sf((x - size * mean) / (chat * size).sqrt()))
    }
}

/// Self-normalized (or `sigma`-normalized) centred sum of a sample.
pub fn self_normalized_statistic(
    sample: &FieldSample,
    mean: f64,
    config: &EstimatorConfig,
    mode: Normalization,
) -> Result<NormalizedStatistic> {
    SampleSummary::new(sample, config)?.statistic(mean, mode)
}

/// Approximate confidence interval for `E X_0` from one sample.
pub fn confidence_interval(
    sample: &FieldSample,
    level: f64,
    config: &EstimatorConfig,
) -> Result<ConfidenceInterval> {
    SampleSummary::new(sample, config)?.interval(level)
}

/// Estimate of `P(S(U) >= x)` with the variance replaced by `C(U)`.
///
/// The result depends on the sample through `C(U)` and is itself random.
pub fn ntcp_estimate(
    sample: &FieldSample,
    x: f64,
    mean: f64,
    config: &EstimatorConfig,
) -> Result<f64> {
    SampleSummary::new(sample, config)?.ntcp(x, mean)
}
