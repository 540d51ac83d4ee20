use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, MeanSource};
use super::ks::{fit_rate, ks_distance, RateFit};
use crate::dependent_clt::{Normalization, NormalizationKind, SampleSummary};
use crate::error::{Error, Result};
use crate::lattice_fields::rng::derive_seed;
use crate::lattice_fields::{model_mean, model_sigma2, sample_field, LatticeCube};

/// Seed of replicate `idx` on the cube of half-width `n`.
pub fn replicate_seed(master: u64, n: usize, idx: usize) -> u64 {
    derive_seed(master, &[n as u64, idx as u64])
}

/// What one replicate contributes.
#[derive(Debug, Clone, Copy)]
struct Outcome {
    t_true: f64,
    t_est: f64,
    chat: f64,
    mean: f64,
}

struct Campaign {
    sigma2: f64,
    model_mean: f64,
    centre: f64,
}

fn prepare(config: &ExperimentConfig) -> Result<Campaign> {
    config.validate()?;
    let sigma2 = model_sigma2(&config.model)?.require()?;
    let model_mean = model_mean(&config.model)?;
    let centre = match config.mean_source {
        MeanSource::ModelOracle => model_mean,
        MeanSource::Hypothesized(v) => v,
    };
    Ok(Campaign {
        sigma2,
        model_mean,
        centre,
    })
}

/// Runs every replicate on the cube of half-width `n`, in replicate order.
fn simulate(config: &ExperimentConfig, campaign: &Campaign, n: usize) -> Result<Vec<Outcome>> {
    let cube = LatticeCube::new(config.model.dim, n)?;
    let estimator = config.estimator();
    (0..config.replicates)
        .into_par_iter()
        .map(|idx| {
            let seed = replicate_seed(config.master_seed, n, idx);
            let sample = sample_field(&config.model, cube, seed)?;
            let summary = SampleSummary::new(&sample, &estimator)?;
            let t_true = summary
                .statistic(campaign.centre, Normalization::TrueSigma { sigma2: campaign.sigma2 })?
                .value;
            let t_est = summary
                .statistic(campaign.centre, Normalization::Estimated)
                .map_err(|e| match e {
                    Error::Degenerate(msg) => Error::Degenerate(format!(
                        "replicate {idx} at n = {n} (seed {seed:#018x}): {msg}"
                    )),
                    other => other,
                })?
                .value;
            Ok(Outcome {
                t_true,
                t_est,
                chat: summary.chat,
                mean: summary.sum / summary.cube_size as f64,
            })
        })
        .collect()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    (mean, var.sqrt())
}

fn coverage(outcomes: &[Outcome], z: f64, variance: impl Fn(&Outcome) -> f64, size: f64, target: f64) -> f64 {
    let hits = outcomes
        .iter()
        .filter(|o| (o.mean - target).abs() <= z * (variance(o) / size).sqrt())
        .count();
    hits as f64 / outcomes.len() as f64
}

/// One line of the campaign table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub cube_size: usize,
    pub mode: NormalizationKind,
    pub ks: f64,
    pub chat_mean: f64,
    pub chat_sd: f64,
    pub sigma2: f64,
    pub level: Option<f64>,
    /// Fraction of intervals containing the model mean.
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeFit {
    pub mode: NormalizationKind,
    pub fit: RateFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub sigma2: f64,
    pub model_mean: f64,
    /// Value the statistics were centred on.
    pub centre: f64,
    pub rows: Vec<ReportRow>,
    /// Empty when the schedule has a single `n`.
    pub rate_fits: Vec<ModeFit>,
}

impl ExperimentReport {
    /// KS distances of one mode in schedule order.
    pub fn ks_series(&self, mode: NormalizationKind) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for row in self.rows.iter().filter(|r| r.mode == mode) {
            if out.last().map(|l| l.0) != Some(row.n) {
                out.push((row.n, row.ks));
            }
        }
        out
    }
}

/// Runs the full campaign: both normalizations, KS distances, `C` summaries
/// and interval coverage for every `n` and level.
///
/// Aborts with [`Error::Degenerate`] if the model's `sigma^2` vanishes or any
/// replicate has `C = 0`.
pub fn run_clt_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let campaign = prepare(config)?;
    let zs = config
        .levels
        .iter()
        .map(|&l| crate::cv_ntcp::normal_quantile(0.5 * (1.0 + l)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &n in &config.n_schedule {
        let outcomes = simulate(config, &campaign, n)?;
        let size = LatticeCube::new(config.model.dim, n)?.len();
        let chats: Vec<f64> = outcomes.iter().map(|o| o.chat).collect();
        let (chat_mean, chat_sd) = mean_sd(&chats);
        for mode in [NormalizationKind::TrueSigma, NormalizationKind::Estimated] {
            let stats: Vec<f64> = outcomes
                .iter()
                .map(|o| match mode {
                    NormalizationKind::TrueSigma => o.t_true,
                    NormalizationKind::Estimated => o.t_est,
                })
                .collect();
            let ks = ks_distance(&stats)?;
            let base = ReportRow {
                n,
                cube_size: size,
                mode,
                ks,
                chat_mean,
                chat_sd,
                sigma2: campaign.sigma2,
                level: None,
                coverage: None,
            };
            if config.levels.is_empty() {
                rows.push(base);
            }
            for (&level, &z) in config.levels.iter().zip(&zs) {
                let cov = match mode {
                    NormalizationKind::TrueSigma => {
                        coverage(&outcomes, z, |_| campaign.sigma2, size as f64, campaign.model_mean)
                    }
                    NormalizationKind::Estimated => {
                        coverage(&outcomes, z, |o| o.chat, size as f64, campaign.model_mean)
                    }
                };
                rows.push(ReportRow {
                    level: Some(level),
                    coverage: Some(cov),
                    ..base
                });
            }
        }
    }
    let mut report = ExperimentReport {
        config: config.clone(),
        sigma2: campaign.sigma2,
        model_mean: campaign.model_mean,
        centre: campaign.centre,
        rows,
        rate_fits: Vec::new(),
    };
    if config.n_schedule.len() >= 2 {
        for mode in [NormalizationKind::TrueSigma, NormalizationKind::Estimated] {
            let fit = fit_rate(&report.ks_series(mode), config.model.dim)?;
            report.rate_fits.push(ModeFit { mode, fit });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub bandwidth: usize,
    pub chat_mean: f64,
    pub chat_sd: f64,
    /// Median of `|C - sigma^2|` over replicates.
    pub median_abs_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub sigma2: f64,
    pub rows: Vec<ConsistencyRow>,
    /// Consecutive pairs where the median deviation went down.
    pub decreasing_steps: usize,
    pub steps: usize,
}

/// Tracks `C(U_n)` against the exact `sigma^2` along the schedule.
pub fn estimator_consistency(config: &ExperimentConfig) -> Result<ConsistencyReport> {
    let campaign = prepare(config)?;
    let estimator = config.estimator();
    let mut rows = Vec::with_capacity(config.n_schedule.len());
    for &n in &config.n_schedule {
        let outcomes = simulate(config, &campaign, n)?;
        let chats: Vec<f64> = outcomes.iter().map(|o| o.chat).collect();
        let (chat_mean, chat_sd) = mean_sd(&chats);
        let mut dev: Vec<f64> = chats.iter().map(|c| (c - campaign.sigma2).abs()).collect();
        dev.sort_by(f64::total_cmp);
        let k = dev.len();
        let median_abs_dev = if k % 2 == 1 {
            dev[k / 2]
        } else {
            0.5 * (dev[k / 2 - 1] + dev[k / 2])
        };
        rows.push(ConsistencyRow {
            n,
            bandwidth: estimator.bandwidth(n)?,
            chat_mean,
            chat_sd,
            median_abs_dev,
        });
    }
    let decreasing_steps = rows
        .windows(2)
        .filter(|w| w[1].median_abs_dev < w[0].median_abs_dev)
        .count();
    Ok(ConsistencyReport {
        sigma2: campaign.sigma2,
        steps: rows.len().saturating_sub(1),
        rows,
        decreasing_steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageRow {
    pub n: usize,
    pub level: f64,
    pub coverage: f64,
    pub replicates: usize,
}

/// Empirical coverage of the `C`-based interval for every `(n, level)`.
///
/// Needs the true mean, so the config must use [`MeanSource::ModelOracle`].
pub fn coverage_study(config: &ExperimentConfig) -> Result<Vec<CoverageRow>> {
    if config.mean_source != MeanSource::ModelOracle {
        return Err(Error::Config(
            "coverage study needs mean_source = \"model_oracle\"".into(),
        ));
    }
    if config.levels.is_empty() {
        return Err(Error::Config("coverage study needs at least one level".into()));
    }
    let report = run_clt_experiment(config)?;
    Ok(report
        .rows
        .iter()
        .filter(|r| r.mode == NormalizationKind::Estimated)
        .map(|r| CoverageRow {
            n: r.n,
            level: r.level.expect("levels present"),
            coverage: r.coverage.expect("levels present"),
            replicates: config.replicates,
        })
        .collect())
}
