//! Exact moments of the window fields.
//!
//! Every model output is `g(sum of noise over a window)`. Two windows at lag
//! `j` share `o(j)` noise sites, so their sums are `U + V` and `U + W` with
//! `U ~ Bin(o, theta)` and `V, W ~ Bin(w - o, theta)` independent. That turns
//! the `2^(2w - o)`-term enumeration over joint noise states into a double sum
//! over binomial counts.

use std::collections::HashMap;

use serde::Serialize;

use super::model::FieldModel;
use crate::error::{Error, Result};

/// `sigma^2` below this is reported as degenerate.
pub const DEGENERATE_SIGMA2: f64 = 1e-12;

/// Probability mass function of `Bin(k, theta)` for `0..=k`.
pub fn binomial_pmf(k: usize, theta: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; k + 1];
    if theta <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if theta >= 1.0 {
        pmf[k] = 1.0;
        return pmf;
    }
    let odds = theta / (1.0 - theta);
    let mode = (((k + 1) as f64 * theta).floor() as usize).min(k);
    pmf[mode] = 1.0;
    for i in mode..k {
        pmf[i + 1] = pmf[i] * (k - i) as f64 / (i + 1) as f64 * odds;
    }
    for i in (1..=mode).rev() {
        pmf[i - 1] = pmf[i] * i as f64 / (k - i + 1) as f64 / odds;
    }
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|v| *v /= total);
    pmf
}

/// `E X_0`.
pub fn model_mean(model: &FieldModel) -> Result<f64> {
    model.validate()?;
    let g = model.response_table();
    let pmf = binomial_pmf(model.window_size(), model.noise_probability());
    Ok(pmf.iter().zip(&g).map(|(p, v)| p * v).sum())
}

/// Number of noise sites shared by the windows of two sites at `lag`.
fn window_overlap(model: &FieldModel, lag: &[i64]) -> usize {
    let edge = 2 * model.radius() + 1;
    lag.iter()
        .map(|l| edge.saturating_sub(l.unsigned_abs() as usize))
        .product()
}

/// `cov(X_0, X_j)` given the window overlap at lag `j`.
fn covariance_for_overlap(model: &FieldModel, overlap: usize, mean: f64) -> f64 {
    if overlap == 0 {
        return 0.0;
    }
    let w = model.window_size();
    let theta = model.noise_probability();
    let g = model.response_table();
    let shared = binomial_pmf(overlap, theta);
    let own = binomial_pmf(w - overlap, theta);
    let second: f64 = shared
        .iter()
        .enumerate()
        .map(|(u, pu)| {
            let inner: f64 = own.iter().enumerate().map(|(v, pv)| pv * g[u + v]).sum();
            pu * inner * inner
        })
        .sum();
    second - mean * mean
}

fn check_lag(model: &FieldModel, lag: &[i64]) -> Result<()> {
    if lag.len() != model.dim {
        return Err(Error::Shape(format!(
            "lag has {} coordinates, field is {}-dimensional",
            lag.len(),
            model.dim
        )));
    }
    Ok(())
}

/// Exact `cov(X_0, X_lag)`; zero whenever `|lag|_inf > 2 radius`.
pub fn covariance_at_lag(model: &FieldModel, lag: &[i64]) -> Result<f64> {
    model.validate()?;
    check_lag(model, lag)?;
    let mean = model_mean(model)?;
    Ok(covariance_for_overlap(model, window_overlap(model, lag), mean))
}

/// Every lag in `[-r, r]^dim`.
fn lags_within(dim: usize, r: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * r + 1) as usize;
    (0..side.pow(dim as u32)).map(move |mut idx| {
        let mut lag = vec![0i64; dim];
        for slot in lag.iter_mut().rev() {
            *slot = (idx % side) as i64 - r;
            idx /= side;
        }
        lag
    })
}

/// Covariance at every lag within the dependence range, cached by overlap.
fn covariance_table(model: &FieldModel) -> Result<Vec<(Vec<i64>, f64)>> {
    model.validate()?;
    let mean = model_mean(model)?;
    let mut by_overlap: HashMap<usize, f64> = HashMap::new();
    Ok(lags_within(model.dim, model.dependence_range() as i64)
        .map(|lag| {
            let o = window_overlap(model, &lag);
            let c = *by_overlap
                .entry(o)
                .or_insert_with(|| covariance_for_overlap(model, o, mean));
            (lag, c)
        })
        .collect())
}

/// Long-run variance of the field and its absolute counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LongRunVariance {
    /// `sigma^2 = sum_j cov(X_0, X_j)`.
    pub sigma2: f64,
    /// `v = sum_j |cov(X_0, X_j)|`.
    pub abs_sum: f64,
    /// `sigma^2` is zero up to [`DEGENERATE_SIGMA2`]; the CLT normalization
    /// is then undefined.
    pub degenerate: bool,
}

impl LongRunVariance {
    /// `sigma^2`, or a degeneracy error.
    pub fn require(&self) -> Result<f64> {
        if self.degenerate {
            return Err(Error::Degenerate(format!(
                "long-run variance sigma^2 = {:e} vanishes",
                self.sigma2
            )));
        }
        Ok(self.sigma2)
    }
}

/// `sigma^2(D)` as the finite covariance sum over `|j|_inf <= 2 radius`.
pub fn model_sigma2(model: &FieldModel) -> Result<LongRunVariance> {
    let table = covariance_table(model)?;
    let sigma2: f64 = table.iter().map(|(_, c)| c).sum();
    let abs_sum: f64 = table.iter().map(|(_, c)| c.abs()).sum();
    Ok(LongRunVariance {
        sigma2,
        abs_sum,
        degenerate: sigma2.abs() < DEGENERATE_SIGMA2,
    })
}

/// Exact `Var S(U_n) / |U_n|`, counting the pairs of sites in the cube at
/// each lag.
pub fn exact_variance_ratio(model: &FieldModel, n: usize) -> Result<f64> {
    let side = (2 * n + 1) as i64;
    let size = side.pow(model.dim as u32) as f64;
    let total: f64 = covariance_table(model)?
        .iter()
        .map(|(lag, c)| {
            let pairs: i64 = lag.iter().map(|l| (side - l.abs()).max(0)).product();
            pairs as f64 * c
        })
        .sum();
    Ok(total / size)
}
