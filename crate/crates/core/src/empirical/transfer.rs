//! Transfer factors `1 / max_j lambda_{j,i}` and the analyses built on them.
//!
//! A provider's strong fit depends only on its own scores and the user set,
//! so each provider is fitted once and every subset reuses those fits.

use serde::{Deserialize, Serialize};

use super::{fit_strong_provider, FitOptions, OpinionDataset, StrongProviderFit};
use crate::error::{Error, Result};
use crate::game::DEFAULT_ENUMERATION_CAP;

/// Lower clamp on `lambda*` before inversion.
pub const TRANSFER_FLOOR: f64 = 1e-12;

pub fn transfer_factor(lambda_star: f64) -> f64 {
    1.0 / lambda_star.max(TRANSFER_FLOOR)
}

/// `lambda*_i = max_{j in subset} table[j][i]`.
pub fn lambda_star(table: &[Vec<f64>], subset: &[usize]) -> Vec<f64> {
    let n = table.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| subset.iter().map(|&j| table[j][i]).fold(0.0, f64::max))
        .collect()
}

/// Strong fits of several providers over a common user set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongFit {
    pub users: Vec<usize>,
    pub fits: Vec<StrongProviderFit>,
    pub lambda_star: Vec<f64>,
    pub transfer: Vec<f64>,
}

impl StrongFit {
    /// `lambdas[j][i]` in fit order.
    pub fn lambda_table(&self) -> Vec<Vec<f64>> {
        self.fits.iter().map(|f| f.lambdas.clone()).collect()
    }

    /// Worst-user transfer over the fits at positions `subset`.
    pub fn worst_transfer(&self, subset: &[usize]) -> f64 {
        lambda_star(&self.lambda_table(), subset)
            .into_iter()
            .map(transfer_factor)
            .fold(0.0, f64::max)
    }

    /// Mean over providers of the CV test error, or the in-sample error when
    /// cross-validation was skipped.
    pub fn epsilon_proxy_rmse(&self) -> f64 {
        let n = self.fits.len() as f64;
        self.fits
            .iter()
            .map(|f| f.cv.map_or(f.in_sample_rmse, |c| c.mean_test_rmse))
            .sum::<f64>()
            / n
    }
}

pub fn fit_strong(
    ds: &OpinionDataset,
    providers: &[usize],
    users: &[usize],
    opts: &FitOptions,
) -> Result<StrongFit> {
    if providers.is_empty() {
        return Err(Error::InsufficientData("empty provider set".into()));
    }
    let fits = providers
        .iter()
        .map(|&j| fit_strong_provider(ds, j, users, opts))
        .collect::<Result<Vec<_>>>()?;
    let table: Vec<Vec<f64>> = fits.iter().map(|f| f.lambdas.clone()).collect();
    let all: Vec<usize> = (0..fits.len()).collect();
    let lambda_star = lambda_star(&table, &all);
    Ok(StrongFit {
        users: users.to_vec(),
        transfer: lambda_star.iter().map(|&l| transfer_factor(l)).collect(),
        lambda_star,
        fits,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferPoint {
    pub k: usize,
    pub mean_transfer: f64,
    pub worst_transfer: f64,
    pub epsilon_proxy_rmse: f64,
}

/// For each `k`, transfer over the first `k` listed providers.
pub fn transfer_curve(
    ds: &OpinionDataset,
    providers: &[usize],
    users: &[usize],
    ks: &[usize],
    opts: &FitOptions,
) -> Result<(StrongFit, Vec<TransferPoint>)> {
    if let Some(k) = ks.iter().find(|&&k| k == 0 || k > providers.len()) {
        return Err(Error::ParameterViolation(format!(
            "K = {k} outside 1..={}",
            providers.len()
        )));
    }
    let fit = fit_strong(ds, providers, users, opts)?;
    let table = fit.lambda_table();
    let points = ks
        .iter()
        .map(|&k| {
            let subset: Vec<usize> = (0..k).collect();
            let t: Vec<f64> = lambda_star(&table, &subset)
                .into_iter()
                .map(transfer_factor)
                .collect();
            let eps = fit.fits[..k]
                .iter()
                .map(|f| f.cv.map_or(f.in_sample_rmse, |c| c.mean_test_rmse))
                .sum::<f64>()
                / k as f64;
            TransferPoint {
                k,
                mean_transfer: t.iter().sum::<f64>() / t.len() as f64,
                worst_transfer: t.iter().copied().fold(0.0, f64::max),
                epsilon_proxy_rmse: eps,
            }
        })
        .collect();
    Ok((fit, points))
}

/// Worst-user transfer aggregated over every subset of one size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetPoint {
    pub size: usize,
    pub subsets: usize,
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
    /// Provider indices (dataset order) of the best subset.
    pub best_subset: Vec<usize>,
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// Every subset of each size in `sizes`, drawn from `providers`.
pub fn subset_analysis(
    ds: &OpinionDataset,
    providers: &[usize],
    users: &[usize],
    sizes: &[usize],
    opts: &FitOptions,
) -> Result<(StrongFit, Vec<SubsetPoint>)> {
    let k = providers.len();
    for &s in sizes {
        if s == 0 || s > k {
            return Err(Error::ParameterViolation(format!(
                "|T| = {s} outside 1..={k}"
            )));
        }
        let count = binomial(k, s);
        if count > DEFAULT_ENUMERATION_CAP {
            return Err(Error::SearchSpaceTooLarge {
                count,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
    }
    let fit = fit_strong(ds, providers, users, opts)?;
    let points = sizes
        .iter()
        .map(|&s| {
            let mut best = (f64::INFINITY, Vec::new());
            let (mut sum, mut worst, mut n) = (0.0, 0.0f64, 0usize);
            for subset in itertools::Itertools::combinations(0..k, s) {
                let t = fit.worst_transfer(&subset);
                if t < best.0 {
                    best = (t, subset.iter().map(|&p| providers[p]).collect());
                }
                worst = worst.max(t);
                sum += t;
                n += 1;
            }
            SubsetPoint {
                size: s,
                subsets: n,
                best: best.0,
                // keep best <= mean <= worst despite rounding in the sum
                mean: (sum / n as f64).clamp(best.0, worst),
                worst,
                best_subset: best.1,
            }
        })
        .collect();
    Ok((fit, points))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub n: usize,
    pub epsilon_proxy_rmse: f64,
    pub mean_in_sample_rmse: f64,
    pub mean_transfer: f64,
    pub worst_transfer: f64,
    pub fit: StrongFit,
}

/// For each `n`, strong fits over the first `n` listed users.
pub fn user_count_tradeoff(
    ds: &OpinionDataset,
    providers: &[usize],
    users: &[usize],
    counts: &[usize],
    opts: &FitOptions,
) -> Result<Vec<TradeoffPoint>> {
    if let Some(n) = counts.iter().find(|&&n| n == 0 || n > users.len()) {
        return Err(Error::InsufficientData(format!(
            "{n} users requested, {} available",
            users.len()
        )));
    }
    counts
        .iter()
        .map(|&n| {
            let fit = fit_strong(ds, providers, &users[..n], opts)?;
            let k = fit.fits.len() as f64;
            Ok(TradeoffPoint {
                n,
                epsilon_proxy_rmse: fit.epsilon_proxy_rmse(),
                mean_in_sample_rmse: fit.fits.iter().map(|f| f.in_sample_rmse).sum::<f64>() / k,
                mean_transfer: fit.transfer.iter().sum::<f64>() / n as f64,
                worst_transfer: fit.transfer.iter().copied().fold(0.0, f64::max),
                fit,
            })
        })
        .collect()
}
