//! Per-user fits `p_i(a|y) ~ sum_j w_j v_j(a, y) + c`.

use serde::{Deserialize, Serialize};

use super::{cross_validate, score_table, CvSummary, Design, FitOptions, FoldFit, OpinionDataset};
use crate::error::{Error, Result};
use crate::nnls::nnls_solve;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakUserFit {
    pub user: usize,
    pub group: String,
    pub providers: Vec<usize>,
    /// In-sample fit on every question, aligned with `providers`.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub in_sample_rmse: f64,
    pub degenerate: bool,
    pub folds: Vec<FoldFit>,
    pub cv: Option<CvSummary>,
}

pub(crate) fn weak_design(
    scored: &[Vec<Vec<f64>>],
    target: &[Vec<f64>],
    providers: &[usize],
    questions: &[usize],
) -> Design {
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for &q in questions {
        for (a, &p) in target[q].iter().enumerate() {
            rows.push(providers.iter().map(|&j| scored[j][q][a]).collect());
            targets.push(p);
        }
    }
    Design { rows, targets }
}

pub(crate) fn check_indices(
    ds: &OpinionDataset,
    users: &[usize],
    providers: &[usize],
) -> Result<()> {
    if let Some(i) = users.iter().find(|&&i| i >= ds.n_groups()) {
        return Err(Error::DimensionMismatch(format!("no group {i}")));
    }
    if let Some(j) = providers.iter().find(|&&j| j >= ds.n_models()) {
        return Err(Error::DimensionMismatch(format!("no model {j}")));
    }
    if providers.is_empty() {
        return Err(Error::InsufficientData("empty provider set".into()));
    }
    Ok(())
}

/// Weak fit of one group against the listed models, with question-level CV.
pub fn fit_weak_user(
    ds: &OpinionDataset,
    user: usize,
    providers: &[usize],
    opts: &FitOptions,
) -> Result<WeakUserFit> {
    let scored: Vec<_> = ds
        .models
        .iter()
        .map(|m| score_table(m, opts.score))
        .collect();
    fit_weak_scored(ds, &scored, user, providers, opts)
}

fn fit_weak_scored(
    ds: &OpinionDataset,
    scored: &[Vec<Vec<f64>>],
    user: usize,
    providers: &[usize],
    opts: &FitOptions,
) -> Result<WeakUserFit> {
    check_indices(ds, &[user], providers)?;
    let target = &ds.groups[user];
    let folds = cross_validate(&ds.questions, opts, |qs, _| {
        Ok(weak_design(scored, target, providers, qs))
    })?;
    let all: Vec<usize> = (0..ds.n_questions()).collect();
    let sol = nnls_solve(&weak_design(scored, target, providers, &all).problem()?)?;
    Ok(WeakUserFit {
        user,
        group: ds.group_labels[user].clone(),
        providers: providers.to_vec(),
        weights: sol.weights,
        intercept: sol.intercept,
        in_sample_rmse: sol.rmse,
        degenerate: sol.degenerate,
        cv: CvSummary::from_folds(&folds),
        folds,
    })
}

/// Mean weak-fit error over users when the first `k` providers are used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakCurvePoint {
    pub k: usize,
    pub mean_in_sample_rmse: f64,
    pub mean_test_rmse: Option<f64>,
    pub fits: Vec<WeakUserFit>,
}

/// Weak fits of every listed user for each prefix size in `ks`.
pub fn weak_curve(
    ds: &OpinionDataset,
    users: &[usize],
    providers: &[usize],
    ks: &[usize],
    opts: &FitOptions,
) -> Result<Vec<WeakCurvePoint>> {
    if users.is_empty() {
        return Err(Error::InsufficientData("empty user set".into()));
    }
    let scored: Vec<_> = ds
        .models
        .iter()
        .map(|m| score_table(m, opts.score))
        .collect();
    ks.iter()
        .map(|&k| {
            if k == 0 || k > providers.len() {
                return Err(Error::ParameterViolation(format!(
                    "K = {k} outside 1..={}",
                    providers.len()
                )));
            }
            let fits = users
                .iter()
                .map(|&i| fit_weak_scored(ds, &scored, i, &providers[..k], opts))
                .collect::<Result<Vec<_>>>()?;
            let n = fits.len() as f64;
            let mean_test_rmse = fits
                .iter()
                .map(|f| f.cv.map(|c| c.mean_test_rmse))
                .sum::<Option<f64>>()
                .map(|s| s / n);
            Ok(WeakCurvePoint {
                k,
                mean_in_sample_rmse: fits.iter().map(|f| f.in_sample_rmse).sum::<f64>() / n,
                mean_test_rmse,
                fits,
            })
        })
        .collect()
}
