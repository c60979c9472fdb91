//! Reference fits the NNLS weights are compared against.

use serde::{Deserialize, Serialize};

use super::weak::{check_indices, weak_design};
use super::{score_table, OpinionDataset, ScoreRule};
use crate::error::Result;
use crate::nnls::{nnls_solve, LeastSquaresProblem};

/// In-sample RMSEs over every question.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub user: usize,
    pub group: String,
    pub providers: Vec<usize>,
    /// `w = e_j` with a fitted intercept, best `j`.
    pub best_single_rmse: f64,
    pub best_single_provider: usize,
    /// `w = 1/K` with a fitted intercept.
    pub equal_weight_rmse: f64,
    pub nnls_rmse: f64,
}

/// RMSE of `b ~ A w + c` with `w` fixed and `c` optimal.
fn fixed_weight_rmse(p: &LeastSquaresProblem, w: &[f64]) -> f64 {
    let pred = p.predict(w, 0.0);
    let c = (&p.b - pred).mean();
    p.rmse(w, c)
}

pub fn baselines(
    ds: &OpinionDataset,
    user: usize,
    providers: &[usize],
    score: ScoreRule,
) -> Result<BaselineReport> {
    check_indices(ds, &[user], providers)?;
    let scored: Vec<_> = ds.models.iter().map(|m| score_table(m, score)).collect();
    let all: Vec<usize> = (0..ds.n_questions()).collect();
    let p = weak_design(&scored, &ds.groups[user], providers, &all).problem()?;
    let k = providers.len();
    let (best_pos, best_single_rmse) = (0..k)
        .map(|j| {
            let mut w = vec![0.0; k];
            w[j] = 1.0;
            (j, fixed_weight_rmse(&p, &w))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty provider set");
    Ok(BaselineReport {
        user,
        group: ds.group_labels[user].clone(),
        providers: providers.to_vec(),
        best_single_rmse,
        best_single_provider: providers[best_pos],
        equal_weight_rmse: fixed_weight_rmse(&p, &vec![1.0 / k as f64; k]),
        nnls_rmse: nnls_solve(&p)?.rmse,
    })
}
