//! Alignment fits on survey answer distributions.

pub mod baselines;
pub mod dataset;
pub mod folds;
pub mod report;
pub mod score;
pub mod strong;
pub mod synthetic;
pub mod transfer;
pub mod weak;

use serde::{Deserialize, Serialize};

pub use baselines::{baselines, BaselineReport};
pub use dataset::{resolve_labels, OpinionDataset, Question, SUM_TOL};
pub use folds::{assign_folds, split, DEFAULT_FOLDS};
pub use report::{csv_name, FitReport, RunEcho, REPORT_SCHEMA_VERSION};
pub use score::{score_table, score_transform, ScoreRule, LOG_FLOOR};
pub use strong::{fit_strong_provider, sample_profiles, StrongProviderFit, DEFAULT_SAMPLES};
pub use synthetic::{synthetic_dataset, SyntheticSpec};
pub use transfer::{
    fit_strong, lambda_star, subset_analysis, transfer_curve, transfer_factor, user_count_tradeoff,
    StrongFit, SubsetPoint, TradeoffPoint, TransferPoint, TRANSFER_FLOOR,
};
pub use weak::{fit_weak_user, weak_curve, WeakCurvePoint, WeakUserFit};

/// Knobs shared by every fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub score: ScoreRule,
    /// Number of cross-validation folds; `0` skips cross-validation.
    pub folds: usize,
    pub seed: u64,
    /// Sampled action profiles per question (strong fits only).
    pub samples: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            score: ScoreRule::Linear,
            folds: DEFAULT_FOLDS,
            seed: 0,
            samples: DEFAULT_SAMPLES,
        }
    }
}

/// One cross-validation fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldFit {
    pub fold: usize,
    pub train_questions: usize,
    pub test_questions: usize,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub train_rmse: f64,
    pub test_rmse: f64,
}

/// Fold means, with the standard error of the test mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub mean_train_rmse: f64,
    pub mean_test_rmse: f64,
    pub se_test_rmse: f64,
}

impl CvSummary {
    pub fn from_folds(folds: &[FoldFit]) -> Option<Self> {
        if folds.is_empty() {
            return None;
        }
        let k = folds.len() as f64;
        let mean_train_rmse = folds.iter().map(|f| f.train_rmse).sum::<f64>() / k;
        let mean_test_rmse = folds.iter().map(|f| f.test_rmse).sum::<f64>() / k;
        let se_test_rmse = if folds.len() > 1 {
            let var = folds
                .iter()
                .map(|f| (f.test_rmse - mean_test_rmse).powi(2))
                .sum::<f64>()
                / (k - 1.0);
            (var / k).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean_train_rmse,
            mean_test_rmse,
            se_test_rmse,
        })
    }
}

/// Observations for one fit: design rows and targets.
pub(crate) struct Design {
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Design {
    pub fn problem(&self) -> crate::error::Result<crate::nnls::LeastSquaresProblem> {
        crate::nnls::LeastSquaresProblem::from_rows(&self.rows, &self.targets, true)
    }
}

/// Fits every training split and scores the matching test split.
pub(crate) fn cross_validate(
    questions: &[Question],
    opts: &FitOptions,
    mut design: impl FnMut(&[usize], bool) -> crate::error::Result<Design>,
) -> crate::error::Result<Vec<FoldFit>> {
    if opts.folds == 0 {
        return Ok(Vec::new());
    }
    let fold_of = assign_folds(questions, opts.folds, opts.seed)?;
    (0..opts.folds)
        .map(|f| {
            let (train, test) = split(&fold_of, f);
            let train_problem = design(&train, false)?.problem()?;
            let sol = crate::nnls::nnls_solve(&train_problem)?;
            let test_problem = design(&test, true)?.problem()?;
            Ok(FoldFit {
                fold: f,
                train_questions: train.len(),
                test_questions: test.len(),
                test_rmse: test_problem.rmse(&sol.weights, sol.intercept),
                train_rmse: sol.rmse,
                weights: sol.weights,
                intercept: sol.intercept,
            })
        })
        .collect()
}
