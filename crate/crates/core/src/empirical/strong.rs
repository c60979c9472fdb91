//! Per-provider fits `(1/n) sum_i v_j(a_i, y) ~ sum_i lambda_i p_i(a_i|y) + c`
//! over sampled action profiles.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::weak::check_indices;
use super::{cross_validate, score_table, CvSummary, Design, FitOptions, FoldFit, OpinionDataset};
use crate::error::{Error, Result};
use crate::nnls::nnls_solve;

pub const DEFAULT_SAMPLES: usize = 64;

/// Stream tag for profiles used to fit.
pub const TRAIN_STREAM: u64 = 0;
/// Stream tag for profiles used to score held-out questions.
pub const TEST_STREAM: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongProviderFit {
    pub provider: usize,
    pub model: String,
    pub users: Vec<usize>,
    /// In-sample `lambda_i`, aligned with `users`.
    pub lambdas: Vec<f64>,
    pub intercept: f64,
    pub in_sample_rmse: f64,
    pub degenerate: bool,
    pub folds: Vec<FoldFit>,
    pub cv: Option<CvSummary>,
}

/// `samples` draws of user `user`'s answer to question `q`.
///
/// Each (question, user, stream) pair owns a ChaCha8 stream under `seed`, so
/// draws do not depend on which other users or providers are in the fit.
pub fn sample_answers(
    ds: &OpinionDataset,
    user: usize,
    q: usize,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((q as u64) << 32) ^ ((user as u64) << 1) ^ stream);
    let dist = WeightedIndex::new(&ds.groups[user][q]).expect("validated distribution");
    (0..samples).map(|_| dist.sample(&mut rng)).collect()
}

/// `profiles[m][k]`: the answer of `users[k]` in the `m`-th sampled profile.
pub fn sample_profiles(
    ds: &OpinionDataset,
    users: &[usize],
    q: usize,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Vec<Vec<usize>> {
    let per_user: Vec<Vec<usize>> = users
        .iter()
        .map(|&i| sample_answers(ds, i, q, samples, seed, stream))
        .collect();
    (0..samples)
        .map(|m| per_user.iter().map(|d| d[m]).collect())
        .collect()
}

pub(crate) fn strong_design(
    ds: &OpinionDataset,
    scored: &[Vec<f64>],
    users: &[usize],
    questions: &[usize],
    opts: &FitOptions,
    stream: u64,
) -> Design {
    let n = users.len() as f64;
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for &q in questions {
        for profile in sample_profiles(ds, users, q, opts.samples, opts.seed, stream) {
            rows.push(
                users
                    .iter()
                    .zip(&profile)
                    .map(|(&i, &a)| ds.groups[i][q][a])
                    .collect(),
            );
            targets.push(profile.iter().map(|&a| scored[q][a]).sum::<f64>() / n);
        }
    }
    Design { rows, targets }
}

/// Strong fit of one model over the listed groups, with question-level CV.
pub fn fit_strong_provider(
    ds: &OpinionDataset,
    provider: usize,
    users: &[usize],
    opts: &FitOptions,
) -> Result<StrongProviderFit> {
    check_indices(ds, users, &[provider])?;
    if users.is_empty() {
        return Err(Error::InsufficientData("empty user set".into()));
    }
    if opts.samples == 0 {
        return Err(Error::ParameterViolation(
            "need at least one sample per question".into(),
        ));
    }
    let scored = score_table(&ds.models[provider], opts.score);
    let folds = cross_validate(&ds.questions, opts, |qs, test| {
        let stream = if test { TEST_STREAM } else { TRAIN_STREAM };
        Ok(strong_design(ds, &scored, users, qs, opts, stream))
    })?;
    let all: Vec<usize> = (0..ds.n_questions()).collect();
    let sol = nnls_solve(&strong_design(ds, &scored, users, &all, opts, TRAIN_STREAM).problem()?)?;
    Ok(StrongProviderFit {
        provider,
        model: ds.model_labels[provider].clone(),
        users: users.to_vec(),
        lambdas: sol.weights,
        intercept: sol.intercept,
        in_sample_rmse: sol.rmse,
        degenerate: sol.degenerate,
        cv: CvSummary::from_folds(&folds),
        folds,
    })
}
