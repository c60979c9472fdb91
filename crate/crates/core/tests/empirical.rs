mod common;

use approx::assert_abs_diff_eq;
use common::rng;
use plural_market::empirical::{
    assign_folds, baselines, fit_strong, fit_strong_provider, fit_weak_user, lambda_star,
    score_transform, subset_analysis, synthetic_dataset, transfer_curve, transfer_factor,
    user_count_tradeoff, weak_curve, FitOptions, FitReport, OpinionDataset, RunEcho, ScoreRule,
    SyntheticSpec,
};
use plural_market::Error;
use proptest::prelude::*;

fn dataset(seed: u64, noise: f64) -> OpinionDataset {
    let spec = SyntheticSpec {
        noise,
        ..SyntheticSpec::default()
    };
    synthetic_dataset(&mut rng(seed), &spec).0
}

fn small_opts() -> FitOptions {
    FitOptions {
        samples: 16,
        ..FitOptions::default()
    }
}

/// Group 0 answers exactly like model 0.
fn twin_dataset() -> OpinionDataset {
    let mut ds = dataset(1, 0.0);
    ds.groups[0] = ds.models[0].clone();
    ds
}

#[test]
fn save_and_load_are_bit_exact() {
    let ds = dataset(2, 0.05);
    let dir = tempfile::tempdir().unwrap();
    let (g, m) = (dir.path().join("groups.csv"), dir.path().join("models.csv"));
    ds.save(&g, &m).unwrap();
    let back = OpinionDataset::load(&g, &m).unwrap();
    assert_eq!(back, ds);
}

#[test]
fn missing_files_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let r = OpinionDataset::load(&dir.path().join("nope.csv"), &dir.path().join("nada.csv"));
    assert!(matches!(r, Err(Error::Io(_))));
}

#[test]
fn twin_group_gets_unit_weight() {
    let ds = twin_dataset();
    let fit = fit_weak_user(&ds, 0, &[0, 1, 2, 3], &small_opts()).unwrap();
    assert_abs_diff_eq!(fit.weights[0], 1.0, epsilon = 1e-9);
    for w in &fit.weights[1..] {
        assert_abs_diff_eq!(*w, 0.0, epsilon = 1e-9);
    }
    assert_abs_diff_eq!(fit.intercept, 0.0, epsilon = 1e-9);
    assert!(fit.in_sample_rmse <= 1e-9);
}

#[test]
fn twin_strong_fit_has_unit_lambda() {
    let ds = twin_dataset();
    let fit = fit_strong_provider(&ds, 0, &[0], &small_opts()).unwrap();
    assert_abs_diff_eq!(fit.lambdas[0], 1.0, epsilon = 1e-9);
    assert!(fit.in_sample_rmse <= 1e-9);
    let t = user_count_tradeoff(&ds, &[0], &[0, 1], &[1], &small_opts()).unwrap();
    assert_abs_diff_eq!(t[0].worst_transfer, 1.0, epsilon = 1e-8);
}

#[test]
fn single_user_transfer_is_one_over_lambda() {
    let ds = dataset(3, 0.1);
    let t = user_count_tradeoff(&ds, &[0, 1, 2], &[1, 0, 2], &[1], &small_opts()).unwrap();
    let lam = t[0].fit.lambda_star[0];
    assert_eq!(t[0].worst_transfer, transfer_factor(lam));
    assert_eq!(t[0].mean_transfer, transfer_factor(lam));
}

#[test]
fn single_provider_baselines_coincide() {
    let ds = dataset(4, 0.1);
    for j in 0..ds.n_models() {
        let b = baselines(&ds, 0, &[j], ScoreRule::Linear).unwrap();
        assert_eq!(b.best_single_rmse, b.equal_weight_rmse);
        assert_eq!(b.best_single_provider, j);
        assert!(b.nnls_rmse <= b.best_single_rmse + 1e-12);
    }
    let b = baselines(&twin_dataset(), 0, &[0], ScoreRule::Linear).unwrap();
    assert_abs_diff_eq!(b.nnls_rmse, b.best_single_rmse, epsilon = 1e-12);
}

#[test]
fn full_subset_has_a_single_value() {
    let ds = dataset(5, 0.1);
    let (_, pts) = subset_analysis(&ds, &[0, 1, 2, 3], &[0, 1, 2], &[4], &small_opts()).unwrap();
    assert_eq!(pts[0].subsets, 1);
    assert_eq!(pts[0].best, pts[0].mean);
    assert_eq!(pts[0].mean, pts[0].worst);
}

#[test]
fn subset_sizes_are_checked() {
    let ds = dataset(5, 0.1);
    let r = subset_analysis(&ds, &[0, 1], &[0], &[3], &small_opts());
    assert!(matches!(r, Err(Error::ParameterViolation(_))));
}

#[test]
fn transfer_recomputes_from_the_serialized_table() {
    let ds = dataset(6, 0.1);
    let (fit, pts) =
        transfer_curve(&ds, &[0, 1, 2, 3], &[0, 1, 2], &[1, 2, 4], &small_opts()).unwrap();
    let mut report = FitReport::new(RunEcho {
        command: "transfer".into(),
        partition: "synthetic".into(),
        score: ScoreRule::Linear,
        folds: 5,
        seed: 0,
        samples: 16,
        providers: ds.model_labels.clone(),
        groups: ds.group_labels[..3].to_vec(),
        sizes: vec![1, 2, 4],
    });
    report.strong = Some(fit);
    report.transfer = pts.clone();
    let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    let table: Vec<Vec<f64>> = json["strong"]["fits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| {
            f["lambdas"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .collect()
        })
        .collect();
    for p in &pts {
        let subset: Vec<usize> = (0..p.k).collect();
        let worst = lambda_star(&table, &subset)
            .into_iter()
            .map(transfer_factor)
            .fold(0.0, f64::max);
        assert_eq!(worst, p.worst_transfer);
    }
}

#[test]
fn tradeoff_columns_recompute_from_their_fits() {
    let ds = dataset(7, 0.1);
    let pts = user_count_tradeoff(&ds, &[0, 1, 2], &[0, 1, 2], &[1, 2, 3], &small_opts()).unwrap();
    for p in &pts {
        assert_eq!(p.fit.users.len(), p.n);
        assert_eq!(p.epsilon_proxy_rmse, p.fit.epsilon_proxy_rmse());
        let worst = p.fit.transfer.iter().copied().fold(0.0, f64::max);
        assert_eq!(p.worst_transfer, worst);
    }
}

#[test]
fn in_sample_error_shrinks_with_more_models() {
    let ds = dataset(8, 0.2);
    let pts = weak_curve(&ds, &[0, 1, 2], &[0, 1, 2, 3], &[1, 2, 3, 4], &small_opts()).unwrap();
    for w in pts.windows(2) {
        assert!(w[1].mean_in_sample_rmse <= w[0].mean_in_sample_rmse + 1e-12);
    }
}

#[test]
fn fits_are_reproducible_bit_for_bit() {
    let ds = dataset(9, 0.1);
    let a = fit_strong(&ds, &[0, 1], &[0, 1, 2], &small_opts()).unwrap();
    let b = fit_strong(&ds, &[0, 1], &[0, 1, 2], &small_opts()).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(
        assign_folds(&ds.questions, 5, 3).unwrap(),
        assign_folds(&ds.questions, 5, 3).unwrap()
    );
}

#[test]
fn more_samples_keep_the_error_within_its_standard_error() {
    let ds = dataset(10, 0.2);
    let base = FitOptions::default();
    let doubled = FitOptions {
        samples: 2 * base.samples,
        ..base
    };
    let a = fit_strong(&ds, &[0, 1, 2], &[0, 1, 2], &base).unwrap();
    let b = fit_strong(&ds, &[0, 1, 2], &[0, 1, 2], &doubled).unwrap();
    for (fa, fb) in a.fits.iter().zip(&b.fits) {
        let (ca, cb) = (fa.cv.unwrap(), fb.cv.unwrap());
        assert!(
            (ca.mean_test_rmse - cb.mean_test_rmse).abs() <= ca.se_test_rmse.max(cb.se_test_rmse)
        );
    }
}

#[test]
fn too_few_questions_for_the_folds() {
    let spec = SyntheticSpec {
        questions: 3,
        ..SyntheticSpec::default()
    };
    let (ds, _) = synthetic_dataset(&mut rng(11), &spec);
    assert!(matches!(
        fit_weak_user(&ds, 0, &[0], &small_opts()),
        Err(Error::InsufficientData(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_stay_in_the_unit_interval(raw in proptest::collection::vec(0.0f64..1.0, 2..8)) {
        let s: f64 = raw.iter().sum();
        prop_assume!(s > 0.0);
        let q: Vec<f64> = raw.iter().map(|v| v / s).collect();
        for rule in ScoreRule::ALL {
            for v in score_transform(&q, rule) {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn relabeling_models_permutes_nothing_but_labels(seed in 0u64..8) {
        let ds = dataset(seed, 0.1);
        let opts = FitOptions { folds: 0, samples: 8, ..FitOptions::default() };
        let a = fit_strong(&ds, &[0, 1, 2], &[0, 1, 2], &opts).unwrap();
        let b = fit_strong(&ds, &[2, 0, 1], &[0, 1, 2], &opts).unwrap();
        prop_assert_eq!(&a.transfer, &b.transfer);
        prop_assert_eq!(a.worst_transfer(&[0, 1]), b.worst_transfer(&[1, 2]));
    }

    #[test]
    fn nnls_beats_both_baselines(seed in 0u64..16) {
        let ds = dataset(seed, 0.2);
        for rule in ScoreRule::ALL {
            let b = baselines(&ds, 0, &[0, 1, 2, 3], rule).unwrap();
            prop_assert!(b.nnls_rmse <= b.best_single_rmse.min(b.equal_weight_rmse) + 1e-12);
        }
    }
}
