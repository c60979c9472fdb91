//! The survey pipeline end to end on a planted synthetic dataset.
//!
//! `cargo run --example synthetic_pipeline -- out_dir` writes the dataset
//! CSVs and every report there.

use std::path::PathBuf;

use plural_market::empirical::{
    baselines, subset_analysis, synthetic_dataset, transfer_curve, user_count_tradeoff, weak_curve,
    FitOptions, FitReport, RunEcho, ScoreRule, SyntheticSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> plural_market::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "synthetic_out".into())
        .into();
    std::fs::create_dir_all(&out)?;
    let spec = SyntheticSpec {
        noise: 0.05,
        ..SyntheticSpec::default()
    };
    let (ds, planted) = synthetic_dataset(&mut ChaCha8Rng::seed_from_u64(7), &spec);
    ds.save(&out.join("groups.csv"), &out.join("models.csv"))?;

    let opts = FitOptions {
        samples: 32,
        ..FitOptions::default()
    };
    let models: Vec<usize> = (0..ds.n_models()).collect();
    let groups: Vec<usize> = (0..ds.n_groups()).collect();
    let sizes: Vec<usize> = (1..=models.len()).collect();
    let echo = |command: &str| RunEcho {
        command: command.into(),
        partition: "synthetic".into(),
        score: ScoreRule::Linear,
        folds: opts.folds,
        seed: opts.seed,
        samples: opts.samples,
        providers: ds.model_labels.clone(),
        groups: ds.group_labels.clone(),
        sizes: sizes.clone(),
    };

    let mut weak = FitReport::new(echo("fit-weak"));
    weak.weak = weak_curve(&ds, &groups, &models, &sizes, &opts)?;
    let mut transfer = FitReport::new(echo("transfer"));
    let (fit, points) = transfer_curve(&ds, &models, &groups, &sizes, &opts)?;
    transfer.strong = Some(fit);
    transfer.transfer = points;
    let mut subsets = FitReport::new(echo("subsets"));
    subsets.subsets = subset_analysis(&ds, &models, &groups, &sizes, &opts)?.1;
    let mut tradeoff = FitReport::new(echo("tradeoff"));
    tradeoff.tradeoff = user_count_tradeoff(&ds, &models, &groups, &[1, 2, 3], &opts)?;
    let mut base = FitReport::new(echo("baselines"));
    base.baselines = groups
        .iter()
        .map(|&i| baselines(&ds, i, &models, ScoreRule::Linear))
        .collect::<plural_market::Result<_>>()?;

    for p in &weak.weak {
        println!("K={} in-sample RMSE {:.5}", p.k, p.mean_in_sample_rmse);
    }
    for p in &transfer.transfer {
        println!("K={} worst transfer {:.3}", p.k, p.worst_transfer);
    }
    for b in &base.baselines {
        println!(
            "{}: nnls {:.5} vs best single {:.5}",
            b.group, b.nnls_rmse, b.best_single_rmse
        );
    }
    println!("planted weights {planted:.3?}");
    for r in [&weak, &transfer, &subsets, &tradeoff, &base] {
        for p in r.write_all(&out)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}
