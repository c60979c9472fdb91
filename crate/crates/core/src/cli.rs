//! Command-line front end. Exit codes: 0 success, 1 usage or I/O error,
//! 2 when a verification step says no.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::alignment::{check_strong, check_weak, fit_strong_exact, AlignmentCert};
use crate::constructions::{
    make_full_revelation_rule, make_identity_elicitation_rule, make_no_disclosure_rule,
    make_public_adding_users, make_public_adding_users_base, make_public_example,
    make_strict_separation, public_adding_users_base_cert, public_example_weak_cert, random,
    strict_separation_weak_cert,
};
use crate::empirical::{
    self, resolve_labels, FitOptions, FitReport, OpinionDataset, RunEcho, ScoreRule,
    REPORT_SCHEMA_VERSION, TRANSFER_FLOOR,
};
use crate::equilibrium::{
    theoretical_bounds, verify_ne, BoundKind, DeviationClass, GarblingSpec, SweepOptions,
    DEFAULT_NE_EPS,
};
use crate::error::{Error, Result};
use crate::game::{
    induced_joint, Game, GameInstance, Profile, ProviderRule, DEFAULT_ENUMERATION_CAP,
    INSTANCE_SCHEMA_VERSION,
};

const CHECK_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "plural-market",
    about = "Exact conversation-market games and alignment fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a named instance as JSON.
    Construct(ConstructArgs),
    /// Check a profile against every deviation in a class.
    Verify(VerifyArgs),
    /// Check or fit alignment certificates.
    #[command(subcommand)]
    Cert(CertCommand),
    /// Lower bounds on equilibrium user utility implied by a certificate.
    Bounds(BoundsArgs),
    /// Weak (per-group) NNLS fits with cross-validation.
    FitWeak(EmpiricalArgs),
    /// Strong (per-model) NNLS fits on sampled action profiles.
    FitStrong(EmpiricalArgs),
    /// Transfer factor against the number of models K.
    Transfer(EmpiricalArgs),
    /// Transfer over every model subset of each size.
    Subsets(EmpiricalArgs),
    /// Fitting error and transfer against the number of groups.
    Tradeoff(EmpiricalArgs),
    /// Best-single-model and equal-weight baselines.
    Baselines(EmpiricalArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum InstanceName {
    PublicExample,
    StrictSeparation,
    AddingUsers,
    AddingUsersBase,
    RandomWeak,
    RandomStrong,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    name: InstanceName,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    #[arg(long = "M", default_value_t = 6)]
    m: usize,
    #[arg(long = "D", default_value_t = 2.0)]
    d: f64,
    /// Seed for the random instances.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the instance.
    #[arg(short = 'o', long)]
    out: PathBuf,
    /// Also write the instance's alignment certificate here.
    #[arg(long)]
    cert_out: Option<PathBuf>,
    /// Also write the instance's common garbling here (random instances).
    #[arg(long)]
    garbling_out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ClassName {
    #[value(alias = "deterministic")]
    Det,
    Partitions,
    Shared,
    Custom,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeName {
    Anonymous,
    Personalized,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// `no-disclosure`, `full-revelation`, `elicitation`, a comma list with
    /// one name per provider, or a JSON profile file.
    #[arg(long)]
    profile: String,
    /// How named rules are committed.
    #[arg(long, value_enum, default_value_t = ModeName::Anonymous)]
    mode: ModeName,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long, value_enum, default_value_t = ClassName::Det)]
    class: ClassName,
    /// Garbling JSON for `--class shared` and elicitation profiles.
    #[arg(long)]
    garbling: Option<PathBuf>,
    /// JSON list of rules for `--class custom`.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_NE_EPS)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,
    /// Also write the report here.
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum CertCommand {
    /// Recompute a certificate's residuals; fails if they exceed its radii.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Minimax strong certificate for one provider.
    Fit {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        provider: usize,
        /// Comma list of user indices; all users by default.
        #[arg(long, value_delimiter = ',')]
        users: Option<Vec<usize>>,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BoundName {
    Personalized,
    AnonymousDominant,
    AnonymousElicitation,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    cert: PathBuf,
    #[arg(long, value_enum, default_value_t = BoundName::Personalized)]
    kind: BoundName,
    /// Garbling JSON; defaults to the identity when the certificate's
    /// providers share a feature space, and to no information otherwise.
    #[arg(long)]
    garbling: Option<PathBuf>,
    /// Rule class behind `Delta_R` for the elicitation bound.
    #[arg(long, value_enum, default_value_t = ClassName::Det)]
    class: ClassName,
    /// Compare the bound against this profile's outcome; exit 2 if violated.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeName::Anonymous)]
    mode: ModeName,
}

#[derive(Args, Debug)]
struct EmpiricalArgs {
    /// Group distributions (question_id, wave, group, option_index, probability).
    #[arg(long)]
    group_file: PathBuf,
    /// Model distributions (question_id, wave, model, option_index, probability).
    #[arg(long)]
    model_file: PathBuf,
    #[arg(long, default_value = "linear")]
    score: ScoreRule,
    /// Cross-validation folds over questions; 0 skips cross-validation.
    #[arg(long, default_value_t = empirical::DEFAULT_FOLDS)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sampled profiles per question for strong fits.
    #[arg(long, default_value_t = empirical::DEFAULT_SAMPLES)]
    samples: usize,
    /// Comma list of model labels or indices, in fit order.
    #[arg(long)]
    providers: Option<String>,
    /// Comma list of group labels or indices, in fit order.
    #[arg(long)]
    groups: Option<String>,
    /// K values (fit-weak, transfer), subset sizes (subsets) or group counts (tradeoff).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Partition name used in output file names; defaults to the group file stem.
    #[arg(long)]
    partition: Option<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let version = format!(
        "{} (instance schema {INSTANCE_SCHEMA_VERSION}, report schema {REPORT_SCHEMA_VERSION})",
        env!("CARGO_PKG_VERSION")
    );
    let parsed = Cli::command()
        .version(version)
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(Verdict::Pass) => 0,
        Ok(Verdict::Fail) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

enum Verdict {
    Pass,
    Fail,
}

fn dispatch(cmd: Command) -> Result<Verdict> {
    match cmd {
        Command::Construct(a) => construct(a),
        Command::Verify(a) => verify(a),
        Command::Cert(c) => cert(c),
        Command::Bounds(a) => bounds(a),
        Command::FitWeak(a) => empirical_run("fit-weak", a),
        Command::FitStrong(a) => empirical_run("fit-strong", a),
        Command::Transfer(a) => empirical_run("transfer", a),
        Command::Subsets(a) => empirical_run("subsets", a),
        Command::Tradeoff(a) => empirical_run("tradeoff", a),
        Command::Baselines(a) => empirical_run("baselines", a),
    }
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn read_json<S: serde::de::DeserializeOwned>(path: &Path) -> Result<S> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn load_game(path: &Path) -> Result<Game> {
    Game::new(GameInstance::from_json(&std::fs::read_to_string(path)?)?)
}

fn construct(a: ConstructArgs) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (instance, cert, garbling): (GameInstance, Option<AlignmentCert>, Option<GarblingSpec>) =
        match a.name {
            InstanceName::PublicExample => (
                make_public_example(a.eps, a.c, a.m, a.d)?,
                Some(AlignmentCert::Weak(public_example_weak_cert(
                    a.eps, a.c, a.m, a.d,
                )?)),
                None,
            ),
            InstanceName::StrictSeparation => (
                make_strict_separation(),
                Some(AlignmentCert::Weak(strict_separation_weak_cert())),
                None,
            ),
            InstanceName::AddingUsers => (make_public_adding_users(), None, None),
            InstanceName::AddingUsersBase => (
                make_public_adding_users_base(),
                Some(AlignmentCert::Strong(public_adding_users_base_cert())),
                None,
            ),
            InstanceName::RandomWeak => {
                let g = random::random_weak_aligned(&mut rng, 3, 3);
                (
                    g.instance,
                    Some(AlignmentCert::Weak(g.cert)),
                    Some(g.garbling),
                )
            }
            InstanceName::RandomStrong => {
                let g = random::random_strong_aligned(&mut rng, 3, 3);
                (
                    g.instance,
                    Some(AlignmentCert::Strong(g.cert)),
                    Some(g.garbling),
                )
            }
        };
    std::fs::write(&a.out, instance.to_json()? + "\n")?;
    println!("wrote {}", a.out.display());
    if let Some(path) = &a.cert_out {
        let cert =
            cert.ok_or_else(|| Error::NotApplicable("this instance ships no certificate".into()))?;
        write_json(path, &cert)?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &a.garbling_out {
        let g = garbling
            .ok_or_else(|| Error::NotApplicable("this instance ships no garbling".into()))?;
        write_json(path, &g)?;
        println!("wrote {}", path.display());
    }
    Ok(Verdict::Pass)
}

fn named_rule(
    game: &Game,
    provider: usize,
    name: &str,
    garbling: Option<&GarblingSpec>,
) -> Result<ProviderRule> {
    match name {
        "no-disclosure" => make_no_disclosure_rule(game, provider),
        "full-revelation" => make_full_revelation_rule(game, provider),
        "elicitation" => {
            let g = match garbling {
                Some(g) => g.clone(),
                None => GarblingSpec::identical_features(
                    game,
                    &(0..game.n_providers()).collect::<Vec<_>>(),
                )?,
            };
            make_identity_elicitation_rule(game, provider, &g)
        }
        other => Err(Error::ParameterViolation(format!(
            "unknown rule name {other}"
        ))),
    }
}

fn load_profile(
    game: &Game,
    spec: &str,
    mode: ModeName,
    garbling: Option<&GarblingSpec>,
) -> Result<Profile> {
    let path = Path::new(spec);
    if path.is_file() {
        return read_json(path);
    }
    let names: Vec<&str> = spec.split(',').map(str::trim).collect();
    let k = game.n_providers();
    let names = match names.len() {
        1 => vec![names[0]; k],
        n if n == k => names,
        n => {
            return Err(Error::ParameterViolation(format!(
                "{n} rule names for {k} providers"
            )));
        }
    };
    let rules = names
        .iter()
        .enumerate()
        .map(|(j, n)| named_rule(game, j, n, garbling))
        .collect::<Result<Vec<_>>>()?;
    Ok(match mode {
        ModeName::Anonymous => Profile::Anonymous(rules),
        ModeName::Personalized => {
            Profile::Personalized(rules.into_iter().map(|r| vec![r; game.n_users()]).collect())
        }
    })
}

fn deviation_class(
    class: ClassName,
    garbling: Option<&GarblingSpec>,
    rules: Option<&Path>,
) -> Result<DeviationClass> {
    Ok(match class {
        ClassName::Det => DeviationClass::Deterministic,
        ClassName::Partitions => DeviationClass::SignalPartitions,
        ClassName::Shared => {
            DeviationClass::Shared(garbling.cloned().ok_or_else(|| {
                Error::ParameterViolation("--class shared needs --garbling".into())
            })?)
        }
        ClassName::Custom => {
            DeviationClass::Custom(read_json(rules.ok_or_else(|| {
                Error::ParameterViolation("--class custom needs --rules".into())
            })?)?)
        }
    })
}

fn verify(a: VerifyArgs) -> Result<Verdict> {
    let game = load_game(&a.instance)?;
    let garbling: Option<GarblingSpec> = a.garbling.as_deref().map(read_json).transpose()?;
    let profile = load_profile(&game, &a.profile.profile, a.profile.mode, garbling.as_ref())?;
    let class = deviation_class(a.class, garbling.as_ref(), a.rules.as_deref())?;
    let report = verify_ne(
        &game,
        &profile,
        &class,
        SweepOptions {
            eps: a.eps,
            cap: a.cap,
        },
    )?;
    let text = serde_json::to_string_pretty(&report)?;
    println!("{text}");
    if let Some(out) = &a.out {
        std::fs::write(out, text + "\n")?;
    }
    if !report.is_eps_ne {
        let w = report
            .witness
            .as_ref()
            .expect("a failed sweep records a witness");
        eprintln!(
            "not an equilibrium: provider {} gains {}",
            w.provider, w.gain
        );
    }
    Ok(if report.is_eps_ne {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CertCheck {
    Weak {
        eps_p: f64,
        eps_u: f64,
        declared_eps_p: f64,
        declared_eps_u: f64,
        within_radii: bool,
    },
    Strong {
        eps: f64,
        declared_eps: f64,
        within_radii: bool,
    },
}

fn cert(c: CertCommand) -> Result<Verdict> {
    match c {
        CertCommand::Check { instance, cert } => {
            let game = load_game(&instance)?;
            let out = match read_json::<AlignmentCert>(&cert)? {
                AlignmentCert::Weak(w) => {
                    let r = check_weak(&game, &w)?;
                    CertCheck::Weak {
                        eps_p: r.eps_p,
                        eps_u: r.eps_u,
                        declared_eps_p: w.eps_p,
                        declared_eps_u: w.eps_u,
                        within_radii: r.eps_p <= w.eps_p + CHECK_TOL
                            && r.eps_u <= w.eps_u + CHECK_TOL,
                    }
                }
                AlignmentCert::Strong(s) => {
                    let eps = check_strong(&game, &s)?;
                    CertCheck::Strong {
                        eps,
                        declared_eps: s.eps,
                        within_radii: eps <= s.eps + CHECK_TOL,
                    }
                }
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
            let ok = match out {
                CertCheck::Weak { within_radii, .. } | CertCheck::Strong { within_radii, .. } => {
                    within_radii
                }
            };
            Ok(if ok { Verdict::Pass } else { Verdict::Fail })
        }
        CertCommand::Fit {
            instance,
            provider,
            users,
            out,
        } => {
            let game = load_game(&instance)?;
            let users = users.unwrap_or_else(|| (0..game.n_users()).collect());
            let cert = AlignmentCert::Strong(fit_strong_exact(&game, provider, &users)?);
            let text = serde_json::to_string_pretty(&cert)?;
            println!("{text}");
            if let Some(out) = out {
                std::fs::write(out, text + "\n")?;
            }
            Ok(Verdict::Pass)
        }
    }
}

#[derive(Serialize)]
struct BoundsOutput {
    kind: &'static str,
    bounds: Vec<crate::equilibrium::UserBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    realized: Option<Vec<f64>>,
}

fn bounds(a: BoundsArgs) -> Result<Verdict> {
    let game = load_game(&a.instance)?;
    let cert: AlignmentCert = read_json(&a.cert)?;
    let providers = match &cert {
        AlignmentCert::Weak(w) => w.providers.clone(),
        AlignmentCert::Strong(s) => s.providers.clone(),
    };
    let garbling = match &a.garbling {
        Some(p) => read_json(p)?,
        None => GarblingSpec::identical_features(&game, &providers)
            .unwrap_or_else(|_| GarblingSpec::trivial(&game, &providers)),
    };
    let class = deviation_class(a.class, Some(&garbling), None)?;
    let (kind, name) = match a.kind {
        BoundName::Personalized => (BoundKind::Personalized, "personalized"),
        BoundName::AnonymousDominant => (BoundKind::AnonymousDominant, "anonymous_dominant"),
        BoundName::AnonymousElicitation => {
            (BoundKind::AnonymousElicitation, "anonymous_elicitation")
        }
    };
    let bounds = theoretical_bounds(&game, &cert, kind, &garbling, &class)?;
    let realized = match &a.profile {
        Some(spec) => {
            let profile = load_profile(&game, spec, a.mode, Some(&garbling))?;
            Some(induced_joint(&game, &profile)?.user_utilities)
        }
        None => None,
    };
    let ok = realized
        .as_ref()
        .is_none_or(|r| bounds.iter().all(|b| r[b.user] >= b.bound - CHECK_TOL));
    println!(
        "{}",
        serde_json::to_string_pretty(&BoundsOutput {
            kind: name,
            bounds,
            realized
        })?
    );
    Ok(if ok { Verdict::Pass } else { Verdict::Fail })
}

fn fmt_transfer(t: f64) -> String {
    if t >= 1.0 / TRANSFER_FLOOR {
        ">1e12".into()
    } else {
        format!("{t:.4}")
    }
}

fn empirical_run(command: &str, a: EmpiricalArgs) -> Result<Verdict> {
    let ds = OpinionDataset::load(&a.group_file, &a.model_file)?;
    let providers = resolve_labels(a.providers.as_deref(), &ds.model_labels)?;
    let users = resolve_labels(a.groups.as_deref(), &ds.group_labels)?;
    let partition = a.partition.clone().unwrap_or_else(|| {
        a.group_file
            .file_stem()
            .map_or_else(|| "groups".into(), |s| s.to_string_lossy().into_owned())
    });
    let sizes = a.sizes.clone().unwrap_or_default();
    let opts = FitOptions {
        score: a.score,
        folds: a.folds,
        seed: a.seed,
        samples: a.samples,
    };
    let mut report = FitReport::new(RunEcho {
        command: command.into(),
        partition,
        score: a.score,
        folds: a.folds,
        seed: a.seed,
        samples: a.samples,
        providers: providers
            .iter()
            .map(|&j| ds.model_labels[j].clone())
            .collect(),
        groups: users.iter().map(|&i| ds.group_labels[i].clone()).collect(),
        sizes: sizes.clone(),
    });
    let all_sizes = |n: usize| {
        if sizes.is_empty() {
            (1..=n).collect()
        } else {
            sizes.clone()
        }
    };
    match command {
        "fit-weak" => {
            let ks = if sizes.is_empty() {
                vec![providers.len()]
            } else {
                sizes.clone()
            };
            report.weak = empirical::weak_curve(&ds, &users, &providers, &ks, &opts)?;
            for p in &report.weak {
                let test = p.mean_test_rmse.map_or("-".into(), |v| format!("{v:.6}"));
                println!(
                    "K={} in-sample RMSE {:.6} test RMSE {test}",
                    p.k, p.mean_in_sample_rmse
                );
            }
        }
        "fit-strong" => {
            let fit = empirical::fit_strong(&ds, &providers, &users, &opts)?;
            for (i, t) in users.iter().zip(&fit.transfer) {
                println!("{}: transfer {}", ds.group_labels[*i], fmt_transfer(*t));
            }
            report.strong = Some(fit);
        }
        "transfer" => {
            let (fit, points) = empirical::transfer_curve(
                &ds,
                &providers,
                &users,
                &all_sizes(providers.len()),
                &opts,
            )?;
            for p in &points {
                println!(
                    "K={} mean {} worst {}",
                    p.k,
                    fmt_transfer(p.mean_transfer),
                    fmt_transfer(p.worst_transfer)
                );
            }
            report.strong = Some(fit);
            report.transfer = points;
        }
        "subsets" => {
            let (fit, points) = empirical::subset_analysis(
                &ds,
                &providers,
                &users,
                &all_sizes(providers.len()),
                &opts,
            )?;
            for p in &points {
                println!(
                    "|T|={} best {} mean {} worst {}",
                    p.size,
                    fmt_transfer(p.best),
                    fmt_transfer(p.mean),
                    fmt_transfer(p.worst)
                );
            }
            report.strong = Some(fit);
            report.subsets = points;
        }
        "tradeoff" => {
            report.tradeoff = empirical::user_count_tradeoff(
                &ds,
                &providers,
                &users,
                &all_sizes(users.len()),
                &opts,
            )?;
            for p in &report.tradeoff {
                println!(
                    "n={} epsilon_proxy_rmse {:.6} worst transfer {}",
                    p.n,
                    p.epsilon_proxy_rmse,
                    fmt_transfer(p.worst_transfer)
                );
            }
        }
        "baselines" => {
            report.baselines = users
                .iter()
                .map(|&i| empirical::baselines(&ds, i, &providers, a.score))
                .collect::<Result<_>>()?;
            for b in &report.baselines {
                println!(
                    "{}: nnls {:.6} best single {:.6} equal weight {:.6}",
                    b.group, b.nnls_rmse, b.best_single_rmse, b.equal_weight_rmse
                );
            }
        }
        _ => unreachable!("dispatch only passes known commands"),
    }
    for p in report.write_all(&a.out)? {
        println!("wrote {}", p.display());
    }
    Ok(Verdict::Pass)
}
