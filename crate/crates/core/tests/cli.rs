mod common;

use std::path::{Path, PathBuf};

use plural_market::cli::run;
use plural_market::empirical::{synthetic_dataset, SyntheticSpec};

fn go(args: &[&str]) -> i32 {
    run(std::iter::once("plural-market").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_public(dir: &Path) -> PathBuf {
    let inst = dir.join("pe.json");
    let code = go(&[
        "construct",
        "public-example",
        "--eps",
        "0.2",
        "--M",
        "3",
        "-o",
        s(&inst),
    ]);
    assert_eq!(code, 0);
    inst
}

fn saved_dataset(dir: &Path) -> (PathBuf, PathBuf) {
    let spec = SyntheticSpec {
        questions: 30,
        ..SyntheticSpec::default()
    };
    let (ds, _) = synthetic_dataset(&mut common::rng(5), &spec);
    let (g, m) = (dir.join("groups.csv"), dir.join("models.csv"));
    ds.save(&g, &m).unwrap();
    (g, m)
}

#[test]
fn no_disclosure_passes_and_a_lone_revealer_fails() {
    let dir = tempfile::tempdir().unwrap();
    let inst = small_public(dir.path());
    let report = dir.path().join("ne.json");
    assert_eq!(
        go(&[
            "verify",
            "--instance",
            s(&inst),
            "--profile",
            "no-disclosure",
            "-o",
            s(&report)
        ]),
        0
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["is_eps_ne"], true);
    assert_eq!(
        go(&[
            "verify",
            "--instance",
            s(&inst),
            "--profile",
            "no-disclosure,full-revelation"
        ]),
        2
    );
}

#[test]
fn certificates_check_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (inst, cert) = (d.join("base.json"), d.join("base_cert.json"));
    assert_eq!(
        go(&[
            "construct",
            "adding-users-base",
            "-o",
            s(&inst),
            "--cert-out",
            s(&cert)
        ]),
        0
    );
    assert_eq!(
        go(&["cert", "check", "--instance", s(&inst), "--cert", s(&cert)]),
        0
    );
    let fitted = d.join("fit.json");
    assert_eq!(
        go(&[
            "cert",
            "fit",
            "--instance",
            s(&inst),
            "--provider",
            "0",
            "-o",
            s(&fitted)
        ]),
        0
    );
    assert_eq!(
        go(&[
            "cert",
            "check",
            "--instance",
            s(&inst),
            "--cert",
            s(&fitted)
        ]),
        0
    );
    // an honest certificate with a radius that is too small fails the check
    let strict = d.join("strict.json");
    assert_eq!(go(&["construct", "strict-separation", "-o", s(&strict)]), 0);
    let strict_fit = d.join("strict_fit.json");
    assert_eq!(
        go(&[
            "cert",
            "fit",
            "--instance",
            s(&strict),
            "--provider",
            "0",
            "-o",
            s(&strict_fit)
        ]),
        0
    );
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&strict_fit).unwrap()).unwrap();
    zero_eps(&mut v);
    let shrunk = d.join("strict_shrunk.json");
    std::fs::write(&shrunk, v.to_string()).unwrap();
    assert_eq!(
        go(&[
            "cert",
            "check",
            "--instance",
            s(&strict),
            "--cert",
            s(&shrunk)
        ]),
        2
    );
}

fn zero_eps(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, x) in m.iter_mut() {
                if k == "eps" {
                    *x = serde_json::json!(0.0);
                } else {
                    zero_eps(x);
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(zero_eps),
        _ => {}
    }
}

#[test]
fn personalized_bound_separates_revelation_from_no_disclosure() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (inst, cert) = (d.join("pe.json"), d.join("pe_cert.json"));
    let code = go(&[
        "construct",
        "public-example",
        "--eps",
        "0.2",
        "--M",
        "3",
        "-o",
        s(&inst),
        "--cert-out",
        s(&cert),
    ]);
    assert_eq!(code, 0);
    let args = [
        "bounds",
        "--instance",
        s(&inst),
        "--cert",
        s(&cert),
        "--kind",
        "personalized",
    ];
    assert_eq!(go(&args), 0);
    // no disclosure is not a personalized equilibrium and leaves users below the bound
    let mut nd = args.to_vec();
    nd.extend(["--profile", "no-disclosure", "--mode", "personalized"]);
    assert_eq!(go(&nd), 2);
    let mut rev = args.to_vec();
    rev.extend(["--profile", "full-revelation", "--mode", "personalized"]);
    assert_eq!(go(&rev), 0);
    // weak certificates carry no anonymous guarantee
    assert_eq!(
        go(&[
            "bounds",
            "--instance",
            s(&inst),
            "--cert",
            s(&cert),
            "--kind",
            "anonymous-dominant"
        ]),
        1
    );
}

#[test]
fn dominant_bound_holds_under_revelation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (inst, cert) = (d.join("base.json"), d.join("base_cert.json"));
    assert_eq!(
        go(&[
            "construct",
            "adding-users-base",
            "-o",
            s(&inst),
            "--cert-out",
            s(&cert)
        ]),
        0
    );
    let args = [
        "bounds",
        "--instance",
        s(&inst),
        "--cert",
        s(&cert),
        "--kind",
        "anonymous-dominant",
    ];
    assert_eq!(go(&args), 0);
    let mut with_profile = args.to_vec();
    with_profile.extend(["--profile", "full-revelation"]);
    assert_eq!(go(&with_profile), 0);
}

#[test]
fn every_empirical_command_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (g, m) = saved_dataset(d);
    let out = d.join("out");
    let cases: [(&str, &[&str]); 6] = [
        ("fit-weak", &["--sizes", "1,2,3"]),
        ("fit-strong", &[]),
        ("transfer", &["--sizes", "1,2"]),
        ("subsets", &["--sizes", "2"]),
        ("tradeoff", &["--sizes", "1,2"]),
        ("baselines", &[]),
    ];
    for (cmd, extra) in cases {
        let mut args = vec![
            cmd,
            "--group-file",
            s(&g),
            "--model-file",
            s(&m),
            "--samples",
            "8",
            "--out",
            s(&out),
        ];
        args.extend_from_slice(extra);
        assert_eq!(go(&args), 0, "{cmd}");
        for ext in ["json", "csv"] {
            assert!(
                out.join(format!("{cmd}_groups_linear.{ext}")).is_file(),
                "{cmd} {ext}"
            );
        }
    }
}

#[test]
fn fit_weak_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (g, m) = saved_dataset(d);
    let mut files = Vec::new();
    for run_dir in ["a", "b"] {
        let out = d.join(run_dir);
        let args = [
            "fit-weak",
            "--group-file",
            s(&g),
            "--model-file",
            s(&m),
            "--score",
            "linear",
            "--folds",
            "5",
            "--seed",
            "7",
            "--out",
            s(&out),
        ];
        assert_eq!(go(&args), 0);
        files.push((
            std::fs::read(out.join("fit-weak_groups_linear.json")).unwrap(),
            std::fs::read(out.join("fit-weak_groups_linear.csv")).unwrap(),
        ));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(go(&["verify", "--bogus"]), 1);
    assert_eq!(
        go(&[
            "verify",
            "--instance",
            s(&missing),
            "--profile",
            "no-disclosure"
        ]),
        1
    );
    assert_eq!(
        go(&[
            "fit-weak",
            "--group-file",
            s(&missing),
            "--model-file",
            s(&missing)
        ]),
        1
    );
    let inst = small_public(dir.path());
    assert_eq!(
        go(&["verify", "--instance", s(&inst), "--profile", "a,b,c"]),
        1
    );
    assert_eq!(
        go(&[
            "verify",
            "--instance",
            s(&inst),
            "--profile",
            "no-disclosure",
            "--class",
            "shared"
        ]),
        1
    );
}

#[test]
fn full_size_public_example_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let code = go(&[
        "construct",
        "public-example",
        "--eps",
        "0.1",
        "--c",
        "0.5",
        "--M",
        "6",
        "--D",
        "2",
        "-o",
        s(&g),
    ]);
    assert_eq!(code, 0);
    let report = dir.path().join("report.json");
    let code = go(&[
        "verify",
        "--instance",
        s(&g),
        "--profile",
        "no-disclosure",
        "--class",
        "det",
        "-o",
        s(&report),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    for gain in v["max_gain"].as_array().unwrap() {
        assert!(gain.as_f64().unwrap() <= 0.0);
    }
}
