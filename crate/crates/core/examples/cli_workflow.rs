//! The command line driven from code: build an instance, check a profile,
//! fit and check a certificate, and bound user utility.

use plural_market::cli::run;

fn step(args: &[&str]) -> i32 {
    println!("$ plural-market {}", args.join(" "));
    let code = run(std::iter::once("plural-market").chain(args.iter().copied()));
    println!("exit {code}\n");
    code
}

fn main() {
    let dir = std::env::temp_dir().join("plural-market-cli-workflow");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let (inst, cert, fitted) = (p("base.json"), p("base_cert.json"), p("fit.json"));
    step(&[
        "construct",
        "adding-users-base",
        "-o",
        &inst,
        "--cert-out",
        &cert,
    ]);
    step(&[
        "verify",
        "--instance",
        &inst,
        "--profile",
        "full-revelation",
    ]);
    step(&["verify", "--instance", &inst, "--profile", "no-disclosure"]);
    step(&[
        "cert",
        "fit",
        "--instance",
        &inst,
        "--provider",
        "0",
        "-o",
        &fitted,
    ]);
    step(&["cert", "check", "--instance", &inst, "--cert", &fitted]);
    step(&[
        "bounds",
        "--instance",
        &inst,
        "--cert",
        &cert,
        "--kind",
        "anonymous-dominant",
        "--profile",
        "full-revelation",
    ]);
}
