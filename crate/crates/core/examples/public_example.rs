//! No-disclosure equilibrium in the anonymous two-provider example.
//!
//! Every deterministic signal map is tried as a deviation for each provider.

use std::time::Instant;

use plural_market::constructions::{make_no_disclosure_rule, make_public_example};
use plural_market::equilibrium::{
    benchmark_shared, verify_anonymous_ne, DeviationClass, GarblingSpec, SweepOptions,
};
use plural_market::game::{Game, Profile};

fn main() -> plural_market::Result<()> {
    let game = Game::new(make_public_example(0.1, 0.5, 6, 2.0)?)?;
    let profile = Profile::Anonymous(vec![
        make_no_disclosure_rule(&game, 0)?,
        make_no_disclosure_rule(&game, 1)?,
    ]);
    let start = Instant::now();
    let report = verify_anonymous_ne(
        &game,
        &profile,
        &DeviationClass::Deterministic,
        SweepOptions::default(),
    )?;
    let garbling = GarblingSpec::identical_features(&game, &[0, 1])?;
    println!("deviations per provider: {:?}", report.deviations_checked);
    println!("max gain:                {:?}", report.max_gain);
    println!("user utilities:          {:?}", report.user_utilities);
    println!("provider utilities:      {:?}", report.provider_utilities);
    println!(
        "benchmark (user 0):      {}",
        benchmark_shared(&game, 0, &garbling, 1)?
    );
    println!(
        "equilibrium:             {} ({:.2?})",
        report.is_eps_ne,
        start.elapsed()
    );
    Ok(())
}
