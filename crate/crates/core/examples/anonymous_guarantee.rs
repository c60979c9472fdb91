//! Anonymous market under a strong certificate: equilibria against the
//! `bench - 2 eps / lambda*` bound.

use plural_market::alignment::{check_strong, AlignmentCert};
use plural_market::constructions::random::random_strong_aligned;
use plural_market::equilibrium::{
    enumerate_pure_equilibria, lambda_star, theoretical_bounds, BoundKind, DeviationClass,
    GameMode, SweepOptions,
};
use plural_market::game::Game;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> plural_market::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1000);
    let aligned = random_strong_aligned(&mut ChaCha8Rng::seed_from_u64(seed), 3, 3);
    let game = Game::new(aligned.instance)?;
    println!(
        "strong residual {:.2e}",
        check_strong(&game, &aligned.cert)?
    );
    println!("lambda* per user {:?}", lambda_star(&aligned.cert));

    let class = DeviationClass::SignalPartitions;
    let cert = AlignmentCert::Strong(aligned.cert);
    let bounds = theoretical_bounds(
        &game,
        &cert,
        BoundKind::AnonymousDominant,
        &aligned.garbling,
        &class,
    )?;
    let eqs =
        enumerate_pure_equilibria(&game, &class, GameMode::Anonymous, SweepOptions::default())?;
    println!("{} anonymous equilibria", eqs.len());
    for e in &eqs {
        println!(
            "  choices {:?} user utilities {:.4?}",
            e.report.choices, e.report.user_utilities
        );
    }
    for b in &bounds {
        println!(
            "user {}: benchmark {:.4} slack {:.4} bound {:.4}",
            b.user, b.benchmark, b.slack, b.bound
        );
    }
    Ok(())
}
