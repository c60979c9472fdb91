//! Every personalized equilibrium of a weakly aligned market clears the
//! certificate's lower bound.

use plural_market::alignment::{check_weak, AlignmentCert};
use plural_market::constructions::random::random_weak_aligned;
use plural_market::equilibrium::{
    enumerate_pure_equilibria, theoretical_bounds, BoundKind, DeviationClass, GameMode,
    SweepOptions,
};
use plural_market::game::Game;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> plural_market::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3);
    let aligned = random_weak_aligned(&mut ChaCha8Rng::seed_from_u64(seed), 3, 3);
    let game = Game::new(aligned.instance)?;
    let r = check_weak(&game, &aligned.cert)?;
    println!(
        "certificate residuals: eps_P {:.2e}, eps_U {:.2e}",
        r.eps_p, r.eps_u
    );

    let class = DeviationClass::SignalPartitions;
    let cert = AlignmentCert::Weak(aligned.cert);
    let bounds = theoretical_bounds(
        &game,
        &cert,
        BoundKind::Personalized,
        &aligned.garbling,
        &class,
    )?;
    let eqs = enumerate_pure_equilibria(
        &game,
        &class,
        GameMode::Personalized,
        SweepOptions::default(),
    )?;
    println!(
        "{} personalized equilibria over signal partitions",
        eqs.len()
    );
    for b in &bounds {
        let worst = eqs
            .iter()
            .map(|e| e.report.user_utilities[b.user])
            .fold(f64::INFINITY, f64::min);
        println!(
            "user {}: bound {:.4}, worst equilibrium utility {:.4}",
            b.user, b.bound, worst
        );
    }
    Ok(())
}
