//! Two-round markets: providers ask who the user is, then answer as that
//! user's best shared rule would.

use plural_market::alignment::AlignmentCert;
use plural_market::constructions::make_identity_elicitation_rule;
use plural_market::constructions::random::random_strong_aligned;
use plural_market::equilibrium::{delta_r, theoretical_bounds, BoundKind, DeviationClass};
use plural_market::game::{induced_joint, Game, Profile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> plural_market::Result<()> {
    let mut aligned = random_strong_aligned(&mut ChaCha8Rng::seed_from_u64(42), 2, 2);
    aligned.instance.rounds = 2;
    let game = Game::new(aligned.instance)?;
    let g = &aligned.garbling;
    let class = DeviationClass::Deterministic;
    for j in 0..game.n_providers() {
        println!("provider {j}: Delta_R {:.4}", delta_r(&game, j, g, &class)?);
    }
    let rules = (0..game.n_providers())
        .map(|j| make_identity_elicitation_rule(&game, j, g))
        .collect::<plural_market::Result<Vec<_>>>()?;
    let outcome = induced_joint(&game, &Profile::Anonymous(rules))?;
    let cert = AlignmentCert::Strong(aligned.cert);
    let bounds = theoretical_bounds(&game, &cert, BoundKind::AnonymousElicitation, g, &class)?;
    for b in &bounds {
        println!(
            "user {}: one-round benchmark {:.4}, slack {:.4}, bound {:.4}, under elicitation {:.4}",
            b.user, b.benchmark, b.slack, b.bound, outcome.user_utilities[b.user]
        );
    }
    Ok(())
}
