//! Adding a user who values information can leave the original user worse
//! off: the provider's favorite rule withholds it.

use plural_market::constructions::{
    augment, make_public_adding_users_base, public_adding_users_spec,
};
use plural_market::equilibrium::{benchmark_shared, deterministic_rule_space, GarblingSpec};
use plural_market::game::{induced_joint, Game, Profile};

fn best_for_provider(game: &Game) -> plural_market::Result<(f64, Vec<f64>)> {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for rule in deterministic_rule_space(game, 0)? {
        let out = induced_joint(game, &Profile::Anonymous(vec![rule]))?;
        if out.provider_utilities[0] > best.0 + 1e-12 {
            best = (out.provider_utilities[0], out.user_utilities);
        }
    }
    Ok(best)
}

fn main() -> plural_market::Result<()> {
    let base = make_public_adding_users_base();
    let spec = public_adding_users_spec();
    for (name, inst) in [
        ("base", base.clone()),
        ("augmented", augment(&base, &spec)?),
    ] {
        let game = Game::new(inst)?;
        let (p, users) = best_for_provider(&game)?;
        let bench = benchmark_shared(&game, 0, &GarblingSpec::identical_features(&game, &[0])?, 1)?;
        println!(
            "{name:>9}: provider optimum {p:.4}, users {users:.4?}, user 0 benchmark {bench:.4}"
        );
    }
    Ok(())
}
