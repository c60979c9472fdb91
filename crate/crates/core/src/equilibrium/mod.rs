//! Equilibrium checks over declared deviation classes, the shared-rule
//! benchmark, and the alignment-based lower bounds on user utility.

mod benchmark;
mod bounds;
mod garbling;
mod space;
mod verify;

pub use benchmark::{benchmark_by_enumeration, benchmark_shared};
pub use bounds::{delta_r, delta_slack, lambda_star, mu, theoretical_bounds, BoundKind, UserBound};
pub use garbling::{validate_garbling, GarblingCheck, GarblingSpec};
pub use space::{
    deterministic_rule_space, deterministic_rules, lift_shared_rule, shared_revelation_rule,
    DeviationClass,
};
pub use verify::{
    enumerate_pure_equilibria, verify_anonymous_ne, verify_ne, verify_personalized_ne,
    DeviationWitness, EquilibriumReport, FoundEquilibrium, GameMode, SweepOptions, DEFAULT_NE_EPS,
};

use crate::error::Result;
use crate::game::{user_utility_against, Game, ProviderRule};

/// True when no rule in `candidates` gives any user more than `rule` does.
pub fn is_user_dominant(
    game: &Game,
    provider: usize,
    rule: &ProviderRule,
    candidates: &[ProviderRule],
) -> Result<bool> {
    for i in 0..game.n_users() {
        let own = user_utility_against(game, i, rule, provider)?;
        for c in candidates {
            if user_utility_against(game, i, c, provider)? > own + 1e-12 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
