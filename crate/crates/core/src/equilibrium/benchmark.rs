use crate::error::{Error, Result};
use crate::game::{pow_sat, solve_user, Game, DEFAULT_ENUMERATION_CAP};

use super::garbling::GarblingSpec;
use super::space::deterministic_rules;

/// `u^U_i(C*_{S,T,rounds}(i))`: the user's value against her best rule that
/// reads only the garbling.
///
/// When `|M|^rounds >= |Z|` the best shared rule reveals `z`, so the value is
/// `E[max_a E[u | z, x^U]]`. Otherwise every deterministic shared rule is
/// enumerated. Zero rounds give the prior-only value.
pub fn benchmark_shared(
    game: &Game,
    user: usize,
    garbling: &GarblingSpec,
    rounds: usize,
) -> Result<f64> {
    check_user(game, user)?;
    let channel = garbling.user_channel(game, user);
    let utils = &game.user_utils[user];
    if rounds == 0 {
        return Ok(channel.uninformed_value(utils));
    }
    if pow_sat(game.n_messages(), rounds) >= garbling.n_values() as u128 {
        return Ok(channel.revealed_value(utils));
    }
    benchmark_by_enumeration(game, user, garbling, rounds, DEFAULT_ENUMERATION_CAP)
}

/// The benchmark as a maximum over every deterministic shared rule.
pub fn benchmark_by_enumeration(
    game: &Game,
    user: usize,
    garbling: &GarblingSpec,
    rounds: usize,
    cap: u128,
) -> Result<f64> {
    check_user(game, user)?;
    let channel = garbling.user_channel(game, user);
    let utils = &game.user_utils[user];
    if rounds == 0 {
        return Ok(channel.uninformed_value(utils));
    }
    let m = game.n_messages();
    let slots: usize = (0..rounds).map(|t| pow_sat(m, 2 * t) as usize).sum();
    let count = pow_sat(m, garbling.n_values() * slots);
    if count > cap {
        return Err(Error::SearchSpaceTooLarge { count, cap });
    }
    let order = game.action_order(user);
    let mut best = f64::NEG_INFINITY;
    for rule in deterministic_rules(garbling.n_values(), m, rounds)? {
        best = best.max(solve_user(&channel, utils, &order, &rule)?.utility);
    }
    Ok(best)
}

fn check_user(game: &Game, user: usize) -> Result<()> {
    if user >= game.n_users() {
        return Err(Error::DimensionMismatch(format!("no user {user}")));
    }
    Ok(())
}
