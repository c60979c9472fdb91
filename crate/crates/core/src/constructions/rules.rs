use crate::equilibrium::{
    deterministic_rules, lift_shared_rule, shared_revelation_rule, GarblingSpec,
};
use crate::error::{Error, Result};
use crate::game::{one_hot, pow_sat, solve_user, Game, ProviderRule, DEFAULT_ENUMERATION_CAP};

/// Sends the provider's own feature on his first turn and message 0 after.
pub fn make_full_revelation_rule(game: &Game, provider: usize) -> Result<ProviderRule> {
    let nx = provider_features(game, provider)?;
    let m = game.n_messages();
    if m < nx {
        return Err(Error::MessageSpaceTooSmall {
            needed: nx,
            available: m,
        });
    }
    ProviderRule::deterministic(
        nx,
        m,
        game.rounds,
        |x, prefix| if prefix.is_empty() { x } else { 0 },
    )
}

/// Always sends message 0.
pub fn make_no_disclosure_rule(game: &Game, provider: usize) -> Result<ProviderRule> {
    let nx = provider_features(game, provider)?;
    ProviderRule::constant(nx, game.n_messages(), game.rounds, 0)
}

fn provider_features(game: &Game, provider: usize) -> Result<usize> {
    game.provider_features
        .get(provider)
        .map(Vec::len)
        .ok_or_else(|| Error::DimensionMismatch(format!("no provider {provider}")))
}

/// User `i`'s best `rounds`-round rule over the garbling value.
pub fn best_shared_rule(
    game: &Game,
    user: usize,
    garbling: &GarblingSpec,
    rounds: usize,
) -> Result<ProviderRule> {
    let m = game.n_messages();
    let nz = garbling.n_values();
    if pow_sat(m, rounds) >= nz as u128 {
        return shared_revelation_rule(nz, m, rounds);
    }
    let slots: usize = (0..rounds).map(|t| pow_sat(m, 2 * t) as usize).sum();
    let count = pow_sat(m, nz * slots);
    if count > DEFAULT_ENUMERATION_CAP {
        return Err(Error::SearchSpaceTooLarge {
            count,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let channel = garbling.user_channel(game, user);
    let order = game.action_order(user);
    let mut best: Option<(f64, ProviderRule)> = None;
    for rule in deterministic_rules(nz, m, rounds)? {
        let v = solve_user(&channel, &game.user_utils[user], &order, &rule)?.utility;
        if best.as_ref().is_none_or(|(b, _)| v > *b + 1e-12) {
            best = Some((v, rule));
        }
    }
    Ok(best.expect("at least one shared rule").1)
}

/// The provider opens with message 0; the user's reply `b` picks branch `b`
/// (replies past the last user fall back to branch 0); the remaining `R - 1`
/// rounds run user `b`'s best shared rule through the provider's `f_j`.
pub fn make_identity_elicitation_rule(
    game: &Game,
    provider: usize,
    garbling: &GarblingSpec,
) -> Result<ProviderRule> {
    let nx = provider_features(game, provider)?;
    let (n, m, rounds) = (game.n_users(), game.n_messages(), game.rounds);
    if rounds < 2 {
        return Err(Error::NotApplicable(
            "identity elicitation needs at least two rounds".into(),
        ));
    }
    if m < n {
        return Err(Error::MessageSpaceTooSmall {
            needed: n,
            available: m,
        });
    }
    let map = garbling.map_of(provider).ok_or_else(|| {
        Error::NotApplicable(format!(
            "provider {provider} is not covered by the garbling"
        ))
    })?;
    let branches = (0..n)
        .map(|i| lift_shared_rule(&best_shared_rule(game, i, garbling, rounds - 1)?, map))
        .collect::<Result<Vec<_>>>()?;
    let mut rule = ProviderRule::empty(nx, m, rounds)?;
    let slots = rule.layout().len();
    for x in 0..nx {
        for slot in 0..slots {
            let prefix = rule.layout().prefix(slot);
            let row = if prefix.is_empty() {
                one_hot(m, 0)
            } else {
                let branch = if prefix[1] < n { prefix[1] } else { 0 };
                branches[branch].row(x, &prefix[2..])?.to_vec()
            };
            rule.set_row(x, &prefix, row)?;
        }
    }
    Ok(rule)
}
