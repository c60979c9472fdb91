use crate::error::{Error, Result};
use crate::game::{
    is_provider_turn, one_hot, pow_sat, Game, ProviderRule, DEFAULT_ENUMERATION_CAP,
};

use super::garbling::GarblingSpec;

/// The set of provider rules a deviation may be drawn from.
#[derive(Clone, Debug, Default)]
pub enum DeviationClass {
    /// Every deterministic map (feature, provider-turn prefix) -> message.
    #[default]
    Deterministic,
    /// One-round rules up to relabelling of messages: each partition of the
    /// provider's feature values into at most `|M|` signals.
    SignalPartitions,
    /// Deterministic rules over the garbling `z`, run through the provider's `f_j`.
    Shared(GarblingSpec),
    /// An explicit list, used for every provider.
    Custom(Vec<ProviderRule>),
}

impl DeviationClass {
    pub fn label(&self) -> String {
        match self {
            DeviationClass::Deterministic => "deterministic".into(),
            DeviationClass::SignalPartitions => "signal-partitions".into(),
            DeviationClass::Shared(g) => format!("shared(|Z|={})", g.n_values()),
            DeviationClass::Custom(r) => format!("custom({})", r.len()),
        }
    }

    /// Number of rules the class holds for `provider`.
    pub fn size(&self, game: &Game, provider: usize) -> Result<u128> {
        let m = game.n_messages();
        Ok(match self {
            DeviationClass::Deterministic => {
                let slots = ProviderRule::empty(0, m, game.rounds)?.layout().len();
                pow_sat(m, game.provider_features[provider].len() * slots)
            }
            DeviationClass::SignalPartitions => {
                if game.rounds != 1 {
                    return Err(Error::NotApplicable(
                        "signal partitions are one-round rules".into(),
                    ));
                }
                bounded_bell(game.provider_features[provider].len(), m)
            }
            DeviationClass::Shared(g) => {
                let slots = ProviderRule::empty(0, m, game.rounds)?.layout().len();
                pow_sat(m, g.n_values() * slots)
            }
            DeviationClass::Custom(r) => r.len() as u128,
        })
    }

    /// Every rule in the class for `provider`, in a fixed enumeration order.
    pub fn rules(&self, game: &Game, provider: usize, cap: u128) -> Result<Vec<ProviderRule>> {
        let count = self.size(game, provider)?;
        if count > cap {
            return Err(Error::SearchSpaceTooLarge { count, cap });
        }
        let nx = game.provider_features[provider].len();
        let m = game.n_messages();
        match self {
            DeviationClass::Deterministic => deterministic_rules(nx, m, game.rounds),
            DeviationClass::SignalPartitions => partitions(nx, m)
                .into_iter()
                .map(|labels| ProviderRule::deterministic(nx, m, 1, |x, _| labels[x]))
                .collect(),
            DeviationClass::Shared(g) => {
                let map = g.map_of(provider).ok_or_else(|| {
                    Error::NotApplicable(format!(
                        "provider {provider} is not covered by the garbling"
                    ))
                })?;
                deterministic_rules(g.n_values(), m, game.rounds)?
                    .iter()
                    .map(|shared| lift_shared_rule(shared, map))
                    .collect()
            }
            DeviationClass::Custom(r) => Ok(r.clone()),
        }
    }
}

/// Rules of `DeviationClass::Deterministic` with the default cap.
pub fn deterministic_rule_space(game: &Game, provider: usize) -> Result<Vec<ProviderRule>> {
    DeviationClass::Deterministic.rules(game, provider, DEFAULT_ENUMERATION_CAP)
}

/// All deterministic rules over `n_features` feature values, in mixed-radix order.
pub fn deterministic_rules(
    n_features: usize,
    n_messages: usize,
    rounds: usize,
) -> Result<Vec<ProviderRule>> {
    let empty = ProviderRule::empty(n_features, n_messages, rounds)?;
    let layout = empty.layout().clone();
    let digits = n_features * layout.len();
    let mut code = vec![0usize; digits];
    let mut out = Vec::new();
    loop {
        out.push(ProviderRule::deterministic(
            n_features,
            n_messages,
            rounds,
            |x, h| code[x * layout.len() + layout.slot(h).expect("provider prefix")],
        )?);
        let mut d = digits;
        loop {
            if d == 0 {
                return Ok(out);
            }
            d -= 1;
            code[d] += 1;
            if code[d] < n_messages {
                break;
            }
            code[d] = 0;
        }
    }
}

/// Restricted-growth strings of length `n` using at most `k` labels.
fn partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(buf: &mut Vec<usize>, n: usize, k: usize, used: usize, out: &mut Vec<Vec<usize>>) {
        if buf.len() == n {
            out.push(buf.clone());
            return;
        }
        for label in 0..(used + 1).min(k) {
            buf.push(label);
            rec(buf, n, k, used.max(label + 1), out);
            buf.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 || n == 0 {
        rec(&mut Vec::with_capacity(n), n, k, 0, &mut out);
    }
    out
}

fn bounded_bell(n: usize, k: usize) -> u128 {
    // Stirling numbers of the second kind, summed over at most k blocks.
    let mut s = vec![vec![0u128; n + 1]; n + 1];
    s[0][0] = 1;
    for i in 1..=n {
        for j in 1..=i {
            s[i][j] = s[i - 1][j - 1].saturating_add((j as u128).saturating_mul(s[i - 1][j]));
        }
    }
    (0..=k.min(n))
        .map(|j| s[n][j])
        .fold(0u128, u128::saturating_add)
}

/// Runs a rule written over the garbling `z` from a provider's own feature.
///
/// At each provider turn the provider holds a posterior over `z` given his
/// feature and his own earlier messages, and mixes the shared rule's rows by it.
pub fn lift_shared_rule(shared: &ProviderRule, map: &[Vec<f64>]) -> Result<ProviderRule> {
    let nz = shared.n_features();
    let m = shared.n_messages();
    let mut lifted = ProviderRule::empty(map.len(), m, shared.rounds())?;
    let slots = lifted.layout().len();
    for (x, fx) in map.iter().enumerate() {
        if fx.len() != nz {
            return Err(Error::DimensionMismatch("garbling map width".into()));
        }
        for slot in 0..slots {
            let prefix = lifted.layout().prefix(slot);
            let mut post: Vec<f64> = fx.clone();
            for (z, w) in post.iter_mut().enumerate() {
                for t in (0..prefix.len()).filter(|&t| is_provider_turn(t)) {
                    *w *= shared.row(z, &prefix[..t])?[prefix[t]];
                }
            }
            let total: f64 = post.iter().sum();
            if total <= 0.0 {
                // unreachable for this feature; any row will do
                post = fx.clone();
            }
            let total: f64 = post.iter().sum();
            let mut row = vec![0.0; m];
            for (z, w) in post.iter().enumerate() {
                if *w > 0.0 {
                    for (r, q) in row.iter_mut().zip(shared.row(z, &prefix)?) {
                        *r += w / total * q;
                    }
                }
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|r| *r /= s);
            lifted.set_row(x, &prefix, row)?;
        }
    }
    Ok(lifted)
}

/// The rule that sends the garbling value base-`|M|` over the provider's turns.
pub fn shared_revelation_rule(
    n_values: usize,
    n_messages: usize,
    rounds: usize,
) -> Result<ProviderRule> {
    let capacity = pow_sat(n_messages, rounds);
    if capacity < n_values as u128 {
        return Err(Error::MessageSpaceTooSmall {
            needed: n_values,
            available: n_messages,
        });
    }
    ProviderRule::from_fn(n_values, n_messages, rounds, |z, prefix| {
        let turn = prefix.len() / 2;
        let shift = rounds - 1 - turn;
        let digit = (z as u128 / pow_sat(n_messages, shift)) % n_messages as u128;
        one_hot(n_messages, digit as usize)
    })
}
