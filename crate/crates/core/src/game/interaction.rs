//! One user talking to one provider: best responses and induced distributions.

use std::collections::BTreeMap;

use super::distribution::InducedDistribution;
use super::rule::{is_provider_turn, one_hot, transcript_len, ProviderRule, UserStrategy};
use super::Game;
use crate::error::{Error, Result};

/// Values within this distance of the maximum count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Cap on enumerated candidates (strategies, rules, profiles).
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Highest-priority index whose score is within [`TIE_TOL`] of the maximum.
pub(crate) fn argmax_by_priority(scores: &[f64], order: &[usize]) -> usize {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    *order
        .iter()
        .find(|&&a| scores[a] >= best - TIE_TOL)
        .expect("non-empty priority order")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelEntry {
    pub prob: f64,
    pub state: usize,
    pub user_feat: usize,
    pub sender_feat: usize,
}

/// Joint law of (state, user feature, sender feature) seen by one user-sender pair.
///
/// The sender is either a provider (feature `x^P_j`) or a common garbling (feature `z`).
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub n_states: usize,
    pub n_user_feats: usize,
    pub n_sender_feats: usize,
    pub entries: Vec<ChannelEntry>,
}

impl Channel {
    pub fn from_cells(
        n_states: usize,
        n_user_feats: usize,
        n_sender_feats: usize,
        cells: impl IntoIterator<Item = (usize, usize, usize, f64)>,
    ) -> Self {
        let mut acc: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for (y, xu, xs, p) in cells {
            if p > 0.0 {
                *acc.entry((xu, xs, y)).or_insert(0.0) += p;
            }
        }
        let entries = acc
            .into_iter()
            .map(|((user_feat, sender_feat, state), prob)| ChannelEntry {
                prob,
                state,
                user_feat,
                sender_feat,
            })
            .collect();
        Self {
            n_states,
            n_user_feats,
            n_sender_feats,
            entries,
        }
    }

    /// Marginal of the prior over `(y, x^U_i, x^P_j)`.
    pub fn between(game: &Game, user: usize, provider: usize) -> Self {
        Self::from_cells(
            game.n_states(),
            game.user_features[user].len(),
            game.provider_features[provider].len(),
            game.support().iter().map(|e| {
                (
                    e.state,
                    e.user_feats[user],
                    e.provider_feats[provider],
                    e.prob,
                )
            }),
        )
    }

    /// Expected utility of acting on the prior alone.
    pub fn uninformed_value(&self, utils: &[Vec<f64>]) -> f64 {
        self.value_knowing(utils, false)
    }

    /// Expected utility when the sender feature is revealed in full.
    pub fn revealed_value(&self, utils: &[Vec<f64>]) -> f64 {
        self.value_knowing(utils, true)
    }

    fn value_knowing(&self, utils: &[Vec<f64>], sender_known: bool) -> f64 {
        let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for e in &self.entries {
            let key = (e.user_feat, if sender_known { e.sender_feat } else { 0 });
            let scores = groups.entry(key).or_insert_with(|| vec![0.0; utils.len()]);
            for (a, row) in utils.iter().enumerate() {
                scores[a] += e.prob * row[e.state];
            }
        }
        groups
            .values()
            .map(|s| s.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .sum()
    }
}

/// A user's optimal strategy against one rule, with its value and the
/// resulting action kernel `P(a | x^U, sender feature)`.
#[derive(Clone, Debug)]
pub struct UserResponse {
    pub utility: f64,
    pub strategy: UserStrategy,
    n_sender: usize,
    kernels: Vec<Option<Vec<f64>>>,
}

impl UserResponse {
    pub fn kernel(&self, user_feat: usize, sender_feat: usize) -> Option<&[f64]> {
        self.kernels
            .get(user_feat * self.n_sender + sender_feat)
            .and_then(|k| k.as_deref())
    }
}

struct Solver<'a> {
    rule: &'a ProviderRule,
    utils: &'a [Vec<f64>],
    order: &'a [usize],
    entries: Vec<ChannelEntry>,
    strategy: &'a mut UserStrategy,
    user_feat: usize,
    len: usize,
}

impl Solver<'_> {
    /// Unnormalized value of the subtree at `prefix` given entry weights `w`.
    fn value(&mut self, prefix: &mut Vec<usize>, w: &[f64]) -> Result<f64> {
        let pos = prefix.len();
        if pos == self.len {
            let mut scores = vec![0.0; self.utils.len()];
            for (e, &we) in self.entries.iter().zip(w) {
                if we > 0.0 {
                    for (a, row) in self.utils.iter().enumerate() {
                        scores[a] += we * row[e.state];
                    }
                }
            }
            let a = argmax_by_priority(&scores, self.order);
            let n_actions = self.utils.len();
            self.strategy
                .set_decision_row(self.user_feat, prefix, one_hot(n_actions, a))?;
            return Ok(scores[a]);
        }
        let n_messages = self.rule.n_messages();
        if is_provider_turn(pos) {
            let mut rows = Vec::with_capacity(self.entries.len());
            for (e, &we) in self.entries.iter().zip(w) {
                rows.push(if we > 0.0 {
                    Some(self.rule.row(e.sender_feat, prefix)?)
                } else {
                    None
                });
            }
            let mut total = 0.0;
            let mut next = vec![0.0; w.len()];
            for m in 0..n_messages {
                let mut mass = 0.0;
                for ((slot, &we), row) in next.iter_mut().zip(w).zip(&rows) {
                    *slot = row.map_or(0.0, |r| we * r[m]);
                    mass += *slot;
                }
                if mass > 0.0 {
                    prefix.push(m);
                    total += self.value(prefix, &next)?;
                    prefix.pop();
                }
            }
            Ok(total)
        } else {
            let mut values = Vec::with_capacity(n_messages);
            for m in 0..n_messages {
                prefix.push(m);
                values.push(self.value(prefix, w)?);
                prefix.pop();
            }
            let order: Vec<usize> = (0..n_messages).collect();
            let m = argmax_by_priority(&values, &order);
            self.strategy
                .set_message_row(self.user_feat, prefix, one_hot(n_messages, m))?;
            Ok(values[m])
        }
    }
}

/// Backward induction over the transcript tree. Exact, and optimal among all
/// (also randomized) user strategies; returns a deterministic one.
pub(crate) fn solve_user(
    channel: &Channel,
    utils: &[Vec<f64>],
    order: &[usize],
    rule: &ProviderRule,
) -> Result<UserResponse> {
    if rule.n_features() != channel.n_sender_feats {
        return Err(Error::DimensionMismatch(format!(
            "rule reads {} feature values, channel has {}",
            rule.n_features(),
            channel.n_sender_feats
        )));
    }
    let rounds = rule.rounds();
    let n_messages = rule.n_messages();
    let n_actions = utils.len();
    let mut strategy = UserStrategy::empty(channel.n_user_feats, n_messages, n_actions, rounds)?;
    fill_defaults(&mut strategy, n_messages, n_actions, order[0]);

    let len = transcript_len(rounds);
    let mut utility = 0.0;
    for xu in 0..channel.n_user_feats {
        let entries: Vec<ChannelEntry> = channel
            .entries
            .iter()
            .filter(|e| e.user_feat == xu)
            .copied()
            .collect();
        if entries.is_empty() {
            continue;
        }
        let w: Vec<f64> = entries.iter().map(|e| e.prob).collect();
        let mut solver = Solver {
            rule,
            utils,
            order,
            entries,
            strategy: &mut strategy,
            user_feat: xu,
            len,
        };
        utility += solver.value(&mut Vec::with_capacity(len), &w)?;
    }

    let n_sender = channel.n_sender_feats;
    let mut kernels = vec![None; channel.n_user_feats * n_sender];
    for e in &channel.entries {
        let slot = &mut kernels[e.user_feat * n_sender + e.sender_feat];
        if slot.is_none() {
            *slot = Some(action_kernel(rule, &strategy, e.user_feat, e.sender_feat)?);
        }
    }
    Ok(UserResponse {
        utility,
        strategy,
        n_sender,
        kernels,
    })
}

fn fill_defaults(strategy: &mut UserStrategy, n_messages: usize, n_actions: usize, action: usize) {
    let conv = strategy.conversation_mut();
    let (slots, feats) = (conv.layout().len(), conv.n_features());
    for x in 0..feats {
        for s in 0..slots {
            conv.set_slot_unchecked(x, s, one_hot(n_messages, 0));
        }
    }
    let dec = strategy.decision_mut();
    let slots = dec.layout().len();
    for x in 0..feats {
        for s in 0..slots {
            dec.set_slot_unchecked(x, s, one_hot(n_actions, action));
        }
    }
}

/// `P(a | x^U, x^P)` from walking every positive-probability branch.
fn action_kernel(
    rule: &ProviderRule,
    strategy: &UserStrategy,
    xu: usize,
    xs: usize,
) -> Result<Vec<f64>> {
    fn walk(
        rule: &ProviderRule,
        strategy: &UserStrategy,
        xu: usize,
        xs: usize,
        len: usize,
        prefix: &mut Vec<usize>,
        p: f64,
        out: &mut [f64],
    ) -> Result<()> {
        let pos = prefix.len();
        if pos == len {
            let row = strategy.decision_row(xu, prefix)?;
            if row.len() != out.len() {
                return Err(Error::DimensionMismatch("decision row width".into()));
            }
            for (o, r) in out.iter_mut().zip(row) {
                *o += p * r;
            }
            return Ok(());
        }
        let row = if is_provider_turn(pos) {
            rule.row(xs, prefix)?
        } else {
            strategy.message_row(xu, prefix)?
        };
        for (m, &q) in row.iter().enumerate() {
            if q > 0.0 {
                prefix.push(m);
                walk(rule, strategy, xu, xs, len, prefix, p * q, out)?;
                prefix.pop();
            }
        }
        Ok(())
    }
    let len = transcript_len(rule.rounds());
    let mut out = vec![0.0; strategy.n_actions()];
    walk(
        rule,
        strategy,
        xu,
        xs,
        len,
        &mut Vec::with_capacity(len),
        1.0,
        &mut out,
    )?;
    Ok(out)
}

fn check_rule(game: &Game, rule: &ProviderRule, provider: usize) -> Result<()> {
    if provider >= game.n_providers() {
        return Err(Error::DimensionMismatch(format!("no provider {provider}")));
    }
    if rule.n_features() != game.provider_features[provider].len()
        || rule.n_messages() != game.n_messages()
        || rule.rounds() != game.rounds
    {
        return Err(Error::DimensionMismatch(format!(
            "rule shape ({} features, {} messages, {} rounds) does not fit provider {provider}",
            rule.n_features(),
            rule.n_messages(),
            rule.rounds()
        )));
    }
    Ok(())
}

/// Exact `I_i(C_P, C_U, D_U; j)` over `(a_i, y)`.
pub fn simulate_interaction(
    game: &Game,
    rule: &ProviderRule,
    provider: usize,
    strategy: &UserStrategy,
    user: usize,
) -> Result<InducedDistribution> {
    check_rule(game, rule, provider)?;
    if strategy.rounds() != game.rounds || strategy.n_actions() != game.action_sets[user].len() {
        return Err(Error::DimensionMismatch("user strategy shape".into()));
    }
    let channel = Channel::between(game, user, provider);
    let ny = game.n_states();
    let mut dist = InducedDistribution::zeros(vec![strategy.n_actions()], ny);
    let mut cache: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for e in &channel.entries {
        let k = match cache.get(&(e.user_feat, e.sender_feat)) {
            Some(k) => k,
            None => {
                let k = action_kernel(rule, strategy, e.user_feat, e.sender_feat)?;
                cache.entry((e.user_feat, e.sender_feat)).or_insert(k)
            }
        };
        for (a, &pa) in k.iter().enumerate() {
            dist.probs[a * ny + e.state] += e.prob * pa;
        }
    }
    Ok(dist)
}

/// `argmax_a E_posterior[u^U_i(a, y)]` with the instance's tie-break order.
pub fn best_response_decision(
    game: &Game,
    user: usize,
    posterior: &[f64],
    feature: usize,
) -> Result<usize> {
    let utils = &game.user_utils[user];
    if utils.is_empty() {
        return Err(Error::EmptyActionSet(user));
    }
    if posterior.len() != game.n_states() || feature >= game.user_features[user].len() {
        return Err(Error::DimensionMismatch(
            "posterior or feature out of range".into(),
        ));
    }
    let scores: Vec<f64> = utils
        .iter()
        .map(|row| row.iter().zip(posterior).map(|(u, p)| u * p).sum())
        .collect();
    Ok(argmax_by_priority(&scores, &game.action_order(user)))
}

/// The user's best conversation and decision rules against one provider rule.
pub fn optimal_user_strategy(
    game: &Game,
    user: usize,
    rule: &ProviderRule,
    provider: usize,
) -> Result<UserResponse> {
    check_rule(game, rule, provider)?;
    let channel = Channel::between(game, user, provider);
    solve_user(
        &channel,
        &game.user_utils[user],
        &game.action_order(user),
        rule,
    )
}

/// `u^U_i(C_{P_j}; j)`.
pub fn user_utility_against(
    game: &Game,
    user: usize,
    rule: &ProviderRule,
    provider: usize,
) -> Result<f64> {
    Ok(optimal_user_strategy(game, user, rule, provider)?.utility)
}

/// The provider the user consults, given one rule per provider.
pub fn select_provider(game: &Game, user: usize, rules: &[ProviderRule]) -> Result<usize> {
    if rules.len() != game.n_providers() {
        return Err(Error::DimensionMismatch(format!(
            "{} rules for {} providers",
            rules.len(),
            game.n_providers()
        )));
    }
    let values = rules
        .iter()
        .enumerate()
        .map(|(j, r)| user_utility_against(game, user, r, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(argmax_by_priority(&values, &game.provider_order()))
}
