use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    argmax_by_priority, joint_from_responses, pow_sat, solve_user, Channel, Game, Profile,
    ProviderRule, UserResponse, DEFAULT_ENUMERATION_CAP,
};

use super::space::DeviationClass;

/// Default slack for calling a profile an equilibrium.
pub const DEFAULT_NE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameMode {
    Personalized,
    Anonymous,
}

/// A profitable deviation. `rules` holds one rule (anonymous) or one rule per user.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviationWitness {
    pub provider: usize,
    pub rules: Vec<ProviderRule>,
    pub utility: f64,
    pub gain: f64,
}

/// Outcome of a deviation sweep. The verdict is relative to `class`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub mode: GameMode,
    pub class: String,
    pub eps: f64,
    pub choices: Vec<usize>,
    pub user_utilities: Vec<f64>,
    pub provider_utilities: Vec<f64>,
    /// Largest utility gain per provider; staying put counts as zero.
    pub max_gain: Vec<f64>,
    pub deviations_checked: Vec<u128>,
    pub witness: Option<DeviationWitness>,
    pub is_eps_ne: bool,
}

/// Options shared by verification and enumeration.
#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub eps: f64,
    pub cap: u128,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            eps: DEFAULT_NE_EPS,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

struct Evaluator<'g> {
    game: &'g Game,
    order: Vec<usize>,
    channels: Vec<Vec<Channel>>,
    action_orders: Vec<Vec<usize>>,
}

struct Outcome {
    choices: Vec<usize>,
    user_utilities: Vec<f64>,
    provider_utilities: Vec<f64>,
}

impl<'g> Evaluator<'g> {
    fn new(game: &'g Game) -> Self {
        Self {
            game,
            order: game.provider_order(),
            channels: (0..game.n_users())
                .map(|i| {
                    (0..game.n_providers())
                        .map(|j| Channel::between(game, i, j))
                        .collect()
                })
                .collect(),
            action_orders: (0..game.n_users()).map(|i| game.action_order(i)).collect(),
        }
    }

    fn respond(&self, user: usize, provider: usize, rule: &ProviderRule) -> Result<UserResponse> {
        check_rule_shape(self.game, provider, rule)?;
        solve_user(
            &self.channels[user][provider],
            &self.game.user_utils[user],
            &self.action_orders[user],
            rule,
        )
    }

    /// `by_user[i][j]` is user i's response to provider j's rule for her.
    fn outcome(&self, by_user: &[Vec<&UserResponse>]) -> Outcome {
        let mut choices = Vec::with_capacity(by_user.len());
        let mut chosen = Vec::with_capacity(by_user.len());
        for row in by_user {
            let values: Vec<f64> = row.iter().map(|r| r.utility).collect();
            let j = argmax_by_priority(&values, &self.order);
            choices.push(j);
            chosen.push(row[j]);
        }
        let joint = joint_from_responses(self.game, &chosen, &choices);
        Outcome {
            user_utilities: chosen.iter().map(|r| r.utility).collect(),
            provider_utilities: (0..self.game.n_providers())
                .map(|j| joint.expect(self.game.provider_table(j)))
                .collect(),
            choices,
        }
    }

    /// Deviating provider's utility when user i gets `dev[i]` from provider `j`.
    fn deviation_utility(
        &self,
        base: &[Vec<&UserResponse>],
        j: usize,
        dev: &[&UserResponse],
    ) -> f64 {
        let mut by_user: Vec<Vec<&UserResponse>> = base.to_vec();
        for (row, d) in by_user.iter_mut().zip(dev) {
            row[j] = d;
        }
        self.outcome(&by_user).provider_utilities[j]
    }
}

fn check_rule_shape(game: &Game, provider: usize, rule: &ProviderRule) -> Result<()> {
    if rule.n_features() != game.provider_features[provider].len()
        || rule.n_messages() != game.n_messages()
        || rule.rounds() != game.rounds
    {
        return Err(Error::DimensionMismatch(format!(
            "rule does not fit provider {provider}"
        )));
    }
    Ok(())
}

#[derive(Default)]
struct Best {
    gain: f64,
    utility: f64,
    tag: Option<Vec<usize>>,
    checked: u128,
}

impl Best {
    fn offer(&mut self, utility: f64, base: f64, tag: impl FnOnce() -> Vec<usize>) {
        self.checked += 1;
        let gain = utility - base;
        if gain > self.gain {
            self.gain = gain;
            self.utility = utility;
            self.tag = Some(tag());
        }
    }
}

/// Calls `f` on every tuple in `0..n`^`len`, in lexicographic order, until it returns false.
fn for_each_tuple(n: usize, len: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    if n == 0 && len > 0 {
        return;
    }
    let mut t = vec![0usize; len];
    loop {
        if !f(&t) {
            return;
        }
        let mut d = len;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            t[d] += 1;
            if t[d] < n {
                break;
            }
            t[d] = 0;
        }
    }
}

fn deviation_count(mode: GameMode, class_size: u128, n_users: usize) -> u128 {
    match mode {
        GameMode::Anonymous => class_size,
        GameMode::Personalized => (0..n_users).fold(1u128, |acc, _| acc.saturating_mul(class_size)),
    }
}

/// Checks a profile against every deviation in `class` by every provider.
///
/// Personalized deviations replace all of one provider's per-user rules at
/// once, which contains every single-user deviation.
pub fn verify_ne(
    game: &Game,
    profile: &Profile,
    class: &DeviationClass,
    opts: SweepOptions,
) -> Result<EquilibriumReport> {
    profile.check_shape(game)?;
    let mode = match profile {
        Profile::Anonymous(_) => GameMode::Anonymous,
        Profile::Personalized(_) => GameMode::Personalized,
    };
    let ev = Evaluator::new(game);
    let (n, k) = (game.n_users(), game.n_providers());
    let base_owned: Vec<Vec<UserResponse>> = (0..n)
        .map(|i| {
            (0..k)
                .map(|j| ev.respond(i, j, profile.rule(j, i)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let base: Vec<Vec<&UserResponse>> = base_owned.iter().map(|r| r.iter().collect()).collect();
    let outcome = ev.outcome(&base);

    let mut max_gain = vec![0.0; k];
    let mut checked = vec![0u128; k];
    let mut witness: Option<DeviationWitness> = None;
    for j in 0..k {
        let count = deviation_count(mode, class.size(game, j)?, n);
        if count > opts.cap {
            return Err(Error::SearchSpaceTooLarge {
                count,
                cap: opts.cap,
            });
        }
        let rules = class.rules(game, j, opts.cap)?;
        let base_j = outcome.provider_utilities[j];
        let mut best = Best::default();
        match mode {
            GameMode::Anonymous => {
                for (c, rule) in rules.iter().enumerate() {
                    let dev = (0..n)
                        .map(|i| ev.respond(i, j, rule))
                        .collect::<Result<Vec<_>>>()?;
                    let refs: Vec<&UserResponse> = dev.iter().collect();
                    best.offer(ev.deviation_utility(&base, j, &refs), base_j, || vec![c]);
                }
            }
            GameMode::Personalized => {
                let resp: Vec<Vec<UserResponse>> = rules
                    .iter()
                    .map(|rule| (0..n).map(|i| ev.respond(i, j, rule)).collect())
                    .collect::<Result<_>>()?;
                for_each_tuple(rules.len(), n, &mut |t| {
                    let refs: Vec<&UserResponse> =
                        t.iter().enumerate().map(|(i, &c)| &resp[c][i]).collect();
                    best.offer(ev.deviation_utility(&base, j, &refs), base_j, || t.to_vec());
                    true
                });
            }
        }
        max_gain[j] = best.gain;
        checked[j] = best.checked;
        if best.gain > opts.eps && witness.as_ref().is_none_or(|w| best.gain > w.gain) {
            witness = Some(DeviationWitness {
                provider: j,
                rules: best
                    .tag
                    .unwrap_or_default()
                    .iter()
                    .map(|&c| rules[c].clone())
                    .collect(),
                utility: best.utility,
                gain: best.gain,
            });
        }
    }
    Ok(EquilibriumReport {
        mode,
        class: class.label(),
        eps: opts.eps,
        choices: outcome.choices,
        user_utilities: outcome.user_utilities,
        provider_utilities: outcome.provider_utilities,
        is_eps_ne: witness.is_none(),
        max_gain,
        deviations_checked: checked,
        witness,
    })
}

/// [`verify_ne`] for a personalized profile.
pub fn verify_personalized_ne(
    game: &Game,
    profile: &Profile,
    class: &DeviationClass,
    opts: SweepOptions,
) -> Result<EquilibriumReport> {
    if !matches!(profile, Profile::Personalized(_)) {
        return Err(Error::DimensionMismatch(
            "expected a personalized profile".into(),
        ));
    }
    verify_ne(game, profile, class, opts)
}

/// [`verify_ne`] for an anonymous profile.
pub fn verify_anonymous_ne(
    game: &Game,
    profile: &Profile,
    class: &DeviationClass,
    opts: SweepOptions,
) -> Result<EquilibriumReport> {
    if !matches!(profile, Profile::Anonymous(_)) {
        return Err(Error::DimensionMismatch(
            "expected an anonymous profile".into(),
        ));
    }
    verify_ne(game, profile, class, opts)
}

/// A pure equilibrium found by [`enumerate_pure_equilibria`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FoundEquilibrium {
    pub profile: Profile,
    pub report: EquilibriumReport,
}

/// Every profile drawn from `class` that no provider can improve on within `class`.
pub fn enumerate_pure_equilibria(
    game: &Game,
    class: &DeviationClass,
    mode: GameMode,
    opts: SweepOptions,
) -> Result<Vec<FoundEquilibrium>> {
    let (n, k) = (game.n_users(), game.n_providers());
    let rules: Vec<Vec<ProviderRule>> = (0..k)
        .map(|j| class.rules(game, j, opts.cap))
        .collect::<Result<_>>()?;
    let slots_per_provider = match mode {
        GameMode::Anonymous => 1,
        GameMode::Personalized => n,
    };
    let profiles = rules.iter().fold(1u128, |acc, r| {
        acc.saturating_mul(pow_sat(r.len(), slots_per_provider))
    });
    if profiles > opts.cap {
        return Err(Error::SearchSpaceTooLarge {
            count: profiles,
            cap: opts.cap,
        });
    }
    let ev = Evaluator::new(game);
    // resp[j][c][i]
    let resp: Vec<Vec<Vec<UserResponse>>> = rules
        .iter()
        .enumerate()
        .map(|(j, rs)| {
            rs.iter()
                .map(|rule| (0..n).map(|i| ev.respond(i, j, rule)).collect())
                .collect()
        })
        .collect::<Result<_>>()?;

    // assignment digits: provider-major, then user (personalized only)
    let digits = k * slots_per_provider;
    let radix: Vec<usize> = (0..digits)
        .map(|d| rules[d / slots_per_provider].len())
        .collect();
    let mut code = vec![0usize; digits];
    let mut found = Vec::new();
    if radix.contains(&0) {
        return Ok(found);
    }
    loop {
        let pick = |j: usize, i: usize| match mode {
            GameMode::Anonymous => code[j],
            GameMode::Personalized => code[j * n + i],
        };
        let base: Vec<Vec<&UserResponse>> = (0..n)
            .map(|i| (0..k).map(|j| &resp[j][pick(j, i)][i]).collect())
            .collect();
        let outcome = ev.outcome(&base);
        let mut stable = true;
        let mut max_gain = vec![0.0; k];
        let mut checked = vec![0u128; k];
        'providers: for j in 0..k {
            let base_j = outcome.provider_utilities[j];
            let mut best = Best::default();
            match mode {
                GameMode::Anonymous => {
                    for c in 0..rules[j].len() {
                        let refs: Vec<&UserResponse> = resp[j][c].iter().collect();
                        best.offer(ev.deviation_utility(&base, j, &refs), base_j, || vec![c]);
                        if best.gain > opts.eps {
                            stable = false;
                            break 'providers;
                        }
                    }
                }
                GameMode::Personalized => {
                    for_each_tuple(rules[j].len(), n, &mut |t| {
                        let refs: Vec<&UserResponse> =
                            t.iter().enumerate().map(|(i, &c)| &resp[j][c][i]).collect();
                        best.offer(ev.deviation_utility(&base, j, &refs), base_j, || t.to_vec());
                        best.gain <= opts.eps
                    });
                    if best.gain > opts.eps {
                        stable = false;
                        break 'providers;
                    }
                }
            }
            max_gain[j] = best.gain;
            checked[j] = best.checked;
        }
        if stable {
            let profile = match mode {
                GameMode::Anonymous => {
                    Profile::Anonymous((0..k).map(|j| rules[j][pick(j, 0)].clone()).collect())
                }
                GameMode::Personalized => Profile::Personalized(
                    (0..k)
                        .map(|j| (0..n).map(|i| rules[j][pick(j, i)].clone()).collect())
                        .collect(),
                ),
            };
            found.push(FoundEquilibrium {
                profile,
                report: EquilibriumReport {
                    mode,
                    class: class.label(),
                    eps: opts.eps,
                    choices: outcome.choices,
                    user_utilities: outcome.user_utilities,
                    provider_utilities: outcome.provider_utilities,
                    max_gain,
                    deviations_checked: checked,
                    witness: None,
                    is_eps_ne: true,
                },
            });
        }
        let mut d = digits;
        loop {
            if d == 0 {
                return Ok(found);
            }
            d -= 1;
            code[d] += 1;
            if code[d] < radix[d] {
                break;
            }
            code[d] = 0;
        }
    }
}
