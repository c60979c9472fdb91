use serde::{Deserialize, Serialize};

use super::distribution::InducedDistribution;
use super::interaction::{argmax_by_priority, optimal_user_strategy, UserResponse};
use super::rule::ProviderRule;
use super::Game;
use crate::error::{Error, Result};

/// Committed provider rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "rules", rename_all = "snake_case")]
pub enum Profile {
    /// One public rule per provider.
    Anonymous(Vec<ProviderRule>),
    /// `rules[j][i]` is provider `j`'s rule for user `i`.
    Personalized(Vec<Vec<ProviderRule>>),
}

impl Profile {
    pub fn rule(&self, provider: usize, user: usize) -> &ProviderRule {
        match self {
            Profile::Anonymous(r) => &r[provider],
            Profile::Personalized(r) => &r[provider][user],
        }
    }

    pub fn n_providers(&self) -> usize {
        match self {
            Profile::Anonymous(r) => r.len(),
            Profile::Personalized(r) => r.len(),
        }
    }

    pub(crate) fn check_shape(&self, game: &Game) -> Result<()> {
        let ok = match self {
            Profile::Anonymous(r) => r.len() == game.n_providers(),
            Profile::Personalized(r) => {
                r.len() == game.n_providers() && r.iter().all(|v| v.len() == game.n_users())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                "profile shape does not match the game".into(),
            ))
        }
    }
}

/// What happens once every user best-responds to a profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarketOutcome {
    pub choices: Vec<usize>,
    pub user_utilities: Vec<f64>,
    pub provider_utilities: Vec<f64>,
    pub joint: InducedDistribution,
}

/// `I(C_P)`: each user picks a provider, converses optimally and acts.
pub fn induced_joint(game: &Game, profile: &Profile) -> Result<MarketOutcome> {
    profile.check_shape(game)?;
    let order = game.provider_order();
    let mut chosen = Vec::with_capacity(game.n_users());
    let mut choices = Vec::with_capacity(game.n_users());
    for i in 0..game.n_users() {
        let responses = (0..game.n_providers())
            .map(|j| optimal_user_strategy(game, i, profile.rule(j, i), j))
            .collect::<Result<Vec<_>>>()?;
        let values: Vec<f64> = responses.iter().map(|r| r.utility).collect();
        let j = argmax_by_priority(&values, &order);
        choices.push(j);
        chosen.push(responses.into_iter().nth(j).expect("chosen provider"));
    }
    let refs: Vec<&UserResponse> = chosen.iter().collect();
    Ok(outcome_from_responses(game, &refs, choices))
}

pub(crate) fn outcome_from_responses(
    game: &Game,
    responses: &[&UserResponse],
    choices: Vec<usize>,
) -> MarketOutcome {
    let joint = joint_from_responses(game, responses, &choices);
    let provider_utilities = (0..game.n_providers())
        .map(|j| joint.expect(game.provider_table(j)))
        .collect();
    MarketOutcome {
        user_utilities: responses.iter().map(|r| r.utility).collect(),
        choices,
        provider_utilities,
        joint,
    }
}

/// Users act independently given all features, so the joint is the
/// prior-weighted product of per-user action kernels.
pub(crate) fn joint_from_responses(
    game: &Game,
    responses: &[&UserResponse],
    choices: &[usize],
) -> InducedDistribution {
    let dims = game.action_dims();
    let ny = game.n_states();
    let mut dist = InducedDistribution::zeros(dims.clone(), ny);
    let mut kernels: Vec<&[f64]> = Vec::with_capacity(responses.len());
    for e in game.support() {
        kernels.clear();
        for (i, r) in responses.iter().enumerate() {
            let k = r
                .kernel(e.user_feats[i], e.provider_feats[choices[i]])
                .expect("kernel covers the prior support");
            kernels.push(k);
        }
        accumulate(&kernels, &dims, 0, 0, e.prob, e.state, ny, &mut dist.probs);
    }
    dist
}

#[allow(clippy::too_many_arguments)]
fn accumulate(
    kernels: &[&[f64]],
    dims: &[usize],
    depth: usize,
    idx: usize,
    p: f64,
    state: usize,
    ny: usize,
    out: &mut [f64],
) {
    if depth == kernels.len() {
        out[idx * ny + state] += p;
        return;
    }
    for (a, &q) in kernels[depth].iter().enumerate() {
        if q > 0.0 {
            accumulate(
                kernels,
                dims,
                depth + 1,
                idx * dims[depth] + a,
                p * q,
                state,
                ny,
                out,
            );
        }
    }
}
