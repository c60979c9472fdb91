use serde::{Deserialize, Serialize};

use crate::alignment::{
    strong_implies_weak, AlignmentCert, StrongAlignmentCert, WeakAlignmentCert,
};
use crate::error::{Error, Result};
use crate::game::{user_utility_against, Game, DEFAULT_ENUMERATION_CAP};

use super::benchmark::benchmark_shared;
use super::garbling::GarblingSpec;
use super::space::DeviationClass;

/// Which equilibrium guarantee to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Personalized game, weak certificate: `bench - 2 eps_U - 2 eps_P mu_i`.
    Personalized,
    /// Anonymous game with user-dominant rules, strong certificate: `bench - 2 eps / lambda*_i`.
    AnonymousDominant,
    /// Anonymous game via identity elicitation: `bench_{R-1} - delta_i`.
    AnonymousElicitation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserBound {
    pub user: usize,
    pub benchmark: f64,
    pub slack: f64,
    pub bound: f64,
}

/// `mu_i = sum_{j in T, w_{j,i} > 0} w_{j,i} / lambda_{j,i}`.
pub fn mu(cert: &WeakAlignmentCert) -> Vec<f64> {
    let n = cert.user_intercepts.len();
    (0..n)
        .map(|i| {
            cert.user_weights
                .iter()
                .zip(&cert.provider_weights)
                .filter(|(w, _)| w[i] > 0.0)
                .map(|(w, l)| w[i] / l[i])
                .sum()
        })
        .collect()
}

/// `lambda*_i = max_{j in T} lambda_{j,i}`.
pub fn lambda_star(cert: &StrongAlignmentCert) -> Vec<f64> {
    cert.max_weights()
}

/// `delta_i = min_{j: lambda_{j,i} > 0} (Delta_R(j) sum_{i' != i} lambda_{j,i'} / lambda_{j,i} + 2 eps / lambda_{j,i})`,
/// with `deltas[t]` the value of `Delta_R` for `cert.providers[t]`.
pub fn delta_slack(cert: &StrongAlignmentCert, deltas: &[f64]) -> Result<Vec<f64>> {
    if deltas.len() != cert.providers.len() {
        return Err(Error::DimensionMismatch(
            "one Delta_R per certified provider".into(),
        ));
    }
    cert.check_coverage()?;
    let n = cert.weights.first().map_or(0, Vec::len);
    Ok((0..n)
        .map(|i| {
            cert.weights
                .iter()
                .zip(deltas)
                .filter(|(l, _)| l[i] > 0.0)
                .map(|(l, &d)| {
                    let others: f64 = l
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i)
                        .map(|(_, v)| v)
                        .sum();
                    d * others / l[i] + 2.0 * cert.eps / l[i]
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

/// `Delta_R(j) = max_i (best value of provider j's R-round rules in `class` - bench_{R-1}(i))`.
pub fn delta_r(
    game: &Game,
    provider: usize,
    garbling: &GarblingSpec,
    class: &DeviationClass,
) -> Result<f64> {
    let rules = class.rules(game, provider, DEFAULT_ENUMERATION_CAP)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..game.n_users() {
        let mut best = f64::NEG_INFINITY;
        for rule in &rules {
            best = best.max(user_utility_against(game, i, rule, provider)?);
        }
        let bench = benchmark_shared(game, i, garbling, game.rounds - 1)?;
        worst = worst.max(best - bench);
    }
    Ok(worst)
}

/// Per-user lower bound on equilibrium utility implied by a certificate.
///
/// `class` is only used for [`BoundKind::AnonymousElicitation`], as the rule
/// class behind `Delta_R`.
pub fn theoretical_bounds(
    game: &Game,
    cert: &AlignmentCert,
    kind: BoundKind,
    garbling: &GarblingSpec,
    class: &DeviationClass,
) -> Result<Vec<UserBound>> {
    let n = game.n_users();
    let build = |rounds: usize, slack: Vec<f64>| -> Result<Vec<UserBound>> {
        (0..n)
            .map(|i| {
                let benchmark = benchmark_shared(game, i, garbling, rounds)?;
                Ok(UserBound {
                    user: i,
                    benchmark,
                    slack: slack[i],
                    bound: benchmark - slack[i],
                })
            })
            .collect()
    };
    match kind {
        BoundKind::Personalized => {
            let weak = match cert {
                AlignmentCert::Weak(w) => w.clone(),
                AlignmentCert::Strong(s) => strong_implies_weak(game, s)?,
            };
            weak.validate(game)?;
            let slack = mu(&weak)
                .into_iter()
                .map(|m| 2.0 * weak.eps_u + 2.0 * weak.eps_p * m)
                .collect();
            build(game.rounds, slack)
        }
        BoundKind::AnonymousDominant => {
            let strong = require_strong(cert)?;
            strong.validate(game)?;
            let slack = lambda_star(strong)
                .into_iter()
                .map(|l| 2.0 * strong.eps / l)
                .collect();
            build(game.rounds, slack)
        }
        BoundKind::AnonymousElicitation => {
            let strong = require_strong(cert)?;
            strong.validate(game)?;
            if game.rounds < 2 {
                return Err(Error::NotApplicable(
                    "identity elicitation uses one round, so it needs at least two".into(),
                ));
            }
            if game.n_messages() < n {
                return Err(Error::MessageSpaceTooSmall {
                    needed: n,
                    available: game.n_messages(),
                });
            }
            let deltas = strong
                .providers
                .iter()
                .map(|&j| delta_r(game, j, garbling, class))
                .collect::<Result<Vec<_>>>()?;
            build(game.rounds - 1, delta_slack(strong, &deltas)?)
        }
    }
}

fn require_strong(cert: &AlignmentCert) -> Result<&StrongAlignmentCert> {
    match cert {
        AlignmentCert::Strong(s) => Ok(s),
        AlignmentCert::Weak(_) => Err(Error::ParameterViolation(
            "anonymous-game bounds need a strong certificate".into(),
        )),
    }
}
