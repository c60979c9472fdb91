use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{for_each_profile, GameInstance, ProviderUtility};

/// A new user and how each provider's utility mixes in her action:
/// `u+_j = (1 - beta_j) u_j(a_{1:n}, y) + beta_j f_j(a_{n+1}, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentedGameSpec {
    pub action_set: Vec<String>,
    /// `user_util[a][y]`.
    pub user_util: Vec<Vec<f64>>,
    pub feature_labels: Vec<String>,
    /// `feature_given_state[y][x] = P(x^U_{n+1} = x | y)`.
    pub feature_given_state: Vec<Vec<f64>>,
    pub betas: Vec<f64>,
    /// `perturbations[j][a][y] = f_j(a, y)`.
    pub perturbations: Vec<Vec<Vec<f64>>>,
}

impl AugmentedGameSpec {
    fn check(&self, base: &GameInstance) -> Result<()> {
        let (ny, na, k) = (base.n_states(), self.action_set.len(), base.n_providers());
        if self.betas.len() != k || self.perturbations.len() != k {
            return Err(Error::ParameterViolation(
                "one beta and one f per provider".into(),
            ));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
            return Err(Error::ParameterViolation(format!(
                "beta {b} is not in (0, 1)"
            )));
        }
        let in_unit = |t: &Vec<Vec<f64>>| {
            t.len() == na
                && t.iter()
                    .all(|r| r.len() == ny && r.iter().all(|v| (0.0..=1.0).contains(v)))
        };
        if !self.perturbations.iter().all(in_unit) {
            return Err(Error::ParameterViolation(
                "f must map into [0, 1] over (a, y)".into(),
            ));
        }
        if !in_unit(&self.user_util) {
            return Err(Error::ParameterViolation(
                "new user's utility must lie in [0, 1]".into(),
            ));
        }
        let nx = self.feature_labels.len();
        let dist_ok = self.feature_given_state.len() == ny
            && self.feature_given_state.iter().all(|r| {
                r.len() == nx
                    && r.iter().all(|&p| p >= 0.0)
                    && (r.iter().sum::<f64>() - 1.0).abs() <= 1e-12
            });
        if !dist_ok {
            return Err(Error::ParameterViolation(
                "feature distribution must be P(x | y) rows".into(),
            ));
        }
        Ok(())
    }
}

/// The augmented game: `n + 1` users, prior extended by `P(x^U_{n+1} | y)`.
/// Base users' tables are copied unchanged.
pub fn augment(base: &GameInstance, spec: &AugmentedGameSpec) -> Result<GameInstance> {
    base.validate()?;
    spec.check(base)?;
    let n = base.n_users();
    let ny = base.n_states();
    let nx_new = spec.feature_labels.len();

    let old_dims = base.prior_dims();
    let user_block: usize = old_dims[1..=n].iter().product();
    let provider_block: usize = old_dims[n + 1..].iter().product();
    let mut prior = Vec::with_capacity(base.prior.len() * nx_new);
    for y in 0..ny {
        for u in 0..user_block {
            for x in 0..nx_new {
                for p in 0..provider_block {
                    let old = base.prior[(y * user_block + u) * provider_block + p];
                    prior.push(old * spec.feature_given_state[y][x]);
                }
            }
        }
    }

    let mut dims = base.action_dims();
    dims.push(spec.action_set.len());
    let provider_utils = base
        .provider_utils
        .iter()
        .enumerate()
        .map(|(j, u)| {
            let beta = spec.betas[j];
            let f = &spec.perturbations[j];
            match &u.separable {
                Some(sep) => {
                    let mut weights: Vec<f64> =
                        sep.weights.iter().map(|w| (1.0 - beta) * w).collect();
                    weights.push(beta);
                    let mut components = sep.components.clone();
                    components.push(f.clone());
                    ProviderUtility::separable(weights, components, (1.0 - beta) * sep.constant)
                }
                None => {
                    let old = base.provider_table(j);
                    let mut table = Vec::with_capacity(old.len() * f.len());
                    let mut buf = vec![0; dims.len()];
                    for_each_profile(&dims, &mut buf, &mut |a| {
                        let base_idx = base.profile_index(&a[..n], 0);
                        for y in 0..ny {
                            table.push((1.0 - beta) * old[base_idx + y] + beta * f[a[n]][y]);
                        }
                    });
                    ProviderUtility::dense(table)
                }
            }
        })
        .collect();

    let mut user_features = base.user_features.clone();
    user_features.push(spec.feature_labels.clone());
    let mut action_sets = base.action_sets.clone();
    action_sets.push(spec.action_set.clone());
    let mut user_utils = base.user_utils.clone();
    user_utils.push(spec.user_util.clone());
    let mut tie_break = base.tie_break.clone();
    if !tie_break.actions.is_empty() {
        tie_break.actions.push((0..spec.action_set.len()).collect());
    }
    let out = GameInstance {
        schema_version: base.schema_version,
        states: base.states.clone(),
        user_features,
        provider_features: base.provider_features.clone(),
        prior,
        action_sets,
        user_utils,
        provider_utils,
        message_space: base.message_space.clone(),
        rounds: base.rounds,
        tie_break,
    };
    out.validate()?;
    Ok(out)
}
