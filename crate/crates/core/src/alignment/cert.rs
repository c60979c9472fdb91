use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameInstance;

/// Weak market alignment over a provider subset `T`.
///
/// Entries indexed by `t` refer to `providers[t]`. Components are laid out
/// `components[t][i][a][y]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakAlignmentCert {
    pub providers: Vec<usize>,
    pub components: Vec<Vec<Vec<Vec<f64>>>>,
    pub provider_weights: Vec<Vec<f64>>,
    pub provider_intercepts: Vec<f64>,
    pub user_weights: Vec<Vec<f64>>,
    pub user_intercepts: Vec<f64>,
    pub eps_p: f64,
    pub eps_u: f64,
}

/// Strong market alignment: `u^P_j ~ sum_i weights[t][i] u^U_i + intercepts[t]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongAlignmentCert {
    pub providers: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub eps: f64,
}

/// Either certificate, tagged for JSON files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlignmentCert {
    Weak(WeakAlignmentCert),
    Strong(StrongAlignmentCert),
}

fn check_providers(game: &GameInstance, providers: &[usize]) -> Result<()> {
    let mut seen = vec![false; game.n_providers()];
    for &j in providers {
        if j >= game.n_providers() || std::mem::replace(&mut seen[j], true) {
            return Err(Error::DimensionMismatch(format!(
                "bad provider subset {providers:?}"
            )));
        }
    }
    Ok(())
}

fn nonneg(vals: impl IntoIterator<Item = f64>) -> bool {
    vals.into_iter().all(|v| v.is_finite() && v >= 0.0)
}

impl WeakAlignmentCert {
    /// Table shapes only.
    pub fn check_shape(&self, game: &GameInstance) -> Result<()> {
        check_providers(game, &self.providers)?;
        let t = self.providers.len();
        let n = game.n_users();
        let shape_ok = self.components.len() == t
            && self.provider_weights.len() == t
            && self.provider_intercepts.len() == t
            && self.user_weights.len() == t
            && self.user_intercepts.len() == n
            && self.provider_weights.iter().all(|r| r.len() == n)
            && self.user_weights.iter().all(|r| r.len() == n)
            && self.components.iter().all(|per_user| {
                per_user.len() == n
                    && per_user.iter().enumerate().all(|(i, tab)| {
                        tab.len() == game.action_sets[i].len()
                            && tab.iter().all(|r| r.len() == game.n_states())
                    })
            });
        if !shape_ok {
            return Err(Error::DimensionMismatch("weak certificate shape".into()));
        }
        Ok(())
    }

    /// Shape, sign, coverage and implication checks.
    pub fn validate(&self, game: &GameInstance) -> Result<()> {
        self.check_shape(game)?;
        let (t, n) = (self.providers.len(), game.n_users());
        let signs_ok = nonneg(self.provider_weights.iter().flatten().copied())
            && nonneg(self.user_weights.iter().flatten().copied())
            && nonneg(
                self.components
                    .iter()
                    .flatten()
                    .flatten()
                    .flatten()
                    .copied(),
            )
            && nonneg([self.eps_p, self.eps_u]);
        if !signs_ok {
            return Err(Error::ParameterViolation(
                "weak certificate has negative entries".into(),
            ));
        }
        for i in 0..n {
            for tt in 0..t {
                if self.user_weights[tt][i] > 0.0 && self.provider_weights[tt][i] <= 0.0 {
                    return Err(Error::ParameterViolation(format!(
                        "user weight of provider {} on user {i} is positive but its provider weight is not",
                        self.providers[tt]
                    )));
                }
            }
            let covered = (0..t)
                .any(|tt| self.provider_weights[tt][i] > 0.0 && self.user_weights[tt][i] > 0.0);
            if !covered {
                return Err(Error::CoverageViolation { user: i });
            }
        }
        Ok(())
    }
}

impl StrongAlignmentCert {
    pub fn check_shape(&self, game: &GameInstance) -> Result<()> {
        check_providers(game, &self.providers)?;
        let n = game.n_users();
        if self.weights.len() != self.providers.len()
            || self.intercepts.len() != self.providers.len()
            || self.weights.iter().any(|r| r.len() != n)
        {
            return Err(Error::DimensionMismatch("strong certificate shape".into()));
        }
        Ok(())
    }

    pub fn validate(&self, game: &GameInstance) -> Result<()> {
        self.check_shape(game)?;
        if !nonneg(self.weights.iter().flatten().copied()) || !nonneg([self.eps]) {
            return Err(Error::ParameterViolation(
                "strong certificate has negative entries".into(),
            ));
        }
        self.check_coverage()
    }

    pub fn check_coverage(&self) -> Result<()> {
        let n = self.weights.first().map_or(0, Vec::len);
        for i in 0..n {
            if !self.weights.iter().any(|r| r[i] > 0.0) {
                return Err(Error::CoverageViolation { user: i });
            }
        }
        Ok(())
    }

    /// `lambda*_i = max_t weights[t][i]`.
    pub fn max_weights(&self) -> Vec<f64> {
        let n = self.weights.first().map_or(0, Vec::len);
        (0..n)
            .map(|i| self.weights.iter().map(|r| r[i]).fold(0.0, f64::max))
            .collect()
    }
}
