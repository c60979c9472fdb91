use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{for_each_profile, Game, DEFAULT_ENUMERATION_CAP};

use super::cert::{StrongAlignmentCert, WeakAlignmentCert};

/// Achieved radii of a weak certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakResiduals {
    pub eps_p: f64,
    pub eps_u: f64,
}

pub(crate) fn profile_space(game: &Game) -> Result<u128> {
    let count = game
        .action_dims()
        .iter()
        .fold(game.n_states() as u128, |acc, &d| {
            acc.saturating_mul(d as u128)
        });
    if count > DEFAULT_ENUMERATION_CAP {
        return Err(Error::ProfileSpaceTooLarge {
            count,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    Ok(count)
}

/// Exact worst-case residuals of the provider-separability and
/// user-alignment conditions. Coverage is not required here.
pub fn check_weak(game: &Game, cert: &WeakAlignmentCert) -> Result<WeakResiduals> {
    cert.check_shape(game)?;
    profile_space(game)?;
    let dims = game.action_dims();
    let ny = game.n_states();
    let mut eps_p: f64 = 0.0;
    for (t, &j) in cert.providers.iter().enumerate() {
        let table = game.provider_table(j);
        let mut buf = vec![0; dims.len()];
        let mut cell = 0;
        for_each_profile(&dims, &mut buf, &mut |a| {
            for y in 0..ny {
                let fit: f64 = a
                    .iter()
                    .enumerate()
                    .map(|(i, &ai)| cert.provider_weights[t][i] * cert.components[t][i][ai][y])
                    .sum::<f64>()
                    + cert.provider_intercepts[t];
                eps_p = eps_p.max((table[cell] - fit).abs());
                cell += 1;
            }
        });
    }
    let mut eps_u: f64 = 0.0;
    for i in 0..game.n_users() {
        for (a, row) in game.user_utils[i].iter().enumerate() {
            for (y, &u) in row.iter().enumerate() {
                let fit: f64 = (0..cert.providers.len())
                    .map(|t| cert.user_weights[t][i] * cert.components[t][i][a][y])
                    .sum::<f64>()
                    + cert.user_intercepts[i];
                eps_u = eps_u.max((u - fit).abs());
            }
        }
    }
    Ok(WeakResiduals { eps_p, eps_u })
}

/// Exact worst-case residual of `u^P_j - (sum_i lambda_{j,i} u^U_i + c_j)` over `j` in `T`.
pub fn check_strong(game: &Game, cert: &StrongAlignmentCert) -> Result<f64> {
    cert.check_shape(game)?;
    profile_space(game)?;
    let dims = game.action_dims();
    let ny = game.n_states();
    let mut eps: f64 = 0.0;
    for (t, &j) in cert.providers.iter().enumerate() {
        let table = game.provider_table(j);
        let mut buf = vec![0; dims.len()];
        let mut cell = 0;
        for_each_profile(&dims, &mut buf, &mut |a| {
            for y in 0..ny {
                let fit: f64 = a
                    .iter()
                    .enumerate()
                    .map(|(i, &ai)| cert.weights[t][i] * game.user_utils[i][ai][y])
                    .sum::<f64>()
                    + cert.intercepts[t];
                eps = eps.max((table[cell] - fit).abs());
                cell += 1;
            }
        });
    }
    Ok(eps)
}
