use crate::error::Result;
use crate::game::Game;

use super::cert::{StrongAlignmentCert, WeakAlignmentCert};

/// Reads a strong certificate as a weak one: `F_{j,i} = u^U_i`, the same
/// provider weights, and user weights `1/n*` spread over the `n*` providers
/// that put positive weight on the user.
pub fn strong_implies_weak(game: &Game, cert: &StrongAlignmentCert) -> Result<WeakAlignmentCert> {
    cert.validate(game)?;
    let n = game.n_users();
    let t = cert.providers.len();
    let mut user_weights = vec![vec![0.0; n]; t];
    for i in 0..n {
        let covering: Vec<usize> = (0..t).filter(|&tt| cert.weights[tt][i] > 0.0).collect();
        let share = 1.0 / covering.len() as f64;
        for tt in covering {
            user_weights[tt][i] = share;
        }
    }
    Ok(WeakAlignmentCert {
        providers: cert.providers.clone(),
        components: vec![game.user_utils.clone(); t],
        provider_weights: cert.weights.clone(),
        provider_intercepts: cert.intercepts.clone(),
        user_weights,
        user_intercepts: vec![0.0; n],
        eps_p: cert.eps,
        eps_u: 0.0,
    })
}
