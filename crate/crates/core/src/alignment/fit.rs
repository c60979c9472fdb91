use std::collections::BTreeMap;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{for_each_profile, Game};

use super::cert::StrongAlignmentCert;
use super::check::{check_strong, profile_space};

/// Solution of `min eps` s.t. `|target - (x . w + c)| <= eps`, `w >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub eps: f64,
}

/// Minimax linear fit with nonnegative weights and a free intercept.
///
/// Identical rows are merged before the LP is built.
pub fn chebyshev_fit(rows: &[(Vec<f64>, f64)]) -> Result<ChebyshevFit> {
    let width = rows.first().map_or(0, |r| r.0.len());
    if rows
        .iter()
        .any(|(x, t)| x.len() != width || !t.is_finite() || x.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::NonFinite(
            "fit rows must be finite and equally wide".into(),
        ));
    }
    let mut unique: BTreeMap<Vec<u64>, (&[f64], f64)> = BTreeMap::new();
    for (x, t) in rows {
        let key: Vec<u64> = x
            .iter()
            .chain(std::iter::once(t))
            .map(|v| v.to_bits())
            .collect();
        unique.entry(key).or_insert((x.as_slice(), *t));
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let w: Vec<_> = (0..width)
        .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let c = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let eps = lp.add_var(1.0, (0.0, f64::INFINITY));
    for (x, t) in unique.values() {
        let mut terms: Vec<_> = w.iter().copied().zip(x.iter().copied()).collect();
        terms.push((c, 1.0));
        let mut upper = terms.clone();
        upper.push((eps, -1.0));
        lp.add_constraint(upper, ComparisonOp::Le, *t);
        terms.push((eps, 1.0));
        lp.add_constraint(terms, ComparisonOp::Ge, *t);
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::Lp(e.to_string()))?
        .into_solution()
        .map_err(|_| Error::Lp("solve interrupted".into()))?;
    let weights: Vec<f64> = w.iter().map(|&v| solution.var_value(v).max(0.0)).collect();
    let intercept = solution.var_value(c);
    // recompute the radius from the returned point
    let achieved = unique
        .values()
        .map(|(x, t)| {
            let fit: f64 = x.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>() + intercept;
            (t - fit).abs()
        })
        .fold(0.0, f64::max);
    Ok(ChebyshevFit {
        weights,
        intercept,
        eps: achieved,
    })
}

/// Best worst-case strong certificate for one provider over a user subset.
///
/// Users outside `users` get weight zero.
pub fn fit_strong_exact(
    game: &Game,
    provider: usize,
    users: &[usize],
) -> Result<StrongAlignmentCert> {
    if provider >= game.n_providers() || users.iter().any(|&i| i >= game.n_users()) {
        return Err(Error::DimensionMismatch(
            "provider or user out of range".into(),
        ));
    }
    profile_space(game)?;
    let dims = game.action_dims();
    let ny = game.n_states();
    let table = game.provider_table(provider);
    let mut rows = Vec::with_capacity(table.len());
    let mut buf = vec![0; dims.len()];
    let mut cell = 0;
    for_each_profile(&dims, &mut buf, &mut |a| {
        for y in 0..ny {
            let x: Vec<f64> = users.iter().map(|&i| game.user_utils[i][a[i]][y]).collect();
            rows.push((x, table[cell]));
            cell += 1;
        }
    });
    let fit = chebyshev_fit(&rows)?;
    let mut weights = vec![0.0; game.n_users()];
    for (&i, &w) in users.iter().zip(&fit.weights) {
        weights[i] = w;
    }
    let mut cert = StrongAlignmentCert {
        providers: vec![provider],
        weights: vec![weights],
        intercepts: vec![fit.intercept],
        eps: 0.0,
    };
    cert.eps = check_strong(game, &cert)?;
    Ok(cert)
}

/// Best worst-case user-alignment weights for user `i` given component
/// tables `components[t][a][y]`.
pub fn fit_weak_user_exact(
    game: &Game,
    user: usize,
    components: &[Vec<Vec<f64>>],
) -> Result<ChebyshevFit> {
    let utils = game
        .user_utils
        .get(user)
        .ok_or_else(|| Error::DimensionMismatch(format!("no user {user}")))?;
    let mut rows = Vec::new();
    for (a, row) in utils.iter().enumerate() {
        for (y, &u) in row.iter().enumerate() {
            let x = components
                .iter()
                .map(|f| {
                    f.get(a)
                        .and_then(|r| r.get(y))
                        .copied()
                        .ok_or_else(|| Error::DimensionMismatch("component table shape".into()))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push((x, u));
        }
    }
    chebyshev_fit(&rows)
}
