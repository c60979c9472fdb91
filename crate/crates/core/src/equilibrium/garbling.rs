use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Channel, Game};

const GARBLING_TOL: f64 = 1e-9;

/// A common garbling `z` for a provider set.
///
/// `maps[t][x][z]` is `Pr(f_j(x) = z)` for `j = providers[t]`;
/// `reference[y][z]` is `Pr(z | y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GarblingSpec {
    pub labels: Vec<String>,
    pub providers: Vec<usize>,
    pub maps: Vec<Vec<Vec<f64>>>,
    pub reference: Vec<Vec<f64>>,
}

/// Result of [`validate_garbling`]. Violations are data, not errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GarblingCheck {
    pub passed: bool,
    pub max_violation: f64,
}

impl GarblingSpec {
    pub fn n_values(&self) -> usize {
        self.labels.len()
    }

    pub fn map_of(&self, provider: usize) -> Option<&[Vec<f64>]> {
        self.providers
            .iter()
            .position(|&j| j == provider)
            .map(|t| self.maps[t].as_slice())
    }

    /// A single symbol; carries no information.
    pub fn trivial(game: &Game, providers: &[usize]) -> Self {
        Self {
            labels: vec!["*".into()],
            providers: providers.to_vec(),
            maps: providers
                .iter()
                .map(|&j| vec![vec![1.0]; game.provider_features[j].len()])
                .collect(),
            reference: vec![vec![1.0]; game.n_states()],
        }
    }

    /// `z = x` when every provider in the set observes the same feature.
    pub fn identical_features(game: &Game, providers: &[usize]) -> Result<Self> {
        let first = *providers
            .first()
            .ok_or_else(|| Error::InvalidInstance("empty provider set".into()))?;
        let nx = game.provider_features[first].len();
        for &j in providers {
            if game.provider_features[j].len() != nx {
                return Err(Error::NotApplicable(format!(
                    "provider {j} has a different feature space"
                )));
            }
        }
        let same = game.support().iter().all(|e| {
            providers
                .iter()
                .all(|&j| e.provider_feats[j] == e.provider_feats[first])
        });
        if !same {
            return Err(Error::NotApplicable(
                "provider features differ on the prior support".into(),
            ));
        }
        let identity: Vec<Vec<f64>> = (0..nx).map(|x| crate::game::one_hot(nx, x)).collect();
        let mut spec = Self {
            labels: game.provider_features[first].clone(),
            providers: providers.to_vec(),
            maps: vec![identity; providers.len()],
            reference: Vec::new(),
        };
        spec.reference = spec.implied_reference(game, first);
        Ok(spec)
    }

    /// Providers observe subsets of independent coordinates; `z` is the
    /// intersection of those subsets.
    ///
    /// Provider `providers[t]` encodes its feature as the mixed-radix index of
    /// the coordinates `subsets[t]` (ascending, first coordinate most
    /// significant) with radices from `coord_dims`.
    pub fn from_coordinate_subsets(
        game: &Game,
        providers: &[usize],
        coord_dims: &[usize],
        subsets: &[Vec<usize>],
    ) -> Result<Self> {
        if providers.is_empty() || subsets.len() != providers.len() {
            return Err(Error::DimensionMismatch(
                "one coordinate subset per provider".into(),
            ));
        }
        let mut sorted: Vec<Vec<usize>> = subsets.to_vec();
        for (s, &j) in sorted.iter_mut().zip(providers) {
            s.sort_unstable();
            s.dedup();
            if s.iter().any(|&c| c >= coord_dims.len()) {
                return Err(Error::DimensionMismatch(format!(
                    "coordinate out of range for provider {j}"
                )));
            }
            let size: usize = s.iter().map(|&c| coord_dims[c]).product();
            if size != game.provider_features[j].len() {
                return Err(Error::DimensionMismatch(format!(
                    "provider {j} has {} feature values, subset encodes {size}",
                    game.provider_features[j].len()
                )));
            }
        }
        let common: Vec<usize> = sorted[0]
            .iter()
            .copied()
            .filter(|c| sorted.iter().all(|s| s.contains(c)))
            .collect();
        let nz: usize = common.iter().map(|&c| coord_dims[c]).product();
        let labels = (0..nz)
            .map(|z| {
                let digits = decode(
                    z,
                    &common.iter().map(|&c| coord_dims[c]).collect::<Vec<_>>(),
                );
                let parts: Vec<String> = common
                    .iter()
                    .zip(digits)
                    .map(|(c, d)| format!("x{c}={d}"))
                    .collect();
                if parts.is_empty() {
                    "*".to_string()
                } else {
                    parts.join(",")
                }
            })
            .collect();
        let maps = sorted
            .iter()
            .map(|s| {
                let radices: Vec<usize> = s.iter().map(|&c| coord_dims[c]).collect();
                let nx: usize = radices.iter().product();
                (0..nx)
                    .map(|x| {
                        let digits = decode(x, &radices);
                        let mut z = 0;
                        for &c in &common {
                            let pos = s.iter().position(|&d| d == c).expect("common coordinate");
                            z = z * coord_dims[c] + digits[pos];
                        }
                        crate::game::one_hot(nz, z)
                    })
                    .collect()
            })
            .collect();
        let mut spec = Self {
            labels,
            providers: providers.to_vec(),
            maps,
            reference: Vec::new(),
        };
        spec.reference = spec.implied_reference(game, providers[0]);
        Ok(spec)
    }

    /// `Pr(f_j(x^P_j) = z | y)` computed from the prior.
    pub fn implied_reference(&self, game: &Game, provider: usize) -> Vec<Vec<f64>> {
        let nz = self.n_values();
        let map = self.map_of(provider).expect("provider in garbling");
        let mut joint = vec![vec![0.0; nz]; game.n_states()];
        for e in game.support() {
            for (z, &q) in map[e.provider_feats[provider]].iter().enumerate() {
                joint[e.state][z] += e.prob * q;
            }
        }
        let py = game.state_marginal();
        for (row, &p) in joint.iter_mut().zip(&py) {
            if p > 0.0 {
                row.iter_mut().for_each(|v| *v /= p);
            }
        }
        joint
    }

    /// Law of `(y, x^U_i, z)`, taking `z` independent of `x^U_i` given `y`.
    pub fn user_channel(&self, game: &Game, user: usize) -> Channel {
        let nz = self.n_values();
        let mut cells = Vec::new();
        for e in game.support() {
            for z in 0..nz {
                cells.push((
                    e.state,
                    e.user_feats[user],
                    z,
                    e.prob * self.reference[e.state][z],
                ));
            }
        }
        Channel::from_cells(game.n_states(), game.user_features[user].len(), nz, cells)
    }

    fn check_shape(&self, game: &Game) -> Result<()> {
        let nz = self.n_values();
        let ok = self.maps.len() == self.providers.len()
            && self.reference.len() == game.n_states()
            && self.reference.iter().all(|r| r.len() == nz)
            && self.providers.iter().zip(&self.maps).all(|(&j, m)| {
                j < game.n_providers()
                    && m.len() == game.provider_features[j].len()
                    && m.iter().all(|r| r.len() == nz)
            });
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                "garbling tables do not fit the game".into(),
            ))
        }
    }
}

fn decode(mut code: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = code % r;
        code /= r;
    }
    out
}

/// Checks `E[Pr(f_j(x^P_j) = z) | y] = Pr(z | y)` for every `j` in `providers`.
///
/// States with zero prior mass are skipped.
pub fn validate_garbling(
    game: &Game,
    providers: &[usize],
    garbling: &GarblingSpec,
) -> Result<GarblingCheck> {
    garbling.check_shape(game)?;
    let py = game.state_marginal();
    let mut worst: f64 = 0.0;
    for &j in providers {
        let Some(map) = garbling.map_of(j) else {
            return Ok(GarblingCheck {
                passed: false,
                max_violation: f64::INFINITY,
            });
        };
        for row in map {
            if row.iter().any(|&p| p < 0.0) {
                worst = f64::INFINITY;
            }
            worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
        }
        let implied = garbling.implied_reference(game, j);
        for (y, (row, refrow)) in implied.iter().zip(&garbling.reference).enumerate() {
            if py[y] <= 0.0 {
                continue;
            }
            for (a, b) in row.iter().zip(refrow) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(GarblingCheck {
        passed: worst <= GARBLING_TOL,
        max_violation: worst,
    })
}
