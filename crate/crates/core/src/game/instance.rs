use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version stamped into every serialized game instance.
pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

const PRIOR_TOL: f64 = 1e-12;
const UTIL_TOL: f64 = 1e-12;

/// Finite description of a conversation market.
///
/// Table layouts (all row-major):
/// - `prior` is flat over `(y, x^U_1, .., x^U_n, x^P_1, .., x^P_k)`.
/// - `user_utils[i][a][y]`.
/// - a dense provider table is flat over `(a_1, .., a_n, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameInstance {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub states: Vec<String>,
    pub user_features: Vec<Vec<String>>,
    pub provider_features: Vec<Vec<String>>,
    pub prior: Vec<f64>,
    pub action_sets: Vec<Vec<String>>,
    pub user_utils: Vec<Vec<Vec<f64>>>,
    pub provider_utils: Vec<ProviderUtility>,
    pub message_space: Vec<String>,
    pub rounds: usize,
    #[serde(default)]
    pub tie_break: TieBreak,
}

fn default_schema() -> u32 {
    INSTANCE_SCHEMA_VERSION
}

/// A provider's utility over joint action profiles and states.
///
/// At least one of the two forms must be present. When both are present the
/// separable form must expand to the dense table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProviderUtility {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separable: Option<SeparableUtility>,
}

/// `sum_i weights[i] * components[i][a_i][y] + constant`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableUtility {
    pub weights: Vec<f64>,
    pub components: Vec<Vec<Vec<f64>>>,
    pub constant: f64,
}

impl ProviderUtility {
    pub fn dense(table: Vec<f64>) -> Self {
        Self {
            dense: Some(table),
            separable: None,
        }
    }

    pub fn separable(weights: Vec<f64>, components: Vec<Vec<Vec<f64>>>, constant: f64) -> Self {
        Self {
            dense: None,
            separable: Some(SeparableUtility {
                weights,
                components,
                constant,
            }),
        }
    }
}

impl SeparableUtility {
    pub fn expand(&self, action_dims: &[usize], n_states: usize) -> Vec<f64> {
        let total: usize = action_dims.iter().product::<usize>() * n_states;
        let mut out = Vec::with_capacity(total);
        let mut profile = vec![0usize; action_dims.len()];
        for_each_profile(action_dims, &mut profile, &mut |p| {
            for y in 0..n_states {
                let v: f64 = p
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| self.weights[i] * self.components[i][a][y])
                    .sum();
                out.push(v + self.constant);
            }
        });
        out
    }
}

/// Priority orders used for every argmax. Empty vectors mean index order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TieBreak {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub providers: Vec<usize>,
}

/// One nonzero cell of the prior.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorEntry {
    pub prob: f64,
    pub state: usize,
    pub user_feats: Vec<usize>,
    pub provider_feats: Vec<usize>,
}

/// Calls `f` on every action profile in row-major order.
pub(crate) fn for_each_profile(dims: &[usize], buf: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    fn rec(dims: &[usize], buf: &mut [usize], depth: usize, f: &mut dyn FnMut(&[usize])) {
        if depth == dims.len() {
            f(buf);
            return;
        }
        for a in 0..dims[depth] {
            buf[depth] = a;
            rec(dims, buf, depth + 1, f);
        }
    }
    rec(dims, buf, 0, f)
}

impl GameInstance {
    pub fn n_users(&self) -> usize {
        self.action_sets.len()
    }

    pub fn n_providers(&self) -> usize {
        self.provider_utils.len()
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_messages(&self) -> usize {
        self.message_space.len()
    }

    pub fn action_dims(&self) -> Vec<usize> {
        self.action_sets.iter().map(Vec::len).collect()
    }

    /// Shape of the prior table: states, then user features, then provider features.
    pub fn prior_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.n_states()];
        dims.extend(self.user_features.iter().map(Vec::len));
        dims.extend(self.provider_features.iter().map(Vec::len));
        dims
    }

    pub fn prior_index(
        &self,
        state: usize,
        user_feats: &[usize],
        provider_feats: &[usize],
    ) -> usize {
        let dims = self.prior_dims();
        let mut idx = state;
        for (d, &x) in dims[1..]
            .iter()
            .zip(user_feats.iter().chain(provider_feats))
        {
            idx = idx * d + x;
        }
        idx
    }

    pub fn profile_index(&self, profile: &[usize], state: usize) -> usize {
        let mut idx = 0;
        for (a, len) in profile.iter().zip(self.action_sets.iter().map(Vec::len)) {
            idx = idx * len + a;
        }
        idx * self.n_states() + state
    }

    /// Nonzero prior cells in row-major order.
    pub fn support(&self) -> Vec<PriorEntry> {
        let dims = self.prior_dims();
        let n = self.n_users();
        let mut out = Vec::new();
        let mut coords = vec![0usize; dims.len()];
        for &p in &self.prior {
            if p > 0.0 {
                out.push(PriorEntry {
                    prob: p,
                    state: coords[0],
                    user_feats: coords[1..1 + n].to_vec(),
                    provider_feats: coords[1 + n..].to_vec(),
                });
            }
            for d in (0..dims.len()).rev() {
                coords[d] += 1;
                if coords[d] < dims[d] {
                    break;
                }
                coords[d] = 0;
            }
        }
        out
    }

    /// Dense provider table, expanding the separable form when needed.
    pub fn provider_table(&self, j: usize) -> Vec<f64> {
        let u = &self.provider_utils[j];
        match (&u.dense, &u.separable) {
            (Some(d), _) => d.clone(),
            (None, Some(s)) => s.expand(&self.action_dims(), self.n_states()),
            (None, None) => Vec::new(),
        }
    }

    /// Action priority for user `i`, highest first.
    pub fn action_order(&self, i: usize) -> Vec<usize> {
        match self.tie_break.actions.get(i) {
            Some(order) if !order.is_empty() => order.clone(),
            _ => (0..self.action_sets[i].len()).collect(),
        }
    }

    pub fn provider_order(&self) -> Vec<usize> {
        if self.tie_break.providers.is_empty() {
            (0..self.n_providers()).collect()
        } else {
            self.tie_break.providers.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.schema_version != INSTANCE_SCHEMA_VERSION {
            return bad(format!(
                "unsupported schema version {}",
                self.schema_version
            ));
        }
        if self.states.is_empty() {
            return bad("no states".into());
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.message_space.is_empty() {
            return bad("empty message space".into());
        }
        let n = self.n_users();
        let k = self.n_providers();
        if self.user_features.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} user feature spaces for {} users",
                self.user_features.len(),
                n
            )));
        }
        if self.provider_features.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} provider feature spaces for {} providers",
                self.provider_features.len(),
                k
            )));
        }
        for (i, acts) in self.action_sets.iter().enumerate() {
            if acts.is_empty() {
                return Err(Error::EmptyActionSet(i));
            }
        }
        if self
            .user_features
            .iter()
            .chain(&self.provider_features)
            .any(Vec::is_empty)
        {
            return bad("every feature space needs at least one value".into());
        }

        let expected: usize = self.prior_dims().iter().product();
        if self.prior.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "prior has {} entries, expected {}",
                self.prior.len(),
                expected
            )));
        }
        if self
            .prior
            .iter()
            .any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0)
        {
            return bad("prior entries must lie in [0, 1]".into());
        }
        let total: f64 = self.prior.iter().sum();
        if (total - 1.0).abs() > PRIOR_TOL {
            return bad(format!("prior sums to {total}"));
        }

        let ys = self.n_states();
        if self.user_utils.len() != n {
            return Err(Error::DimensionMismatch("user_utils length".into()));
        }
        for (i, table) in self.user_utils.iter().enumerate() {
            if table.len() != self.action_sets[i].len() || table.iter().any(|r| r.len() != ys) {
                return Err(Error::DimensionMismatch(format!(
                    "user {i} utility table shape"
                )));
            }
            if table.iter().flatten().any(|u| !in_unit(*u)) {
                return bad(format!("user {i} utility outside [0, 1]"));
            }
        }

        let dims = self.action_dims();
        let profiles: usize = dims.iter().product::<usize>() * ys;
        for (j, util) in self.provider_utils.iter().enumerate() {
            if let Some(sep) = &util.separable {
                if sep.weights.len() != n || sep.components.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "provider {j} separable form needs one component per user"
                    )));
                }
                for (i, comp) in sep.components.iter().enumerate() {
                    if comp.len() != dims[i] || comp.iter().any(|r| r.len() != ys) {
                        return Err(Error::DimensionMismatch(format!(
                            "provider {j} component for user {i}"
                        )));
                    }
                }
                if !sep.constant.is_finite()
                    || sep
                        .weights
                        .iter()
                        .chain(sep.components.iter().flatten().flatten())
                        .any(|v| !v.is_finite())
                {
                    return bad(format!("provider {j} separable form is not finite"));
                }
            }
            let table = match (&util.dense, &util.separable) {
                (None, None) => return bad(format!("provider {j} has no utility table")),
                (Some(d), sep) => {
                    if d.len() != profiles {
                        return Err(Error::DimensionMismatch(format!(
                            "provider {j} dense table has {} entries, expected {profiles}",
                            d.len()
                        )));
                    }
                    if let Some(sep) = sep {
                        let expanded = sep.expand(&dims, ys);
                        let gap = d
                            .iter()
                            .zip(&expanded)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        if gap > UTIL_TOL {
                            return bad(format!(
                                "provider {j} separable form differs from dense table by {gap}"
                            ));
                        }
                    }
                    d.clone()
                }
                (None, Some(sep)) => sep.expand(&dims, ys),
            };
            if table.iter().any(|u| !in_unit(*u)) {
                return bad(format!("provider {j} utility outside [0, 1]"));
            }
        }

        for (i, order) in self.tie_break.actions.iter().enumerate() {
            if i >= n || (!order.is_empty() && !is_permutation(order, dims[i])) {
                return bad(format!("tie-break order for user {i} is not a permutation"));
            }
        }
        if !self.tie_break.providers.is_empty() && !is_permutation(&self.tie_break.providers, k) {
            return bad("provider tie-break order is not a permutation".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn in_unit(u: f64) -> bool {
    u.is_finite() && (-UTIL_TOL..=1.0 + UTIL_TOL).contains(&u)
}

fn is_permutation(order: &[usize], len: usize) -> bool {
    let mut seen = vec![false; len];
    order.len() == len
        && order
            .iter()
            .all(|&x| x < len && !std::mem::replace(&mut seen[x], true))
}
