use serde::{Deserialize, Serialize};

/// Exact law over `(a_1, .., a_m, y)`, flat in row-major order.
///
/// The single-user form has one action dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedDistribution {
    pub action_dims: Vec<usize>,
    pub n_states: usize,
    pub probs: Vec<f64>,
}

impl InducedDistribution {
    pub fn zeros(action_dims: Vec<usize>, n_states: usize) -> Self {
        let len = action_dims.iter().product::<usize>() * n_states;
        Self {
            action_dims,
            n_states,
            probs: vec![0.0; len],
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn state_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states];
        for (idx, p) in self.probs.iter().enumerate() {
            out[idx % self.n_states] += p;
        }
        out
    }

    /// Marginal over `(a_i, y)` as `[a][y]`.
    pub fn user_marginal(&self, i: usize) -> Vec<Vec<f64>> {
        let stride: usize = self.action_dims[i + 1..].iter().product::<usize>() * self.n_states;
        let dim = self.action_dims[i];
        let mut out = vec![vec![0.0; self.n_states]; dim];
        for (idx, p) in self.probs.iter().enumerate() {
            let a = (idx / stride) % dim;
            out[a][idx % self.n_states] += p;
        }
        out
    }

    /// `E[table]` for a table laid out like `probs`.
    pub fn expect(&self, table: &[f64]) -> f64 {
        self.probs.iter().zip(table).map(|(p, u)| p * u).sum()
    }

    /// Probability of a single cell.
    pub fn get(&self, profile: &[usize], state: usize) -> f64 {
        let mut idx = 0;
        for (a, d) in profile.iter().zip(&self.action_dims) {
            idx = idx * d + a;
        }
        self.probs[idx * self.n_states + state]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginals_of_a_joint_table() {
        // dims (2, 3), two states
        let mut d = InducedDistribution::zeros(vec![2, 3], 2);
        d.probs[(3 + 2) * 2 + 1] = 0.25;
        d.probs[0] = 0.75;
        assert_eq!(d.get(&[1, 2], 1), 0.25);
        assert_eq!(d.user_marginal(0)[1][1], 0.25);
        assert_eq!(d.user_marginal(1)[2][1], 0.25);
        assert_eq!(d.state_marginal(), vec![0.75, 0.25]);
    }
}
