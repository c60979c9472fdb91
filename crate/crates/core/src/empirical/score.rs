//! Utilities derived from a predicted answer distribution.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Floor for the log score.
pub const LOG_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreRule {
    #[default]
    Linear,
    Log,
    Brier,
}

impl ScoreRule {
    pub const ALL: [ScoreRule; 3] = [ScoreRule::Linear, ScoreRule::Log, ScoreRule::Brier];

    pub fn name(self) -> &'static str {
        match self {
            ScoreRule::Linear => "linear",
            ScoreRule::Log => "log",
            ScoreRule::Brier => "brier",
        }
    }
}

impl fmt::Display for ScoreRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScoreRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ScoreRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::ParameterViolation(format!("unknown score rule {s}")))
    }
}

/// `v(a)` for every option `a`, each in `[0, 1]`.
///
/// * linear: `q(a)`
/// * log: `(log max(q(a), tau) - log tau) / (-log tau)`
/// * brier: `1/2 + q(a) - |q|^2 / 2`
pub fn score_transform(q: &[f64], rule: ScoreRule) -> Vec<f64> {
    match rule {
        ScoreRule::Linear => q.to_vec(),
        ScoreRule::Log => {
            let lt = LOG_FLOOR.ln();
            q.iter()
                .map(|&p| ((p.max(LOG_FLOOR).ln() - lt) / -lt).clamp(0.0, 1.0))
                .collect()
        }
        ScoreRule::Brier => {
            let sq: f64 = q.iter().map(|p| p * p).sum();
            q.iter()
                .map(|&p| (0.5 + p - 0.5 * sq).clamp(0.0, 1.0))
                .collect()
        }
    }
}

/// `table[q][a]` scored row by row.
pub fn score_table(table: &[Vec<f64>], rule: ScoreRule) -> Vec<Vec<f64>> {
    table.iter().map(|row| score_transform(row, rule)).collect()
}
