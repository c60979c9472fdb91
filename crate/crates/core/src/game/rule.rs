//! Tabular conversation and decision rules.
//!
//! A game with `R` rounds has transcripts of `2R - 1` messages. The provider
//! speaks at positions 0, 2, 4, .. and the user at positions 1, 3, ..; so
//! `R = 1` is a single provider message and every further round adds one
//! user message followed by one provider message.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_TOL: f64 = 1e-12;
/// Largest number of prefix slots a single table may hold.
pub const MAX_TABLE_SLOTS: u128 = 10_000_000;

pub fn transcript_len(rounds: usize) -> usize {
    2 * rounds - 1
}

pub fn is_provider_turn(position: usize) -> bool {
    position.is_multiple_of(2)
}

/// Dense indexing of every transcript prefix whose length is in `lengths`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixLayout {
    n_messages: usize,
    lengths: Vec<usize>,
    offsets: Vec<usize>,
    total: usize,
}

impl PrefixLayout {
    pub fn new(n_messages: usize, lengths: Vec<usize>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(lengths.len());
        let mut total: u128 = 0;
        for &len in &lengths {
            offsets.push(total as usize);
            total = total.saturating_add(pow_sat(n_messages, len));
            if total > MAX_TABLE_SLOTS {
                return Err(Error::SearchSpaceTooLarge {
                    count: total,
                    cap: MAX_TABLE_SLOTS,
                });
            }
        }
        Ok(Self {
            n_messages,
            lengths,
            offsets,
            total: total as usize,
        })
    }

    pub fn provider(n_messages: usize, rounds: usize) -> Result<Self> {
        Self::new(n_messages, (0..transcript_len(rounds)).step_by(2).collect())
    }

    pub fn user(n_messages: usize, rounds: usize) -> Result<Self> {
        Self::new(n_messages, (1..transcript_len(rounds)).step_by(2).collect())
    }

    pub fn decision(n_messages: usize, rounds: usize) -> Result<Self> {
        Self::new(n_messages, vec![transcript_len(rounds)])
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn n_messages(&self) -> usize {
        self.n_messages
    }

    pub fn slot(&self, prefix: &[usize]) -> Option<usize> {
        let pos = self.lengths.iter().position(|&l| l == prefix.len())?;
        let mut code = 0usize;
        for &m in prefix {
            if m >= self.n_messages {
                return None;
            }
            code = code * self.n_messages + m;
        }
        Some(self.offsets[pos] + code)
    }

    pub fn prefix(&self, slot: usize) -> Vec<usize> {
        let pos = self.offsets.partition_point(|&o| o <= slot) - 1;
        let len = self.lengths[pos];
        let mut code = slot - self.offsets[pos];
        let mut out = vec![0; len];
        for p in (0..len).rev() {
            out[p] = code % self.n_messages;
            code /= self.n_messages;
        }
        out
    }
}

pub(crate) fn pow_sat(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// Rows indexed by (feature, prefix slot); each row is a probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleTable {
    layout: PrefixLayout,
    n_features: usize,
    width: usize,
    rows: Vec<Option<Vec<f64>>>,
}

impl RuleTable {
    pub fn empty(layout: PrefixLayout, n_features: usize, width: usize) -> Self {
        let rows = vec![None; layout.len() * n_features];
        Self {
            layout,
            n_features,
            width,
            rows,
        }
    }

    pub fn layout(&self) -> &PrefixLayout {
        &self.layout
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, feature: usize, prefix: &[usize]) -> Result<&[f64]> {
        let undefined = || Error::UndefinedRuleRow {
            feature,
            prefix: prefix.to_vec(),
        };
        if feature >= self.n_features {
            return Err(undefined());
        }
        let slot = self.layout.slot(prefix).ok_or_else(undefined)?;
        self.rows[feature * self.layout.len() + slot]
            .as_deref()
            .ok_or_else(undefined)
    }

    pub fn set(&mut self, feature: usize, prefix: &[usize], probs: Vec<f64>) -> Result<()> {
        if probs.len() != self.width {
            return Err(Error::DimensionMismatch(format!(
                "row has {} entries, expected {}",
                probs.len(),
                self.width
            )));
        }
        check_distribution(&probs)?;
        let slot = self
            .layout
            .slot(prefix)
            .filter(|_| feature < self.n_features)
            .ok_or_else(|| Error::DimensionMismatch(format!("no slot for prefix {prefix:?}")))?;
        self.rows[feature * self.layout.len() + slot] = Some(probs);
        Ok(())
    }

    pub(crate) fn set_slot_unchecked(&mut self, feature: usize, slot: usize, probs: Vec<f64>) {
        let n = self.layout.len();
        self.rows[feature * n + slot] = Some(probs);
    }

    pub fn is_deterministic(&self) -> bool {
        self.rows
            .iter()
            .flatten()
            .all(|r| r.iter().filter(|&&p| p > 0.0).count() == 1)
    }

    fn to_rows(&self) -> Vec<RowFile> {
        let n = self.layout.len();
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(idx, row)| {
                row.as_ref().map(|probs| RowFile {
                    feature: idx / n,
                    prefix: self.layout.prefix(idx % n),
                    probs: probs.clone(),
                })
            })
            .collect()
    }

    fn from_rows(
        layout: PrefixLayout,
        n_features: usize,
        width: usize,
        rows: Vec<RowFile>,
    ) -> Result<Self> {
        let mut table = Self::empty(layout, n_features, width);
        for row in rows {
            table.set(row.feature, &row.prefix, row.probs)?;
        }
        Ok(table)
    }
}

pub(crate) fn check_distribution(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidInstance(format!(
            "row {probs:?} has negative entries"
        )));
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > ROW_TOL {
        return Err(Error::InvalidInstance(format!("row sums to {s}")));
    }
    Ok(())
}

pub(crate) fn one_hot(width: usize, idx: usize) -> Vec<f64> {
    let mut v = vec![0.0; width];
    v[idx] = 1.0;
    v
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RowFile {
    feature: usize,
    prefix: Vec<usize>,
    probs: Vec<f64>,
}

/// A provider's conversation rule: (own feature, prefix at a provider turn) -> distribution over messages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProviderRuleFile", into = "ProviderRuleFile")]
pub struct ProviderRule {
    rounds: usize,
    table: RuleTable,
}

#[derive(Serialize, Deserialize)]
struct ProviderRuleFile {
    n_features: usize,
    n_messages: usize,
    rounds: usize,
    rows: Vec<RowFile>,
}

impl TryFrom<ProviderRuleFile> for ProviderRule {
    type Error = Error;

    fn try_from(f: ProviderRuleFile) -> Result<Self> {
        let layout = PrefixLayout::provider(f.n_messages, f.rounds.max(1))?;
        Ok(Self {
            rounds: f.rounds,
            table: RuleTable::from_rows(layout, f.n_features, f.n_messages, f.rows)?,
        })
    }
}

impl From<ProviderRule> for ProviderRuleFile {
    fn from(r: ProviderRule) -> Self {
        Self {
            n_features: r.table.n_features,
            n_messages: r.table.width,
            rounds: r.rounds,
            rows: r.table.to_rows(),
        }
    }
}

impl ProviderRule {
    /// A rule with no rows; fill it with [`ProviderRule::set_row`].
    pub fn empty(n_features: usize, n_messages: usize, rounds: usize) -> Result<Self> {
        let layout = PrefixLayout::provider(n_messages, rounds)?;
        Ok(Self {
            rounds,
            table: RuleTable::empty(layout, n_features, n_messages),
        })
    }

    pub fn from_fn(
        n_features: usize,
        n_messages: usize,
        rounds: usize,
        mut f: impl FnMut(usize, &[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        let mut rule = Self::empty(n_features, n_messages, rounds)?;
        let slots = rule.table.layout.len();
        for x in 0..n_features {
            for slot in 0..slots {
                let prefix = rule.table.layout.prefix(slot);
                let row = f(x, &prefix);
                rule.table.set(x, &prefix, row)?;
            }
        }
        Ok(rule)
    }

    pub fn deterministic(
        n_features: usize,
        n_messages: usize,
        rounds: usize,
        mut f: impl FnMut(usize, &[usize]) -> usize,
    ) -> Result<Self> {
        Self::from_fn(n_features, n_messages, rounds, |x, h| {
            one_hot(n_messages, f(x, h))
        })
    }

    /// Every row sends `message`.
    pub fn constant(
        n_features: usize,
        n_messages: usize,
        rounds: usize,
        message: usize,
    ) -> Result<Self> {
        Self::deterministic(n_features, n_messages, rounds, |_, _| message)
    }

    pub fn set_row(&mut self, feature: usize, prefix: &[usize], probs: Vec<f64>) -> Result<()> {
        if !is_provider_turn(prefix.len()) {
            return Err(Error::DimensionMismatch(format!(
                "prefix of length {} is a user turn",
                prefix.len()
            )));
        }
        self.table.set(feature, prefix, probs)
    }

    pub fn row(&self, feature: usize, prefix: &[usize]) -> Result<&[f64]> {
        self.table.row(feature, prefix)
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn n_features(&self) -> usize {
        self.table.n_features
    }

    pub fn n_messages(&self) -> usize {
        self.table.width
    }

    pub fn layout(&self) -> &PrefixLayout {
        &self.table.layout
    }

    pub fn is_deterministic(&self) -> bool {
        self.table.is_deterministic()
    }
}

/// A user's conversation rule and decision rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UserStrategyFile", into = "UserStrategyFile")]
pub struct UserStrategy {
    rounds: usize,
    conversation: RuleTable,
    decision: RuleTable,
}

#[derive(Serialize, Deserialize)]
struct UserStrategyFile {
    n_features: usize,
    n_messages: usize,
    n_actions: usize,
    rounds: usize,
    conversation: Vec<RowFile>,
    decision: Vec<RowFile>,
}

impl TryFrom<UserStrategyFile> for UserStrategy {
    type Error = Error;

    fn try_from(f: UserStrategyFile) -> Result<Self> {
        let mut s = Self::empty(f.n_features, f.n_messages, f.n_actions, f.rounds.max(1))?;
        s.rounds = f.rounds;
        s.conversation = RuleTable::from_rows(
            s.conversation.layout.clone(),
            f.n_features,
            f.n_messages,
            f.conversation,
        )?;
        s.decision = RuleTable::from_rows(
            s.decision.layout.clone(),
            f.n_features,
            f.n_actions,
            f.decision,
        )?;
        Ok(s)
    }
}

impl From<UserStrategy> for UserStrategyFile {
    fn from(s: UserStrategy) -> Self {
        Self {
            n_features: s.decision.n_features,
            n_messages: s.conversation.width,
            n_actions: s.decision.width,
            rounds: s.rounds,
            conversation: s.conversation.to_rows(),
            decision: s.decision.to_rows(),
        }
    }
}

impl UserStrategy {
    pub fn empty(
        n_features: usize,
        n_messages: usize,
        n_actions: usize,
        rounds: usize,
    ) -> Result<Self> {
        Ok(Self {
            rounds,
            conversation: RuleTable::empty(
                PrefixLayout::user(n_messages, rounds)?,
                n_features,
                n_messages,
            ),
            decision: RuleTable::empty(
                PrefixLayout::decision(n_messages, rounds)?,
                n_features,
                n_actions,
            ),
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn n_actions(&self) -> usize {
        self.decision.width
    }

    pub fn message_row(&self, feature: usize, prefix: &[usize]) -> Result<&[f64]> {
        self.conversation.row(feature, prefix)
    }

    pub fn decision_row(&self, feature: usize, transcript: &[usize]) -> Result<&[f64]> {
        self.decision.row(feature, transcript)
    }

    pub fn set_message_row(
        &mut self,
        feature: usize,
        prefix: &[usize],
        probs: Vec<f64>,
    ) -> Result<()> {
        self.conversation.set(feature, prefix, probs)
    }

    pub fn set_decision_row(
        &mut self,
        feature: usize,
        transcript: &[usize],
        probs: Vec<f64>,
    ) -> Result<()> {
        self.decision.set(feature, transcript, probs)
    }

    pub(crate) fn conversation_mut(&mut self) -> &mut RuleTable {
        &mut self.conversation
    }

    pub(crate) fn decision_mut(&mut self) -> &mut RuleTable {
        &mut self.decision
    }

    pub fn is_deterministic(&self) -> bool {
        self.conversation.is_deterministic() && self.decision.is_deterministic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_round_trips_prefixes() {
        let l = PrefixLayout::provider(3, 3).unwrap();
        assert_eq!(l.len(), 1 + 9 + 81);
        for slot in 0..l.len() {
            assert_eq!(l.slot(&l.prefix(slot)), Some(slot));
        }
        assert_eq!(l.slot(&[0]), None);
    }

    #[test]
    fn user_layout_for_single_round_is_empty() {
        assert!(PrefixLayout::user(4, 1).unwrap().is_empty());
        assert_eq!(transcript_len(1), 1);
    }

    #[test]
    fn oversized_layout_is_refused() {
        assert!(matches!(
            PrefixLayout::provider(10, 6),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn missing_row_is_undefined() {
        let r = ProviderRule::empty(2, 2, 1).unwrap();
        assert!(matches!(
            r.row(1, &[]),
            Err(Error::UndefinedRuleRow { feature: 1, .. })
        ));
    }

    #[test]
    fn rows_must_be_distributions() {
        let mut r = ProviderRule::empty(1, 2, 1).unwrap();
        assert!(r.set_row(0, &[], vec![0.5, 0.6]).is_err());
        assert!(r.set_row(0, &[], vec![0.5]).is_err());
        r.set_row(0, &[], vec![0.5, 0.5]).unwrap();
        assert!(!r.is_deterministic());
    }

    #[test]
    fn provider_rule_json_round_trip() {
        let r = ProviderRule::deterministic(2, 3, 2, |x, h| (x + h.len()) % 3).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: ProviderRule = serde_json::from_str(&text).unwrap();
        assert_eq!(r, back);
        assert!(back.is_deterministic());
    }
}
