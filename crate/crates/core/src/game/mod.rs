//! Exact representation and evaluation of the finite conversation market.

mod distribution;
mod instance;
mod interaction;
mod joint;
mod rule;

use std::ops::Deref;

pub use distribution::InducedDistribution;
pub use instance::{
    GameInstance, PriorEntry, ProviderUtility, SeparableUtility, TieBreak, INSTANCE_SCHEMA_VERSION,
};
pub use interaction::{
    best_response_decision, optimal_user_strategy, select_provider, simulate_interaction,
    user_utility_against, Channel, ChannelEntry, UserResponse, DEFAULT_ENUMERATION_CAP, TIE_TOL,
};
pub use joint::{induced_joint, MarketOutcome, Profile};
pub use rule::{is_provider_turn, transcript_len, PrefixLayout, ProviderRule, UserStrategy};

pub(crate) use instance::for_each_profile;
pub(crate) use interaction::{argmax_by_priority, solve_user};
pub(crate) use joint::joint_from_responses;
pub(crate) use rule::{one_hot, pow_sat};

use crate::error::Result;

/// A validated instance together with the tables every evaluation needs.
#[derive(Clone, Debug)]
pub struct Game {
    instance: GameInstance,
    support: Vec<PriorEntry>,
    provider_tables: Vec<Vec<f64>>,
}

impl Game {
    pub fn new(instance: GameInstance) -> Result<Self> {
        instance.validate()?;
        let support = instance.support();
        let provider_tables = (0..instance.n_providers())
            .map(|j| instance.provider_table(j))
            .collect();
        Ok(Self {
            instance,
            support,
            provider_tables,
        })
    }

    pub fn instance(&self) -> &GameInstance {
        &self.instance
    }

    pub fn into_instance(self) -> GameInstance {
        self.instance
    }

    pub fn support(&self) -> &[PriorEntry] {
        &self.support
    }

    /// Dense `u^P_j` over `(a_1, .., a_n, y)`.
    pub fn provider_table(&self, j: usize) -> &[f64] {
        &self.provider_tables[j]
    }

    /// Marginal of the prior over the state.
    pub fn state_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states()];
        for e in &self.support {
            out[e.state] += e.prob;
        }
        out
    }
}

impl Deref for Game {
    type Target = GameInstance;

    fn deref(&self) -> &GameInstance {
        &self.instance
    }
}
