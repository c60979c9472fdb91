//! Exact finite models of a market where several AI providers commit to
//! conversation rules and several users pick a provider, converse and act.
//!
//! The crate evaluates such markets exactly (no sampling), checks Nash
//! equilibria over declared deviation classes, checks and fits market
//! alignment certificates, builds the standard separating constructions, and
//! runs NNLS-based alignment fits on survey answer distributions.

pub mod alignment;
pub mod cli;
pub mod constructions;
pub mod empirical;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod nnls;

pub use error::{Error, Result};
