//! Online, incremental Bayesian modeling of a single user's habitual action
//! sequences.
//!
//! The crate is organised bottom-up:
//!
//! * [`probcore`]: decayed-count frequency estimators, the deciban evidence
//!   scale and an elementary Bayes-rule helper.
//! * [`abit`]: a single-rank conditional model mapping a context (preceding
//!   tokens) to a distribution over the next token.
//! * [`abith`]: the rank hierarchy. Whole sequences are ingested one at a
//!   time, continuations are scored with the chain rule and complete paths
//!   are enumerated and ranked.
//! * [`taskmodel`]: extraction of the prediction graph and DOT emission.
//! * [`simlab`]: built-in navigation scenarios, the exact-counting oracle and
//!   reproducible simulation runners.

pub mod abit;
pub mod abith;
mod error;
pub mod probcore;
pub mod simlab;
pub mod taskmodel;
pub mod util;

pub use abit::{ContextKey, MarkovOrder, RankInstance};
pub use abith::{HabitModel, ModelConfig, PathPrediction, PredictOptions};
pub use error::{Error, Result};
pub use probcore::{
    bayes_posterior, evidence, AdaptiveFrequencyEstimator, EstimatorParams, EventClock,
    EvidenceDb, TokenId, Vocabulary, Window,
};
pub use taskmodel::TaskGraph;
