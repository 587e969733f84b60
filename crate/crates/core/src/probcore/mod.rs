//! Foundational probability machinery.

mod estimator;
mod evidence;
mod vocab;

pub use estimator::{AdaptiveFrequencyEstimator, EstimatorParams, EventClock, Window};
pub use evidence::{bayes_posterior, evidence, EvidenceDb, DISPLAY_CLAMP_DB};
pub use vocab::{TokenId, Vocabulary};
