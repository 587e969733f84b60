//! Deciban evidence scale and the elementary Bayes update.

use std::fmt;

use crate::{Error, Result};

/// Display clamp for evidence values, in dB.
pub const DISPLAY_CLAMP_DB: f64 = 100.0;

/// Log-odds in decibans: `10·log10(p / (1 - p))`. 0 dB is 50 %, +20 dB is
/// 99 %. Certainty and impossibility map to ±∞; a NaN value marks a path that
/// carries no joint evidence (a strict prefix of other paths).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EvidenceDb(f64);

impl EvidenceDb {
    pub const NAN: EvidenceDb = EvidenceDb(f64::NAN);

    pub fn db(self) -> f64 {
        self.0
    }

    pub fn is_nan(self) -> bool {
        self.0.is_nan()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Value rounded to the nearest integer dB and clamped to ±100 dB.
    /// `None` for the NaN marker.
    pub fn display_db(self) -> Option<i64> {
        if self.0.is_nan() {
            return None;
        }
        Some(self.0.clamp(-DISPLAY_CLAMP_DB, DISPLAY_CLAMP_DB).round() as i64)
    }

    /// Probability corresponding to this evidence.
    pub fn probability(self) -> f64 {
        let odds = 10f64.powf(self.0 / 10.0);
        if odds.is_infinite() {
            1.0
        } else {
            odds / (1.0 + odds)
        }
    }
}

impl fmt::Display for EvidenceDb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.display_db() {
            Some(db) => write!(f, "{db} dB"),
            None => f.write_str("NaN"),
        }
    }
}

pub fn evidence(p: f64) -> Result<EvidenceDb> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityDomain(p));
    }
    let db = if p == 0.0 {
        f64::NEG_INFINITY
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        10.0 * (p / (1.0 - p)).log10()
    };
    Ok(EvidenceDb(db))
}

/// Posterior of a hypothesis after a positive test:
/// `prior·tpr / (prior·tpr + (1 - prior)·fpr)`.
pub fn bayes_posterior(prior: f64, tpr: f64, fpr: f64) -> Result<f64> {
    for p in [prior, tpr, fpr] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityDomain(p));
        }
    }
    let hit = prior * tpr;
    let denom = hit + (1.0 - prior) * fpr;
    if denom == 0.0 {
        return Err(Error::UndefinedPosterior);
    }
    Ok(hit / denom)
}
