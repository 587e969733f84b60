//! Decayed-count categorical frequency estimator.
//!
//! Every count is multiplied by `λ = 1 - 1/W` once per global learning
//! event. Decay is applied lazily: an estimator stores the clock value of
//! its last update and catches up on the next write, while reads compute the
//! decayed values on the fly without writing back. With `W = ∞` the estimator
//! degenerates to exact counting.

use std::collections::BTreeMap;
use std::fmt;

use super::TokenId;
use crate::{Error, Result};

/// Number of global learning events seen so far (one per ingested sequence).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventClock(pub u64);

impl EventClock {
    pub fn tick(self) -> Self {
        EventClock(self.0 + 1)
    }
}

impl fmt::Display for EventClock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Analysis window: the time constant of exponential forgetting, measured in
/// global events. Finite windows must be at least 1 so that `λ ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window(f64);

impl Window {
    pub const INFINITE: Window = Window(f64::INFINITY);

    pub fn new(width: f64) -> Result<Self> {
        if width.is_nan() || width < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "window must be >= 1 or infinite, got {width}"
            )));
        }
        Ok(Window(width))
    }

    pub fn width(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Per-event decay factor `λ = 1 - 1/W`.
    pub fn decay_factor(self) -> f64 {
        if self.is_infinite() {
            1.0
        } else {
            1.0 - 1.0 / self.0
        }
    }

    /// Decay accumulated over `events` ticks.
    pub fn decay_over(self, events: u64) -> f64 {
        if events == 0 || self.is_infinite() {
            1.0
        } else {
            self.decay_factor().powf(events as f64)
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Hyperparameters shared by all estimators of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    pub window: Window,
    /// Novelty reserve: denominator mass kept for never-seen outcomes.
    pub reserve: f64,
}

impl EstimatorParams {
    pub fn new(window: Window, reserve: f64) -> Result<Self> {
        if !(reserve.is_finite() && reserve >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "reserve must be a finite non-negative number, got {reserve}"
            )));
        }
        Ok(Self { window, reserve })
    }

    /// Exact counting: infinite window, no reserve.
    pub fn exact() -> Self {
        Self {
            window: Window::INFINITE,
            reserve: 0.0,
        }
    }
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            window: Window(200.0),
            reserve: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveFrequencyEstimator {
    params: EstimatorParams,
    counts: BTreeMap<TokenId, f64>,
    total: f64,
    last_event: EventClock,
}

impl AdaptiveFrequencyEstimator {
    pub fn new(params: EstimatorParams) -> Self {
        Self {
            params,
            counts: BTreeMap::new(),
            total: 0.0,
            last_event: EventClock::default(),
        }
    }

    /// Rebuilds an estimator from persisted state.
    pub fn from_parts(
        params: EstimatorParams,
        counts: BTreeMap<TokenId, f64>,
        total: f64,
        last_event: EventClock,
    ) -> Self {
        Self {
            params,
            counts,
            total,
            last_event,
        }
    }

    pub fn params(&self) -> EstimatorParams {
        self.params
    }

    pub fn last_event(&self) -> EventClock {
        self.last_event
    }

    /// Stored (undecayed) total weight.
    pub fn raw_total(&self) -> f64 {
        self.total
    }

    /// Stored (undecayed) weights, as of [`last_event`](Self::last_event).
    pub fn raw_counts(&self) -> &BTreeMap<TokenId, f64> {
        &self.counts
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    fn decay_to(&self, now: EventClock) -> f64 {
        self.params
            .window
            .decay_over(now.0.saturating_sub(self.last_event.0))
    }

    /// Decay everything to `now`, then add one unit of weight to `outcome`.
    pub fn observe(&mut self, outcome: TokenId, now: EventClock) -> Result<()> {
        if now < self.last_event {
            return Err(Error::ClockRegression {
                now: now.0,
                last: self.last_event.0,
            });
        }
        let factor = self.decay_to(now);
        if factor != 1.0 {
            for w in self.counts.values_mut() {
                *w *= factor;
            }
            self.total *= factor;
        }
        *self.counts.entry(outcome).or_insert(0.0) += 1.0;
        self.total += 1.0;
        self.last_event = now;
        Ok(())
    }

    /// Reserve mass expressed in undecayed units, i.e. `r / decay`, so that
    /// `count / (total + scaled_reserve)` equals the decayed ratio.
    fn scaled_reserve(&self, now: EventClock) -> f64 {
        let r = self.params.reserve;
        if r == 0.0 {
            return 0.0;
        }
        let factor = self.decay_to(now);
        if factor > 0.0 {
            r / factor
        } else {
            f64::INFINITY
        }
    }

    /// Probability of `outcome` at `now`. Seen outcomes get
    /// `count / (total + r)`; an unseen outcome gets the whole reserve
    /// `r / (total + r)`. Callers wanting a per-hypothesis floor must divide
    /// that mass themselves.
    pub fn prob(&self, outcome: TokenId, now: EventClock) -> f64 {
        match self.counts.get(&outcome) {
            Some(&count) => self.ratio(count, now),
            None => self.reserve_prob(now),
        }
    }

    /// Probability restricted to the seen support: unseen outcomes get 0.
    pub fn seen_prob(&self, outcome: TokenId, now: EventClock) -> f64 {
        self.counts
            .get(&outcome)
            .map_or(0.0, |&count| self.ratio(count, now))
    }

    fn ratio(&self, count: f64, now: EventClock) -> f64 {
        let denom = self.total + self.scaled_reserve(now);
        if denom > 0.0 && denom.is_finite() {
            count / denom
        } else {
            0.0
        }
    }

    /// Mass reserved for never-seen outcomes at `now`.
    pub fn reserve_prob(&self, now: EventClock) -> f64 {
        let r = self.params.reserve;
        let decayed = self.effective_count(now);
        if decayed + r > 0.0 {
            r / (decayed + r)
        } else {
            0.0
        }
    }

    /// Decayed total weight: the amount of statistical evidence behind the
    /// estimate.
    pub fn effective_count(&self, now: EventClock) -> f64 {
        self.total * self.decay_to(now)
    }

    /// Seen outcomes with their probabilities, in token-id order.
    pub fn distribution(&self, now: EventClock) -> Vec<(TokenId, f64)> {
        self.counts
            .iter()
            .map(|(&t, &c)| (t, self.ratio(c, now)))
            .collect()
    }
}
