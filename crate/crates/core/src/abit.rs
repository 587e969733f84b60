//! Single-rank adaptive classifier.
//!
//! A [`RankInstance`] predicts the token found at one position of a
//! sequence. It keeps one [`AdaptiveFrequencyEstimator`] per conditioning
//! context (the preceding tokens, truncated to the Markov order), created the
//! first time the context is seen. Storing `P(next | context)` directly gives
//! the same posterior as forming the joint over the context and dividing by
//! the context marginal, without estimating the chained likelihood factors.

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroUsize;

use crate::probcore::{AdaptiveFrequencyEstimator, EstimatorParams, EventClock, TokenId};
use crate::{Error, Result};

/// Maximum number of preceding tokens a prediction conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarkovOrder {
    Bounded(NonZeroUsize),
    /// Condition on the full prefix.
    #[default]
    Unbounded,
}

impl MarkovOrder {
    pub fn bounded(k: usize) -> Result<Self> {
        NonZeroUsize::new(k)
            .map(MarkovOrder::Bounded)
            .ok_or_else(|| Error::InvalidConfig("Markov order must be >= 1".into()))
    }

    pub fn limit(self) -> Option<usize> {
        match self {
            MarkovOrder::Bounded(k) => Some(k.get()),
            MarkovOrder::Unbounded => None,
        }
    }

    /// Longest context allowed when predicting the token at `rank` (1-based).
    pub fn context_limit(self, rank: usize) -> usize {
        let before = rank.saturating_sub(1);
        self.limit().map_or(before, |k| k.min(before))
    }

    /// The last `min(k, history.len())` tokens of `history`.
    pub fn truncate(self, history: &[TokenId]) -> ContextKey {
        let keep = self.limit().map_or(history.len(), |k| k.min(history.len()));
        ContextKey(history[history.len() - keep..].to_vec())
    }
}

impl fmt::Display for MarkovOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkovOrder::Bounded(k) => write!(f, "{k}"),
            MarkovOrder::Unbounded => f.write_str("auto"),
        }
    }
}

/// Ordered tuple of preceding tokens. Equality is order-sensitive.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContextKey(pub Vec<TokenId>);

impl ContextKey {
    pub fn empty() -> Self {
        ContextKey(Vec::new())
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankInstance {
    rank: usize,
    order: MarkovOrder,
    params: EstimatorParams,
    tables: BTreeMap<ContextKey, AdaptiveFrequencyEstimator>,
}

impl RankInstance {
    /// `rank` is 1-based.
    pub fn new(rank: usize, order: MarkovOrder, params: EstimatorParams) -> Self {
        debug_assert!(rank >= 1);
        Self {
            rank,
            order,
            params,
            tables: BTreeMap::new(),
        }
    }

    pub(crate) fn insert_table(&mut self, context: ContextKey, est: AdaptiveFrequencyEstimator) {
        self.tables.insert(context, est);
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> MarkovOrder {
        self.order
    }

    pub fn tables(&self) -> &BTreeMap<ContextKey, AdaptiveFrequencyEstimator> {
        &self.tables
    }

    pub fn estimator(&self, context: &ContextKey) -> Option<&AdaptiveFrequencyEstimator> {
        self.tables.get(context)
    }

    pub fn contains_context(&self, context: &ContextKey) -> bool {
        self.tables.contains_key(context)
    }

    /// Number of stored (context, outcome) entries.
    pub fn entry_count(&self) -> usize {
        self.tables.values().map(|e| e.support_len()).sum()
    }

    /// Records `outcome` under `context`, creating the context's estimator on
    /// first sight. No other context is touched.
    pub fn observe(&mut self, context: ContextKey, outcome: TokenId, now: EventClock) -> Result<()> {
        let limit = self.order.context_limit(self.rank);
        if context.len() > limit {
            return Err(Error::ContextTooLong {
                rank: self.rank,
                len: context.len(),
                limit,
            });
        }
        let params = self.params;
        self.tables
            .entry(context)
            .or_insert_with(|| AdaptiveFrequencyEstimator::new(params))
            .observe(outcome, now)
    }

    /// Distribution over the next token given `context`. Empty when the
    /// context has never been seen (no continuation known).
    pub fn posterior(&self, context: &ContextKey, now: EventClock) -> BTreeMap<TokenId, f64> {
        self.tables
            .get(context)
            .map(|e| e.distribution(now).into_iter().collect())
            .unwrap_or_default()
    }

    /// Probability of `outcome` restricted to the seen support of `context`:
    /// 0 for an unknown context or an unseen outcome.
    pub fn prob(&self, context: &ContextKey, outcome: TokenId, now: EventClock) -> f64 {
        self.tables
            .get(context)
            .map_or(0.0, |e| e.seen_prob(outcome, now))
    }
}
