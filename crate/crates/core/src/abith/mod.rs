//! Hierarchical sequence model: one [`RankInstance`] per token rank.
//!
//! Each ingested sequence is one learning event. The instance for rank `n`
//! receives the token at position `n` conditioned on the (truncated) tokens
//! before it; raw sequences are not retained. Continuations are scored with
//! the chain rule, and [`HabitModel::predict`] enumerates complete paths
//! depth-first over stored contexts.

mod snapshot;

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::abit::{MarkovOrder, RankInstance};
use crate::probcore::{evidence, EstimatorParams, EventClock, EvidenceDb, TokenId, Vocabulary, Window};
use crate::{Error, Result};

pub use snapshot::SNAPSHOT_FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub window: Window,
    pub order: MarkovOrder,
    pub reserve: f64,
}

impl ModelConfig {
    /// Infinite window, unbounded order, no reserve: plain counting.
    pub fn exact() -> Self {
        Self {
            window: Window::INFINITE,
            order: MarkovOrder::Unbounded,
            reserve: 0.0,
        }
    }

    pub fn params(&self) -> Result<EstimatorParams> {
        EstimatorParams::new(self.window, self.reserve)
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        let params = EstimatorParams::default();
        Self {
            window: params.window,
            order: MarkovOrder::Unbounded,
            reserve: params.reserve,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictOptions {
    pub max_results: usize,
    /// Extensions whose step probability is below this are pruned.
    pub p_min: f64,
}

impl PredictOptions {
    pub fn new(max_results: usize, p_min: f64) -> Result<Self> {
        if max_results == 0 {
            return Err(Error::InvalidConfig("max_results must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&p_min) {
            return Err(Error::InvalidConfig(format!("p_min must be in [0, 1), got {p_min}")));
        }
        Ok(Self { max_results, p_min })
    }
}

impl Default for PredictOptions {
    fn default() -> Self {
        Self {
            max_results: 16,
            p_min: 0.001,
        }
    }
}

/// A scored continuation of a prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPrediction {
    pub tokens: Vec<TokenId>,
    pub names: Vec<String>,
    /// Conditional probability of each continuation token.
    pub step_probs: Vec<f64>,
    pub joint: f64,
    pub evidence: EvidenceDb,
    /// No continuation is known past the last token.
    pub complete: bool,
}

impl PathPrediction {
    /// `1a(0.62) 2a(0.87) 3b(0.57) 4c(0.75) -> (-5 dB)`
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, p) in self.names.iter().zip(&self.step_probs) {
            let _ = write!(out, "{name}({p:.2}) ");
        }
        let _ = write!(out, "-> ({})", self.evidence);
        out
    }

    pub fn path_string(&self) -> String {
        self.names.join(" ")
    }
}

fn rank_order(a: &PathPrediction, b: &PathPrediction) -> Ordering {
    b.joint
        .partial_cmp(&a.joint)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.names.cmp(&b.names))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HabitModel {
    config: ModelConfig,
    params: EstimatorParams,
    instances: Vec<RankInstance>,
    clock: EventClock,
    vocab: Vocabulary,
}

impl HabitModel {
    pub fn new(config: ModelConfig) -> Result<Self> {
        let params = config.params()?;
        Ok(Self {
            config,
            params,
            instances: Vec::new(),
            clock: EventClock::default(),
            vocab: Vocabulary::new(),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn clock(&self) -> EventClock {
        self.clock
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn instances(&self) -> &[RankInstance] {
        &self.instances
    }

    /// Length of the longest ingested sequence.
    pub fn max_len(&self) -> usize {
        self.instances.len()
    }

    /// Total number of stored (context, outcome) entries over all ranks.
    pub fn model_size(&self) -> usize {
        self.instances.iter().map(RankInstance::entry_count).sum()
    }

    /// Ingests one sequence given by token names, interning new names.
    pub fn ingest<S: AsRef<str>>(&mut self, names: &[S]) -> Result<()> {
        if names.is_empty() {
            return Err(Error::EmptySequence);
        }
        for n in names {
            Vocabulary::validate_name(n.as_ref())?;
        }
        let ids = names
            .iter()
            .map(|n| self.vocab.intern(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.ingest_ids(&ids)
    }

    /// Ingests one sequence of already interned tokens.
    pub fn ingest_ids(&mut self, seq: &[TokenId]) -> Result<()> {
        if seq.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(bad) = seq.iter().find(|t| t.0 as usize >= self.vocab.len()) {
            return Err(Error::UnknownTokenId(bad.0));
        }
        self.clock = self.clock.tick();
        while self.instances.len() < seq.len() {
            let rank = self.instances.len() + 1;
            self.instances
                .push(RankInstance::new(rank, self.config.order, self.params));
        }
        for (i, &outcome) in seq.iter().enumerate() {
            let context = self.config.order.truncate(&seq[..i]);
            self.instances[i].observe(context, outcome, self.clock)?;
        }
        Ok(())
    }

    /// Token ids for `names`, or `None` if any name is not in the vocabulary.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Option<Vec<TokenId>> {
        names.iter().map(|n| self.vocab.lookup(n.as_ref())).collect()
    }

    fn names_of(&self, ids: &[TokenId]) -> Vec<String> {
        ids.iter()
            .map(|&t| self.vocab.name(t).unwrap_or("?").to_string())
            .collect()
    }

    /// Whether some stored context at the next rank matches `history`.
    pub fn has_continuation(&self, history: &[TokenId]) -> bool {
        self.instances
            .get(history.len())
            .is_some_and(|inst| inst.contains_context(&self.config.order.truncate(history)))
    }

    /// Chain-rule score of `continuation` after `prompt`. An unknown context
    /// or an outcome never seen in its context contributes probability 0.
    pub fn score(&self, prompt: &[TokenId], continuation: &[TokenId]) -> PathPrediction {
        let mut history = prompt.to_vec();
        let mut step_probs = Vec::with_capacity(continuation.len());
        for &tok in continuation {
            let p = match self.instances.get(history.len()) {
                Some(inst) => inst.prob(&self.config.order.truncate(&history), tok, self.clock),
                None => 0.0,
            };
            step_probs.push(p);
            history.push(tok);
        }
        self.build_prediction(continuation.to_vec(), step_probs, !self.has_continuation(&history))
    }

    /// [`score`](Self::score) by token names; `None` if a name is unknown.
    pub fn score_names<P: AsRef<str>, C: AsRef<str>>(
        &self,
        prompt: &[P],
        continuation: &[C],
    ) -> Option<PathPrediction> {
        let prompt = self.resolve(prompt)?;
        let continuation = self.resolve(continuation)?;
        Some(self.score(&prompt, &continuation))
    }

    fn build_prediction(&self, tokens: Vec<TokenId>, step_probs: Vec<f64>, complete: bool) -> PathPrediction {
        let joint: f64 = step_probs.iter().product();
        PathPrediction {
            names: self.names_of(&tokens),
            tokens,
            step_probs,
            joint,
            // joint is a product of values in [0, 1]
            evidence: evidence(joint.clamp(0.0, 1.0)).unwrap_or(EvidenceDb::NAN),
            complete,
        }
    }

    /// Complete continuations of `prompt`, most probable first. Ties are
    /// broken by token-name order.
    pub fn predict(&self, prompt: &[TokenId], opts: &PredictOptions) -> Vec<PathPrediction> {
        let mut found = Vec::new();
        let mut history = prompt.to_vec();
        let mut steps = Vec::new();
        self.extend(&mut history, prompt.len(), &mut steps, opts.p_min, &mut found);
        found.sort_by(rank_order);
        found.truncate(opts.max_results);
        found
    }

    /// [`predict`](Self::predict) by token names. A prompt containing an
    /// unknown token has no known continuation.
    pub fn predict_names<S: AsRef<str>>(&self, prompt: &[S], opts: &PredictOptions) -> Vec<PathPrediction> {
        match self.resolve(prompt) {
            Some(ids) => self.predict(&ids, opts),
            None => Vec::new(),
        }
    }

    fn extend(
        &self,
        history: &mut Vec<TokenId>,
        prompt_len: usize,
        steps: &mut Vec<f64>,
        p_min: f64,
        found: &mut Vec<PathPrediction>,
    ) {
        let estimator = self
            .instances
            .get(history.len())
            .and_then(|inst| inst.estimator(&self.config.order.truncate(history)));
        let Some(estimator) = estimator else {
            if history.len() > prompt_len {
                let tokens = history[prompt_len..].to_vec();
                found.push(self.build_prediction(tokens, steps.clone(), true));
            }
            return;
        };
        for (tok, p) in estimator.distribution(self.clock) {
            if p <= 0.0 || p < p_min {
                continue;
            }
            history.push(tok);
            steps.push(p);
            self.extend(history, prompt_len, steps, p_min, found);
            steps.pop();
            history.pop();
        }
    }
}
