//! JSON snapshot document for [`HabitModel`].
//!
//! Layout (format_version 1):
//!
//! ```text
//! { "format_version": 1, "window": 200.0 | "inf", "order": 3 | "inf",
//!   "reserve": 0.5, "clock": 3900, "vocabulary": ["1a", ...],
//!   "instances": [ { "rank": 1, "tables": [ { "context": [..],
//!       "counts": [[token, weight], ..], "total": .., "last_event": .. } ] } ] }
//! ```
//!
//! Weights use the shortest decimal that parses back to the same `f64`.

use std::collections::BTreeMap;
use std::num::NonZeroUsize;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HabitModel, ModelConfig};
use crate::abit::{ContextKey, MarkovOrder, RankInstance};
use crate::probcore::{AdaptiveFrequencyEstimator, EventClock, TokenId, Vocabulary, Window};
use crate::{util, Error, Result};

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
enum Inf {
    #[serde(rename = "inf")]
    Inf,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum MaybeInf<T> {
    Finite(T),
    Inf(Inf),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotDoc {
    format_version: u32,
    window: MaybeInf<f64>,
    order: MaybeInf<usize>,
    reserve: f64,
    clock: u64,
    vocabulary: Vec<String>,
    instances: Vec<InstanceDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    rank: usize,
    tables: Vec<TableDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    context: Vec<u32>,
    counts: Vec<(u32, f64)>,
    total: f64,
    last_event: u64,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<u32>,
}

fn load_err(msg: impl Into<String>) -> Error {
    Error::Snapshot(msg.into())
}

impl HabitModel {
    pub fn to_snapshot(&self) -> String {
        let config = self.config;
        let doc = SnapshotDoc {
            format_version: SNAPSHOT_FORMAT_VERSION,
            window: if config.window.is_infinite() {
                MaybeInf::Inf(Inf::Inf)
            } else {
                MaybeInf::Finite(config.window.width())
            },
            order: match config.order.limit() {
                Some(k) => MaybeInf::Finite(k),
                None => MaybeInf::Inf(Inf::Inf),
            },
            reserve: config.reserve,
            clock: self.clock.0,
            vocabulary: self.vocab.names().to_vec(),
            instances: self
                .instances
                .iter()
                .map(|inst| InstanceDoc {
                    rank: inst.rank(),
                    tables: inst
                        .tables()
                        .iter()
                        .map(|(ctx, est)| TableDoc {
                            context: ctx.tokens().iter().map(|t| t.0).collect(),
                            counts: est.raw_counts().iter().map(|(t, w)| (t.0, *w)).collect(),
                            total: est.raw_total(),
                            last_event: est.last_event().0,
                        })
                        .collect(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("snapshot serialization");
        text.push('\n');
        text
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let probe: VersionProbe =
            serde_json::from_str(text).map_err(|e| load_err(e.to_string()))?;
        match probe.format_version {
            None => return Err(load_err("missing field `format_version`")),
            Some(SNAPSHOT_FORMAT_VERSION) => {}
            Some(v) => {
                return Err(load_err(format!(
                    "unsupported format_version {v} (expected {SNAPSHOT_FORMAT_VERSION})"
                )))
            }
        }
        let doc: SnapshotDoc = serde_json::from_str(text).map_err(|e| load_err(e.to_string()))?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: SnapshotDoc) -> Result<Self> {
        let window = match doc.window {
            MaybeInf::Inf(_) => Window::INFINITE,
            MaybeInf::Finite(w) => Window::new(w).map_err(|e| load_err(format!("window: {e}")))?,
        };
        let order = match doc.order {
            MaybeInf::Inf(_) => MarkovOrder::Unbounded,
            MaybeInf::Finite(k) => NonZeroUsize::new(k)
                .map(MarkovOrder::Bounded)
                .ok_or_else(|| load_err("order: must be >= 1 or \"inf\""))?,
        };
        let config = ModelConfig {
            window,
            order,
            reserve: doc.reserve,
        };
        let mut model =
            HabitModel::new(config).map_err(|e| load_err(format!("reserve: {e}")))?;
        model.clock = EventClock(doc.clock);
        model.vocab = Vocabulary::from_names(&doc.vocabulary)
            .map_err(|e| load_err(format!("vocabulary: {e}")))?;
        let vocab_len = model.vocab.len() as u32;
        let check_token = |t: u32, at: &str| {
            if t < vocab_len {
                Ok(TokenId(t))
            } else {
                Err(load_err(format!("{at}: token index {t} out of range")))
            }
        };

        for (i, inst_doc) in doc.instances.into_iter().enumerate() {
            let rank = i + 1;
            if inst_doc.rank != rank {
                return Err(load_err(format!(
                    "instances[{i}].rank: expected {rank}, found {}",
                    inst_doc.rank
                )));
            }
            let mut inst = RankInstance::new(rank, order, model.params);
            let limit = order.context_limit(rank);
            for (j, table) in inst_doc.tables.into_iter().enumerate() {
                let at = format!("instances[{i}].tables[{j}]");
                if table.context.len() > limit {
                    return Err(load_err(format!("{at}.context: longer than {limit}")));
                }
                let context = ContextKey(
                    table
                        .context
                        .iter()
                        .map(|&t| check_token(t, &at))
                        .collect::<Result<_>>()?,
                );
                if inst.contains_context(&context) {
                    return Err(load_err(format!("{at}.context: duplicate context")));
                }
                let mut counts = BTreeMap::new();
                for &(t, w) in &table.counts {
                    if !(w.is_finite() && w >= 0.0) {
                        return Err(load_err(format!("{at}.counts: invalid weight {w}")));
                    }
                    if counts.insert(check_token(t, &at)?, w).is_some() {
                        return Err(load_err(format!("{at}.counts: duplicate token {t}")));
                    }
                }
                if counts.is_empty() {
                    return Err(load_err(format!("{at}.counts: empty")));
                }
                if !(table.total.is_finite() && table.total >= 0.0) {
                    return Err(load_err(format!("{at}.total: invalid weight {}", table.total)));
                }
                if table.last_event > doc.clock {
                    return Err(load_err(format!("{at}.last_event: after clock {}", doc.clock)));
                }
                inst.insert_table(
                    context,
                    AdaptiveFrequencyEstimator::from_parts(
                        model.params,
                        counts,
                        table.total,
                        EventClock(table.last_event),
                    ),
                );
            }
            model.instances.push(inst);
        }
        Ok(model)
    }

    /// Writes the snapshot atomically.
    pub fn save(&self, path: &Path) -> Result<()> {
        util::write_atomic(path, self.to_snapshot().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_snapshot(&text)
    }
}
