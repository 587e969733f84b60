//! Task-model extraction and DOT emission.
//!
//! The graph is built from the ranked predictions for a prompt. Token nodes
//! are merged by `(rank, token)` so that shared menus appear once. Edges are
//! keyed by `(from, to, context, highlight)`: under a high Markov order the
//! same pair of nodes can carry different conditionals depending on the
//! path that led there, and each highlighted path gets its own edges so no
//! edge carries two colors. Every path ends in its own terminal node holding
//! the joint evidence.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::abit::ContextKey;
use crate::abith::{HabitModel, PathPrediction, PredictOptions};
use crate::probcore::TokenId;

pub const DEFAULT_HIGHLIGHTS: usize = 3;

/// Colors of highlighted paths, by rank.
pub const HIGHLIGHT_COLORS: [&str; 6] = ["red", "green", "blue", "orange", "purple", "brown"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphNode {
    /// Absolute position in the sequence (prompt included).
    pub rank: usize,
    pub token: TokenId,
    pub name: String,
}

/// `from == None` is the prompt (root) node.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub from: Option<usize>,
    pub to: usize,
    pub prob: f64,
    pub context: ContextKey,
    /// 1-based highlight rank.
    pub highlight: Option<usize>,
    /// Indices into [`TaskGraph::paths`] of the paths using this edge.
    pub paths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphPath {
    pub prediction: PathPrediction,
    pub highlight: Option<usize>,
    /// Indices into [`TaskGraph::edges`], root to leaf.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskGraph {
    pub prompt: Vec<String>,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub paths: Vec<GraphPath>,
}

/// Extracts the task model for a prompt given by token names. A prompt with
/// an unknown token yields the root alone.
pub fn extract<S: AsRef<str>>(
    model: &HabitModel,
    prompt: &[S],
    opts: &PredictOptions,
    highlights: usize,
) -> TaskGraph {
    let names: Vec<String> = prompt.iter().map(|s| s.as_ref().to_string()).collect();
    match model.resolve(prompt) {
        Some(ids) => build(model, names, &ids, opts, highlights),
        None => TaskGraph {
            prompt: names,
            nodes: Vec::new(),
            edges: Vec::new(),
            paths: Vec::new(),
        },
    }
}

pub fn extract_ids(
    model: &HabitModel,
    prompt: &[TokenId],
    opts: &PredictOptions,
    highlights: usize,
) -> TaskGraph {
    let names = prompt
        .iter()
        .map(|&t| model.vocabulary().name(t).unwrap_or("?").to_string())
        .collect();
    build(model, names, prompt, opts, highlights)
}

fn build(
    model: &HabitModel,
    prompt_names: Vec<String>,
    prompt: &[TokenId],
    opts: &PredictOptions,
    highlights: usize,
) -> TaskGraph {
    let highlights = highlights.min(HIGHLIGHT_COLORS.len());
    let predictions = model.predict(prompt, opts);
    let order = model.config().order;
    let vocab = model.vocabulary();
    let name_of = |t: TokenId| vocab.name(t).unwrap_or("?").to_string();

    let mut node_keys: BTreeMap<(usize, String), TokenId> = BTreeMap::new();
    for pred in &predictions {
        for (j, (&tok, name)) in pred.tokens.iter().zip(&pred.names).enumerate() {
            node_keys.insert((prompt.len() + j + 1, name.clone()), tok);
        }
    }
    let nodes: Vec<GraphNode> = node_keys
        .iter()
        .map(|((rank, name), &token)| GraphNode {
            rank: *rank,
            token,
            name: name.clone(),
        })
        .collect();
    let node_index: BTreeMap<(usize, TokenId), usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| ((n.rank, n.token), i))
        .collect();

    type EdgeKey = (Option<usize>, usize, Option<usize>, Vec<String>);
    let mut edge_map: BTreeMap<EdgeKey, GraphEdge> = BTreeMap::new();
    let mut path_keys: Vec<Vec<EdgeKey>> = Vec::with_capacity(predictions.len());
    for (pi, pred) in predictions.iter().enumerate() {
        let highlight = (pi < highlights).then_some(pi + 1);
        let mut history = prompt.to_vec();
        let mut from = None;
        let mut keys = Vec::with_capacity(pred.tokens.len());
        for (&tok, &prob) in pred.tokens.iter().zip(&pred.step_probs) {
            let to = node_index[&(history.len() + 1, tok)];
            let context = order.truncate(&history);
            let ctx_names = context.tokens().iter().map(|&t| name_of(t)).collect();
            let key = (from, to, highlight, ctx_names);
            edge_map
                .entry(key.clone())
                .or_insert_with(|| GraphEdge {
                    from,
                    to,
                    prob,
                    context,
                    highlight,
                    paths: Vec::new(),
                })
                .paths
                .push(pi);
            keys.push(key);
            history.push(tok);
            from = Some(to);
        }
        path_keys.push(keys);
    }
    let edge_pos: BTreeMap<&EdgeKey, usize> =
        edge_map.keys().enumerate().map(|(i, k)| (k, i)).collect();
    let paths = predictions
        .iter()
        .zip(&path_keys)
        .enumerate()
        .map(|(pi, (pred, keys))| GraphPath {
            prediction: pred.clone(),
            highlight: (pi < highlights).then_some(pi + 1),
            edges: keys.iter().map(|k| edge_pos[k]).collect(),
        })
        .collect();
    let edges = edge_map.into_values().collect();

    TaskGraph {
        prompt: prompt_names,
        nodes,
        edges,
        paths,
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn node_id(n: &GraphNode) -> String {
    format!("n{}_{}", n.rank, n.token.0)
}

fn highlight_attrs(highlight: Option<usize>) -> String {
    match highlight {
        Some(h) => {
            let color = HIGHLIGHT_COLORS[h - 1];
            format!(", color={color}, fontcolor={color}, penwidth=2")
        }
        None => String::new(),
    }
}

impl TaskGraph {
    pub fn root_label(&self) -> String {
        if self.prompt.is_empty() {
            "start".to_string()
        } else {
            self.prompt.join(" ")
        }
    }

    /// Token names along each path, in path order.
    pub fn path_names(&self) -> Vec<Vec<String>> {
        self.paths
            .iter()
            .map(|p| p.edges.iter().map(|&e| self.nodes[self.edges[e].to].name.clone()).collect())
            .collect()
    }

    /// DOT digraph. Node ids are `n<rank>_<token id>`, terminal nodes
    /// `t<path rank>`. Output order is stable: nodes by rank then name, edges
    /// by endpoints, highlight and context.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph task_model {\n");
        let _ = writeln!(out, "  root [label={}];", quote(&self.root_label()));
        for n in &self.nodes {
            let _ = writeln!(out, "  {} [label={}];", node_id(n), quote(&n.name));
        }
        for e in &self.edges {
            let from = e.from.map_or_else(|| "root".to_string(), |i| node_id(&self.nodes[i]));
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{:.2}\"{}];",
                from,
                node_id(&self.nodes[e.to]),
                e.prob,
                highlight_attrs(e.highlight)
            );
        }
        for (i, p) in self.paths.iter().enumerate() {
            let Some(&last) = p.edges.last() else {
                continue;
            };
            let leaf = node_id(&self.nodes[self.edges[last].to]);
            let annotation = match p.highlight {
                Some(h) => format!("({h}) ({})", p.prediction.evidence),
                None => format!("({})", p.prediction.evidence),
            };
            let _ = writeln!(out, "  t{} [label={}{}];", i + 1, quote(&annotation), color_only(p.highlight));
            let _ = writeln!(out, "  {leaf} -> t{}{};", i + 1, edge_color(p.highlight));
        }
        out.push_str("}\n");
        out
    }
}

fn color_only(highlight: Option<usize>) -> String {
    highlight.map_or_else(String::new, |h| {
        let color = HIGHLIGHT_COLORS[h - 1];
        format!(", color={color}, fontcolor={color}")
    })
}

fn edge_color(highlight: Option<usize>) -> String {
    highlight.map_or_else(String::new, |h| {
        format!(" [color={}, penwidth=2]", HIGHLIGHT_COLORS[h - 1])
    })
}
