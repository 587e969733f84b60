//! Helpers shared by the integration test targets: a brute-force counting
//! oracle over a retained copy of the stream and a DOT reader built on an
//! independent grammar parser.

#![allow(dead_code)]

use std::collections::HashMap;

use dot_parser::{ast, canonical};
use habitseq::simlab::Scenario;

pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

/// Scenario multiset expanded by copies, in table order.
pub fn expanded(scenario: &Scenario, phase: usize) -> Vec<Vec<String>> {
    scenario.phases[phase]
        .iter()
        .flat_map(|p| std::iter::repeat_n(p.tokens.clone(), p.copies as usize))
        .collect()
}

/// `N(context·outcome) / N(context)` over sequences reaching rank
/// `context.len() + 1`, with the full prefix as context.
pub fn brute_conditional(stream: &[Vec<String>], context: &[String], outcome: &str) -> f64 {
    let rank = context.len() + 1;
    let reaching: Vec<&Vec<String>> = stream
        .iter()
        .filter(|s| s.len() >= rank && s[..rank - 1] == *context)
        .collect();
    if reaching.is_empty() {
        return 0.0;
    }
    let hits = reaching.iter().filter(|s| s[rank - 1] == outcome).count();
    hits as f64 / reaching.len() as f64
}

/// Brute-force conditional where the context is only the last `k` tokens
/// before `rank` (matching any longer prefix ending in them).
pub fn brute_conditional_k(stream: &[Vec<String>], rank: usize, context: &[String], outcome: &str) -> f64 {
    let reaching: Vec<&Vec<String>> = stream
        .iter()
        .filter(|s| s.len() >= rank && s[rank - 1 - context.len()..rank - 1] == *context)
        .collect();
    if reaching.is_empty() {
        return 0.0;
    }
    let hits = reaching.iter().filter(|s| s[rank - 1] == outcome).count();
    hits as f64 / reaching.len() as f64
}

#[derive(Debug)]
pub struct DotEdge {
    pub from: String,
    pub to: String,
    pub attrs: HashMap<String, String>,
}

#[derive(Debug)]
pub struct ParsedDot {
    pub is_digraph: bool,
    pub labels: HashMap<String, String>,
    pub node_attrs: HashMap<String, HashMap<String, String>>,
    pub edges: Vec<DotEdge>,
}

fn attrs<'a>(list: &canonical::AList<(ast::ID<'a>, ast::ID<'a>)>) -> HashMap<String, String> {
    list.elems
        .iter()
        .map(|(k, v)| (k.clone().into(), v.clone().into()))
        .collect()
}

pub fn parse_dot(text: &str) -> Result<ParsedDot, String> {
    let graph = ast::Graph::try_from(text).map_err(|e| e.to_string())?;
    let graph = canonical::Graph::from(graph);
    let mut labels = HashMap::new();
    let mut node_attrs = HashMap::new();
    for (id, node) in &graph.nodes.set {
        let a = attrs(&node.attr);
        if let Some(l) = a.get("label") {
            labels.insert(id.clone(), l.clone());
        }
        node_attrs.insert(id.clone(), a);
    }
    let edges = graph
        .edges
        .set
        .iter()
        .map(|e| DotEdge {
            from: e.from.clone(),
            to: e.to.clone(),
            attrs: attrs(&e.attr),
        })
        .collect();
    Ok(ParsedDot {
        is_digraph: graph.is_digraph,
        labels,
        node_attrs,
        edges,
    })
}

/// One root-to-terminal walk of the emitted graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    pub tokens: Vec<String>,
    pub edge_labels: Vec<String>,
    pub colors: Vec<Option<String>>,
    pub terminal: String,
}

/// Every walk from `root` to a terminal node (`t<k>`).
pub fn walks(dot: &ParsedDot) -> Vec<Walk> {
    let mut out = Vec::new();
    let mut stack = vec![(
        "root".to_string(),
        Walk {
            tokens: vec![],
            edge_labels: vec![],
            colors: vec![],
            terminal: String::new(),
        },
    )];
    while let Some((node, walk)) = stack.pop() {
        for e in dot.edges.iter().filter(|e| e.from == node) {
            let mut w = walk.clone();
            if e.to.starts_with('t') {
                w.terminal = e.to.clone();
                out.push(w);
                continue;
            }
            w.tokens.push(dot.labels[&e.to].clone());
            w.edge_labels.push(e.attrs.get("label").cloned().unwrap_or_default());
            w.colors.push(e.attrs.get("color").cloned());
            stack.push((e.to.clone(), w));
        }
    }
    out
}
