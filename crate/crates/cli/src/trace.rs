//! Trace files: one sequence per line, tokens separated by single spaces.
//! Lines starting with `//` are comments (tokens themselves may start with
//! `#`); blank lines are skipped.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for TraceError {}

pub fn parse_trace(text: &str) -> Result<Vec<Vec<String>>, TraceError> {
    let mut sequences = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with("//") {
            continue;
        }
        let err = |message: String| TraceError {
            line: i + 1,
            message,
        };
        let mut seq = Vec::new();
        for tok in line.split(' ') {
            if tok.is_empty() {
                return Err(err("empty token (tokens are separated by single spaces)".into()));
            }
            if tok.chars().any(char::is_whitespace) {
                return Err(err(format!("token {tok:?} contains whitespace")));
            }
            seq.push(tok.to_string());
        }
        sequences.push(seq);
    }
    Ok(sequences)
}
