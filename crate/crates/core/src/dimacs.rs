//! DIMACS max-flow format.
//!
//! ```text
//! c comment
//! p max <n> <m>
//! n <id> s
//! n <id> t
//! a <tail> <head> <cap>
//! ```
//!
//! Vertex ids are 1-based in files and 0-based everywhere else.

use std::fmt::Write as _;

use thiserror::Error;

use crate::generators::Instance;
use crate::network::{Capacity, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("line {0}: more than one problem line")]
    DuplicateProblemLine(usize),
    #[error("missing source or sink designation")]
    MissingSourceOrSink,
    #[error("problem line declares {declared} arcs, found {found}")]
    ArcCountMismatch { declared: usize, found: usize },
}

fn syntax(line: usize, message: impl Into<String>) -> DimacsError {
    DimacsError::SyntaxError {
        line,
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(line: usize, token: Option<&str>, what: &str) -> Result<T, DimacsError> {
    let token = token.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{token}`")))
}

fn vertex(line: usize, token: Option<&str>, n: usize) -> Result<VertexId, DimacsError> {
    let id: usize = number(line, token, "vertex id")?;
    if id == 0 || id > n {
        return Err(syntax(line, format!("vertex id {id} outside 1..={n}")));
    }
    Ok(id - 1)
}

/// Parses a DIMACS max-flow problem. The returned instance has an empty label.
pub fn parse_dimacs(text: &str) -> Result<Instance, DimacsError> {
    let mut problem: Option<(usize, usize)> = None;
    let mut source = None;
    let mut sink = None;
    let mut arcs: Vec<(VertexId, VertexId, Capacity)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tokens = raw.split_whitespace();
        let Some(kind) = tokens.next() else {
            continue;
        };
        match kind {
            "c" => continue,
            "p" => {
                if problem.is_some() {
                    return Err(DimacsError::DuplicateProblemLine(line));
                }
                if tokens.next() != Some("max") {
                    return Err(syntax(line, "expected `p max <n> <m>`"));
                }
                let n = number(line, tokens.next(), "vertex count")?;
                let m = number(line, tokens.next(), "arc count")?;
                problem = Some((n, m));
            }
            "n" => {
                let (n, _) = problem.ok_or_else(|| syntax(line, "node line before problem line"))?;
                let v = vertex(line, tokens.next(), n)?;
                let slot = match tokens.next() {
                    Some("s") => &mut source,
                    Some("t") => &mut sink,
                    _ => return Err(syntax(line, "expected `n <id> s` or `n <id> t`")),
                };
                if slot.replace(v).is_some() {
                    return Err(syntax(line, "source or sink designated twice"));
                }
            }
            "a" => {
                let (n, _) = problem.ok_or_else(|| syntax(line, "arc line before problem line"))?;
                let tail = vertex(line, tokens.next(), n)?;
                let head = vertex(line, tokens.next(), n)?;
                let cap = number(line, tokens.next(), "capacity")?;
                arcs.push((tail, head, cap));
            }
            other => return Err(syntax(line, format!("unknown line type `{other}`"))),
        }
        if tokens.next().is_some() {
            return Err(syntax(line, "trailing tokens"));
        }
    }

    let (n, m) = problem.ok_or_else(|| syntax(0, "missing problem line"))?;
    let (Some(source), Some(sink)) = (source, sink) else {
        return Err(DimacsError::MissingSourceOrSink);
    };
    if arcs.len() != m {
        return Err(DimacsError::ArcCountMismatch {
            declared: m,
            found: arcs.len(),
        });
    }
    Ok(Instance {
        vertex_count: n,
        arcs,
        source,
        sink,
        label: String::new(),
    })
}

/// Canonical DIMACS text: problem line, source, sink, then arcs in stored
/// order, each line ending in a single `\n`. Labels are not written.
pub fn write_dimacs(inst: &Instance) -> String {
    let mut out = String::with_capacity(16 * (inst.arcs.len() + 3));
    let _ = writeln!(out, "p max {} {}", inst.vertex_count, inst.arcs.len());
    let _ = writeln!(out, "n {} s", inst.source + 1);
    let _ = writeln!(out, "n {} t", inst.sink + 1);
    for &(u, v, c) in &inst.arcs {
        let _ = writeln!(out, "a {} {} {}", u + 1, v + 1, c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_arc() {
        let inst = parse_dimacs("c hello\np max 2 1\nn 1 s\nn 2 t\na 1 2 5\n").unwrap();
        assert_eq!(inst.vertex_count, 2);
        assert_eq!(inst.arcs, vec![(0, 1, 5)]);
        assert_eq!((inst.source, inst.sink), (0, 1));
    }

    #[test]
    fn writes_canonical_form() {
        let inst = parse_dimacs("p max 2 1\nn 1 s\nn 2 t\na 1 2 5").unwrap();
        assert_eq!(write_dimacs(&inst), "p max 2 1\nn 1 s\nn 2 t\na 1 2 5\n");
    }

    #[test]
    fn accepts_sink_before_source_and_blank_lines() {
        let inst = parse_dimacs("p max 3 1\n\nn 3 t\nn 1 s\n  a 1 3 2  \n").unwrap();
        assert_eq!((inst.source, inst.sink), (0, 2));
    }

    #[test]
    fn errors() {
        assert_eq!(
            parse_dimacs("p max 2 1\np max 2 1\nn 1 s\nn 2 t\na 1 2 5\n"),
            Err(DimacsError::DuplicateProblemLine(2))
        );
        assert_eq!(
            parse_dimacs("p max 2 1\nn 1 s\na 1 2 5\n"),
            Err(DimacsError::MissingSourceOrSink)
        );
        assert_eq!(
            parse_dimacs("p max 2 2\nn 1 s\nn 2 t\na 1 2 5\n"),
            Err(DimacsError::ArcCountMismatch {
                declared: 2,
                found: 1
            })
        );
        assert!(matches!(
            parse_dimacs("p max 2 1\nn 1 s\nn 2 t\na 1 3 5\n"),
            Err(DimacsError::SyntaxError { line: 4, .. })
        ));
        assert!(matches!(
            parse_dimacs("p max 2 1\nn 1 s\nn 2 t\na 1 2 x\n"),
            Err(DimacsError::SyntaxError { line: 4, .. })
        ));
        assert!(matches!(
            parse_dimacs("p min 2 1\n"),
            Err(DimacsError::SyntaxError { line: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs("a 1 2 3\n"),
            Err(DimacsError::SyntaxError { line: 1, .. })
        ));
        assert!(matches!(
            parse_dimacs("p max 2 1\nn 1 s\nn 2 s\n"),
            Err(DimacsError::SyntaxError { line: 3, .. })
        ));
    }
}
