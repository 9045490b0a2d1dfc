//! Plain-text edge-list format.
//!
//! ```text
//! # family=torus
//! # side=3
//! # dim=1
//! 3 3
//! 0 1
//! 0 2
//! 1 2
//! ```
//!
//! Optional `# key=value` metadata lines precede the `n m` header; then
//! `m` lines `u v` with `u < v`, sorted. A declared family is kept only if
//! regenerating it reproduces the same edge set; otherwise the graph is
//! tagged [`Family::Custom`] and treated as unverified.

use std::fmt::Write as _;

use super::{Family, Graph};
use crate::{Error, Result};

pub fn write_graph(g: &Graph) -> String {
    let mut out = String::new();
    let fam = g.family();
    let _ = writeln!(out, "# family={}", fam.name());
    for (k, v) in fam.params() {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "{} {}", g.n(), g.m());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn read_graph(text: &str) -> Result<Graph> {
    let mut meta: Vec<(String, String)> = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| Error::Parse {
            line: line_no,
            reason,
        };
        if let Some(comment) = line.strip_prefix('#') {
            if header.is_some() {
                return Err(err("metadata after the header".into()));
            }
            if let Some((k, v)) = comment.trim().split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let a = it.next().and_then(|t| t.parse::<u64>().ok());
        let b = it.next().and_then(|t| t.parse::<u64>().ok());
        let (a, b) = match (a, b, it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(err(format!(
                    "expected two non-negative integers, got `{line}`"
                )))
            }
        };
        match header {
            None => {
                header = Some((a as usize, b as usize));
                edges.reserve(b as usize);
            }
            Some((n, m)) => {
                if edges.len() == m {
                    return Err(err(format!("more than the declared {m} edges")));
                }
                if a >= b || b >= n as u64 {
                    return Err(err(format!("edge `{line}` violates 0 <= u < v < {n}")));
                }
                let e = (a as u32, b as u32);
                if let Some(&prev) = edges.last() {
                    if e <= prev {
                        return Err(err(format!("edge `{line}` out of order or repeated")));
                    }
                }
                edges.push(e);
            }
        }
    }
    let (n, m) = header.ok_or(Error::Parse {
        line: last_line,
        reason: "missing `n m` header".into(),
    })?;
    if edges.len() != m {
        return Err(Error::Parse {
            line: last_line,
            reason: format!("declared {m} edges, found {}", edges.len()),
        });
    }
    let graph = Graph::from_sorted_unique(
        n,
        edges,
        Family::Custom {
            name: "file".into(),
        },
    );

    let declared = meta.iter().position(|(k, _)| k == "family").map(|i| {
        let name = meta[i].1.clone();
        let rest: Vec<(String, String)> = meta
            .iter()
            .filter(|(k, _)| k != "family")
            .cloned()
            .collect();
        (name, rest)
    });
    if let Some((name, params)) = declared {
        if name == "custom" {
            if let Ok(fam @ Family::Custom { .. }) = Family::from_params(&name, &params) {
                return Ok(graph.with_family(fam));
            }
        } else if let Ok(fam) = Family::from_params(&name, &params) {
            if let Ok(rebuilt) = fam.build() {
                if rebuilt.n() == graph.n() && rebuilt.edges() == graph.edges() {
                    return Ok(graph.with_family(fam));
                }
            }
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;
    use crate::graph::{Group, GroupSpec};
    use crate::Seed;

    #[test]
    fn exact_text() {
        let g = make_cycle(3).unwrap();
        assert_eq!(
            write_graph(&g),
            "# family=torus\n# side=3\n# dim=1\n3 3\n0 1\n0 2\n1 2\n"
        );
    }

    #[test]
    fn round_trip_keeps_family() {
        for g in [
            make_torus(4, 2).unwrap(),
            make_cycle_matching(20, Seed(3)).unwrap(),
            make_product_cycle(&make_hypercube(2).unwrap(), 3).unwrap(),
            make_cayley(&GroupSpec::standard(Group::Symmetric { m: 4 }).unwrap()).unwrap(),
            make_path(5).unwrap(),
        ] {
            let back = read_graph(&write_graph(&g)).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn tampered_family_becomes_custom() {
        let text = "# family=torus\n# side=3\n# dim=1\n3 2\n0 1\n1 2\n";
        let g = read_graph(text).unwrap();
        assert!(matches!(g.family(), Family::Custom { .. }));
        assert!(!g.family().is_transitive());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("3 1\n1 0\n", 2),
            ("3 2\n0 1\n0 1\n", 3),
            ("3 1\n0 5\n", 2),
            ("3 2\n0 1\n", 2),
            ("3 1\n0 1\n1 2\n", 3),
            ("x y\n", 1),
        ];
        for (text, line) in cases {
            match read_graph(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
