//! Parser for the plain-text graph description format.
//!
//! ```text
//! # comment
//! [vertices]
//! # id kind z        (kind: interior | exterior | infinity | boundary)
//! 0 exterior 0.0
//! 1 infinity inf
//! [edges]
//! # id a b v_at_a v_at_b
//! 0 0.0 inf 0 1
//! [options]
//! relax_degree = false
//! ```
//!
//! Rows must list ids in order starting from 0. Unknown sections and unknown
//! option keys are rejected.

use super::{build_graph, GraphSpec, MetricGraph, VertexKind};
use crate::{Error, Result};

#[derive(PartialEq)]
enum Section {
    None,
    Vertices,
    Edges,
    Options,
}

pub fn parse_graph_file(text: &str) -> Result<MetricGraph> {
    let mut spec = GraphSpec::default();
    let mut section = Section::None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| Error::BadGraphFile(format!("line {}: {}", lineno + 1, msg));

        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| fail("unterminated section".into()))?;
            section = match name {
                "vertices" => Section::Vertices,
                "edges" => Section::Edges,
                "options" => Section::Options,
                other => return Err(fail(format!("unknown section [{other}]"))),
            };
            continue;
        }

        match section {
            Section::None => return Err(fail("data before any section header".into())),
            Section::Vertices => {
                let cols: Vec<&str> = line.split_whitespace().collect();
                if cols.len() != 3 {
                    return Err(fail(format!(
                        "expected `id kind z`, got {} columns",
                        cols.len()
                    )));
                }
                let id: usize = cols[0].parse().map_err(|_| fail("bad vertex id".into()))?;
                if id != spec.vertices.len() {
                    return Err(fail(format!(
                        "vertex ids must be consecutive, expected {}",
                        spec.vertices.len()
                    )));
                }
                let kind = match cols[1] {
                    "interior" => VertexKind::Interior,
                    "exterior" => VertexKind::Exterior,
                    "infinity" => VertexKind::Infinity,
                    "boundary" => VertexKind::TruncationBoundary,
                    other => return Err(fail(format!("unknown vertex kind `{other}`"))),
                };
                let z = parse_real(cols[2]).ok_or_else(|| fail("bad z value".into()))?;
                spec.vertices.push((kind, z));
            }
            Section::Edges => {
                let cols: Vec<&str> = line.split_whitespace().collect();
                if cols.len() != 5 {
                    return Err(fail(format!(
                        "expected `id a b v_at_a v_at_b`, got {} columns",
                        cols.len()
                    )));
                }
                let id: usize = cols[0].parse().map_err(|_| fail("bad edge id".into()))?;
                if id != spec.edges.len() {
                    return Err(fail(format!(
                        "edge ids must be consecutive, expected {}",
                        spec.edges.len()
                    )));
                }
                let a = parse_real(cols[1]).ok_or_else(|| fail("bad interval start".into()))?;
                let b = parse_real(cols[2]).ok_or_else(|| fail("bad interval end".into()))?;
                let va: usize = cols[3].parse().map_err(|_| fail("bad v_at_a".into()))?;
                let vb: usize = cols[4].parse().map_err(|_| fail("bad v_at_b".into()))?;
                spec.edges.push((a, b, va, vb));
            }
            Section::Options => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| fail("options use `key = value`".into()))?;
                match key.trim() {
                    "relax_degree" => {
                        spec.relax_degree = value
                            .trim()
                            .parse()
                            .map_err(|_| fail("relax_degree must be true or false".into()))?;
                    }
                    other => return Err(fail(format!("unknown option `{other}`"))),
                }
            }
        }
    }

    if spec.vertices.is_empty() {
        return Err(Error::BadGraphFile("no [vertices] section".into()));
    }
    build_graph(&spec)
}

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "inf" | "+inf" => Some(f64::INFINITY),
        _ => {
            let v: f64 = s.parse().ok()?;
            v.is_finite().then_some(v)
        }
    }
}
