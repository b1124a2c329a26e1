//! Metric graphs and their compact truncations.
//!
//! A graph consists of vertices carrying a level value `z` and edges
//! identified with intervals `[a, b]` in level coordinates (`b` may be
//! infinite for the single unbounded edge). Interior vertices sit where
//! level-set components merge and carry the Kirchhoff flux condition;
//! exterior vertices sit at extrema where the diffusion coefficient
//! vanishes.

mod parse;

pub use parse::parse_graph_file;

use crate::{Error, Result};

/// Index of a vertex within a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

/// Index of an edge within a graph. Edge ids are stable under truncation so
/// coefficient fields built on the full graph remain valid on the truncated
/// one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    /// Saddle of the underlying Hamiltonian; carries the Kirchhoff condition.
    Interior,
    /// Local extremum; incident to exactly one edge, alpha vanishes here.
    Exterior,
    /// The point at infinity terminating the unbounded edge.
    Infinity,
    /// Artificial vertex `O_{n+1} = (R+1, m)` created by truncation.
    TruncationBoundary,
}

#[derive(Debug, Clone, Copy)]
pub struct Vertex {
    pub id: VertexId,
    pub kind: VertexKind,
    /// Level value `H(x_i)`; `f64::INFINITY` sentinel for the infinity vertex.
    pub z: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub id: EdgeId,
    /// Lower end of the interval.
    pub a: f64,
    /// Upper end of the interval, `f64::INFINITY` for the unbounded edge.
    pub b: f64,
    pub v_at_a: VertexId,
    pub v_at_b: VertexId,
}

impl Edge {
    pub fn is_unbounded(&self) -> bool {
        self.b.is_infinite()
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.a && z <= self.b
    }

    /// Incidence sign of this edge at vertex `v`: `+1` when the level
    /// coordinate decreases along the edge towards `v` (i.e. `v` sits at the
    /// lower end), `-1` when it increases towards `v`.
    pub fn sign_at(&self, v: VertexId) -> Option<i8> {
        if v == self.v_at_a {
            Some(1)
        } else if v == self.v_at_b {
            Some(-1)
        } else {
            None
        }
    }

    fn other_end(&self, v: VertexId) -> VertexId {
        if v == self.v_at_a {
            self.v_at_b
        } else {
            self.v_at_a
        }
    }
}

/// Validated connected metric graph.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    /// Incident edge ids per vertex.
    adjacency: Vec<Vec<EdgeId>>,
    relax_degree: bool,
}

/// Mutable description accepted by [`build_graph`].
#[derive(Clone, Default)]
pub struct GraphSpec {
    pub vertices: Vec<(VertexKind, f64)>,
    /// `(a, b, v_at_a, v_at_b)` with vertex positions indexing `vertices`.
    pub edges: Vec<(f64, f64, usize, usize)>,
    /// Skip the degree-3 rule for interior vertices (synthetic test graphs).
    pub relax_degree: bool,
}

impl GraphSpec {
    pub fn vertex(&mut self, kind: VertexKind, z: f64) -> usize {
        self.vertices.push((kind, z));
        self.vertices.len() - 1
    }

    pub fn edge(&mut self, a: f64, b: f64, va: usize, vb: usize) -> usize {
        self.edges.push((a, b, va, vb));
        self.edges.len() - 1
    }
}

const Z_TOL: f64 = 1e-9;

/// Validates a graph description and produces an immutable [`MetricGraph`].
pub fn build_graph(spec: &GraphSpec) -> Result<MetricGraph> {
    let vertices: Vec<Vertex> = spec
        .vertices
        .iter()
        .enumerate()
        .map(|(i, &(kind, z))| Vertex {
            id: VertexId(i),
            kind,
            z,
        })
        .collect();

    let n_inf = vertices
        .iter()
        .filter(|v| v.kind == VertexKind::Infinity)
        .count();
    if n_inf > 1 {
        return Err(Error::Invalid(
            "at most one infinity vertex is allowed".into(),
        ));
    }

    let mut edges = Vec::with_capacity(spec.edges.len());
    for (i, &(a, b, va, vb)) in spec.edges.iter().enumerate() {
        let id = EdgeId(i);
        if va >= vertices.len() || vb >= vertices.len() {
            return Err(Error::InconsistentInterval(
                id,
                "endpoint vertex id out of range".into(),
            ));
        }
        if va == vb {
            return Err(Error::InconsistentInterval(
                id,
                "self-loops are not supported".into(),
            ));
        }
        if !(a < b) {
            return Err(Error::InconsistentInterval(
                id,
                format!("requires a < b, got [{a}, {b}]"),
            ));
        }
        if a.is_infinite() {
            return Err(Error::InconsistentInterval(
                id,
                "lower end must be finite".into(),
            ));
        }
        edges.push(Edge {
            id,
            a,
            b,
            v_at_a: VertexId(va),
            v_at_b: VertexId(vb),
        });
    }

    let graph = MetricGraph {
        adjacency: adjacency_of(vertices.len(), &edges),
        vertices,
        edges,
        relax_degree: spec.relax_degree,
    };
    graph.validate()?;
    Ok(graph)
}

fn adjacency_of(n_vertices: usize, edges: &[Edge]) -> Vec<Vec<EdgeId>> {
    let mut adj = vec![Vec::new(); n_vertices];
    for e in edges {
        adj[e.v_at_a.0].push(e.id);
        adj[e.v_at_b.0].push(e.id);
    }
    adj
}

impl MetricGraph {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.0].len()
    }

    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.adjacency[v.0]
    }

    pub fn unbounded_edge(&self) -> Option<&Edge> {
        self.edges.iter().find(|e| e.is_unbounded())
    }

    /// Largest finite vertex level; the lower end of the unbounded edge.
    pub fn h0(&self) -> Result<f64> {
        Ok(self.unbounded_edge().ok_or(Error::NoUnboundedEdge)?.a)
    }

    fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() || self.edges.is_empty() {
            return Err(Error::Invalid("graph must have at least one edge".into()));
        }

        // exactly one unbounded edge, ending at the infinity vertex
        let unbounded: Vec<&Edge> = self.edges.iter().filter(|e| e.is_unbounded()).collect();
        if unbounded.len() > 1 {
            return Err(Error::Invalid("more than one unbounded edge".into()));
        }
        let inf_vertex = self
            .vertices
            .iter()
            .find(|v| v.kind == VertexKind::Infinity);
        match (unbounded.first(), inf_vertex) {
            (Some(e), Some(v)) => {
                if e.v_at_b != v.id {
                    return Err(Error::InconsistentInterval(
                        e.id,
                        "unbounded edge must end at the infinity vertex".into(),
                    ));
                }
            }
            (Some(e), None) => {
                return Err(Error::InconsistentInterval(
                    e.id,
                    "unbounded edge without an infinity vertex".into(),
                ));
            }
            (None, Some(v)) => {
                return Err(Error::Invalid(format!(
                    "infinity vertex {:?} without an unbounded edge",
                    v.id
                )));
            }
            (None, None) => {}
        }

        // intervals consistent with vertex levels
        for e in &self.edges {
            let za = self.vertex(e.v_at_a).z;
            let zb = self.vertex(e.v_at_b).z;
            let scale = 1.0 + e.a.abs() + if e.b.is_finite() { e.b.abs() } else { 0.0 };
            if (za - e.a).abs() > Z_TOL * scale {
                return Err(Error::InconsistentInterval(
                    e.id,
                    format!("vertex at a has z = {za}, interval starts at {}", e.a),
                ));
            }
            if e.b.is_finite() {
                if (zb - e.b).abs() > Z_TOL * scale {
                    return Err(Error::InconsistentInterval(
                        e.id,
                        format!("vertex at b has z = {zb}, interval ends at {}", e.b),
                    ));
                }
            } else if !zb.is_infinite() {
                return Err(Error::InconsistentInterval(
                    e.id,
                    "unbounded edge must end at a vertex with infinite z".into(),
                ));
            }
        }

        // degree rules
        for v in &self.vertices {
            let d = self.degree(v.id);
            match v.kind {
                VertexKind::Interior => {
                    if self.relax_degree {
                        if d < 2 {
                            return Err(Error::BadDegree(v.id, d, ">= 2 (relaxed)".into()));
                        }
                    } else if d != 3 {
                        return Err(Error::BadDegree(v.id, d, "3".into()));
                    }
                }
                VertexKind::Exterior | VertexKind::Infinity | VertexKind::TruncationBoundary => {
                    if d != 1 {
                        return Err(Error::BadDegree(v.id, d, "1".into()));
                    }
                }
            }
        }

        // connectivity
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![VertexId(0)];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &ek in self.incident_edges(v) {
                let u = self.edge(ek).other_end(v);
                if !seen[u.0] {
                    seen[u.0] = true;
                    stack.push(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::DisconnectedGraph);
        }

        Ok(())
    }
}

/// Compact truncation of a metric graph: the unbounded edge is clipped to
/// `[H0, R+1]` and terminated by a truncation-boundary vertex.
///
/// Vertices are re-indexed densely (the infinity vertex is dropped); edge
/// ids are inherited from the base graph.
#[derive(Clone)]
pub struct TruncatedGraph {
    r: f64,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<EdgeId>>,
    /// Edge that was clipped, if the base graph was unbounded.
    clipped_edge: Option<EdgeId>,
}

/// Clips the unbounded edge of `g` at `R + 1`.
pub fn truncate(g: &MetricGraph, r: f64) -> Result<TruncatedGraph> {
    let unbounded = g.unbounded_edge().ok_or(Error::NoUnboundedEdge)?;
    let h0 = unbounded.a;
    if r <= h0 + Z_TOL * (1.0 + h0.abs()) {
        return Err(Error::RTooSmall { r, h0 });
    }

    // dense re-indexing with the infinity vertex dropped
    let mut map = vec![usize::MAX; g.vertices.len()];
    let mut vertices = Vec::with_capacity(g.vertices.len());
    for v in g.vertices() {
        if v.kind == VertexKind::Infinity {
            continue;
        }
        map[v.id.0] = vertices.len();
        vertices.push(Vertex {
            id: VertexId(vertices.len()),
            kind: v.kind,
            z: v.z,
        });
    }
    let boundary = VertexId(vertices.len());
    vertices.push(Vertex {
        id: boundary,
        kind: VertexKind::TruncationBoundary,
        z: r + 1.0,
    });

    let edges: Vec<Edge> = g
        .edges()
        .iter()
        .map(|e| {
            let v_at_a = VertexId(map[e.v_at_a.0]);
            if e.is_unbounded() {
                Edge {
                    id: e.id,
                    a: e.a,
                    b: r + 1.0,
                    v_at_a,
                    v_at_b: boundary,
                }
            } else {
                Edge {
                    id: e.id,
                    a: e.a,
                    b: e.b,
                    v_at_a,
                    v_at_b: VertexId(map[e.v_at_b.0]),
                }
            }
        })
        .collect();

    Ok(TruncatedGraph {
        r,
        adjacency: adjacency_of(vertices.len(), &edges),
        vertices,
        edges,
        clipped_edge: Some(unbounded.id),
    })
}

impl TruncatedGraph {
    /// Treats an already compact graph as its own truncation. `r` is set
    /// past the largest level so a cut-off built from it is identically one
    /// on the graph. Used for synthetic test graphs.
    pub fn from_compact(g: &MetricGraph) -> Result<TruncatedGraph> {
        if g.unbounded_edge().is_some() {
            return Err(Error::Invalid(
                "graph has an unbounded edge; use truncate(g, r)".into(),
            ));
        }
        let zmax = g
            .edges()
            .iter()
            .map(|e| e.b)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(TruncatedGraph {
            r: zmax,
            vertices: g.vertices().to_vec(),
            edges: g.edges().to_vec(),
            adjacency: g.adjacency.clone(),
            clipped_edge: None,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.adjacency[v.0]
    }

    pub fn clipped_edge(&self) -> Option<EdgeId> {
        self.clipped_edge
    }

    pub fn min_edge_len(&self) -> f64 {
        self.edges
            .iter()
            .map(Edge::len)
            .fold(f64::INFINITY, f64::min)
    }

    /// Lower end of the clipped edge (the largest critical level), when the
    /// graph came from an actual truncation.
    pub fn h0(&self) -> Option<f64> {
        self.clipped_edge.map(|e| self.edge(e).a)
    }
}

/// Signed incidence list `(edge, sign)` used by assembly and flux checks.
///
/// Interior and truncation-boundary vertices yield their incident edges with
/// orientation signs; exterior vertices yield an empty list since the flux
/// condition is vacuous where alpha vanishes.
pub fn kirchhoff_stencil_base(g: &MetricGraph, v: VertexId) -> Vec<(EdgeId, i8)> {
    stencil(g.vertex(v), g.incident_edges(v), g.edges())
}

/// [`kirchhoff_stencil_base`] on a truncated graph.
pub fn kirchhoff_stencil(g: &TruncatedGraph, v: VertexId) -> Vec<(EdgeId, i8)> {
    stencil(g.vertex(v), g.incident_edges(v), g.edges())
}

fn stencil(v: &Vertex, incident: &[EdgeId], edges: &[Edge]) -> Vec<(EdgeId, i8)> {
    match v.kind {
        VertexKind::Interior | VertexKind::TruncationBoundary => incident
            .iter()
            .map(|&ek| (ek, edges[ek.0].sign_at(v.id).expect("incident edge")))
            .collect(),
        VertexKind::Exterior | VertexKind::Infinity => Vec::new(),
    }
}

#[cfg(test)]
pub(crate) mod tests_support;
