//! Graph fixtures shared by unit tests across the crate.

use super::{build_graph, GraphSpec, MetricGraph, VertexKind};

/// Single unbounded edge `[0, inf)`: one exterior vertex, one infinity vertex.
pub(crate) fn half_line() -> MetricGraph {
    let mut s = GraphSpec::default();
    let v0 = s.vertex(VertexKind::Exterior, 0.0);
    let v1 = s.vertex(VertexKind::Infinity, f64::INFINITY);
    s.edge(0.0, f64::INFINITY, v0, v1);
    build_graph(&s).unwrap()
}

/// Graph with three minima (levels 0.0, 0.1, 0.2), two saddles (1.0, 2.0)
/// and the unbounded edge: the shape produced by a triple-well Hamiltonian.
pub(crate) fn triple_well_graph() -> MetricGraph {
    let mut s = GraphSpec::default();
    let m1 = s.vertex(VertexKind::Exterior, 0.0);
    let m2 = s.vertex(VertexKind::Exterior, 0.1);
    let m3 = s.vertex(VertexKind::Exterior, 0.2);
    let s1 = s.vertex(VertexKind::Interior, 1.0);
    let s2 = s.vertex(VertexKind::Interior, 2.0);
    let oi = s.vertex(VertexKind::Infinity, f64::INFINITY);
    s.edge(0.0, 1.0, m1, s1);
    s.edge(0.1, 1.0, m2, s1);
    s.edge(1.0, 2.0, s1, s2);
    s.edge(0.2, 2.0, m3, s2);
    s.edge(2.0, f64::INFINITY, s2, oi);
    build_graph(&s).unwrap()
}

/// Double-well shape: two wells at level 0 merging at a saddle (level 1),
/// then the unbounded edge.
pub(crate) fn double_well_graph() -> MetricGraph {
    let mut s = GraphSpec::default();
    let m1 = s.vertex(VertexKind::Exterior, 0.0);
    let m2 = s.vertex(VertexKind::Exterior, 0.0);
    let sd = s.vertex(VertexKind::Interior, 1.0);
    let oi = s.vertex(VertexKind::Infinity, f64::INFINITY);
    s.edge(0.0, 1.0, m1, sd);
    s.edge(0.0, 1.0, m2, sd);
    s.edge(1.0, f64::INFINITY, sd, oi);
    build_graph(&s).unwrap()
}

/// Compact single edge `[0, 1]` between two exterior vertices, degree rules
/// relaxed. The work-horse for synthetic constant-coefficient tests.
pub(crate) fn unit_interval() -> MetricGraph {
    let mut s = GraphSpec::default();
    let v0 = s.vertex(VertexKind::Exterior, 0.0);
    let v1 = s.vertex(VertexKind::Exterior, 1.0);
    s.edge(0.0, 1.0, v0, v1);
    s.relax_degree = true;
    build_graph(&s).unwrap()
}
