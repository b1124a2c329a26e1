//! P1 finite elements on a truncated metric graph.
//!
//! Each edge carries an equally spaced partition; the space is spanned by
//! edge-interior hat functions plus one hat per vertex shared by all
//! incident edges, which builds vertex continuity into the space. The
//! Kirchhoff flux condition is natural: it is enforced weakly by the form,
//! not by constraint rows.

mod assemble;
pub mod quad;
mod solve;
pub mod sparse;

pub use assemble::{
    assemble, load_form_a0, load_mass, AssembledOperators, FemFields, StoredFields,
};
pub use solve::{l2_project, ritz_project, solve_shifted, ShiftedSolver};
pub use sparse::{Coo, Csr};

use std::sync::Arc;

use crate::field::ScalarField;
use crate::graph::{EdgeId, TruncatedGraph, VertexId};
use crate::{Error, Result};

/// Continuous piecewise-linear space on a truncated graph.
///
/// Dof layout: the interior nodes of edge 0, edge 1, ... are numbered first
/// (`interior_offset[k] .. interior_offset[k] + n_k - 1`), followed by one
/// dof per vertex. `dim = sum(n_k - 1) + n_vertices`.
#[derive(Clone)]
pub struct FemSpace {
    graph: Arc<TruncatedGraph>,
    n_elems: Vec<usize>,
    h_per_edge: Vec<f64>,
    h: f64,
    interior_offset: Vec<usize>,
    n_interior: usize,
}

/// Builds the space with `n_k = ceil(|J_k| / target_h)` elements per edge.
pub fn build_space(graph: &Arc<TruncatedGraph>, target_h: f64) -> Result<FemSpace> {
    let min_len = graph.min_edge_len();
    if !(target_h > 0.0 && target_h < min_len) {
        return Err(Error::MeshTooCoarse { target_h, min_len });
    }
    let n_elems = graph
        .edges()
        .iter()
        .map(|e| (e.len() / target_h).ceil() as usize)
        .collect();
    Ok(FemSpace::from_elements(graph.clone(), n_elems))
}

impl FemSpace {
    /// Space with a prescribed element count per edge (each at least 2).
    pub fn from_elements(graph: Arc<TruncatedGraph>, n_elems: Vec<usize>) -> FemSpace {
        assert_eq!(n_elems.len(), graph.edges().len());
        assert!(
            n_elems.iter().all(|&n| n >= 2),
            "need at least 2 elements per edge"
        );
        let h_per_edge: Vec<f64> = graph
            .edges()
            .iter()
            .zip(&n_elems)
            .map(|(e, &n)| e.len() / n as f64)
            .collect();
        let h = h_per_edge.iter().copied().fold(f64::INFINITY, f64::min);
        let mut interior_offset = Vec::with_capacity(n_elems.len());
        let mut acc = 0;
        for &n in &n_elems {
            interior_offset.push(acc);
            acc += n - 1;
        }
        FemSpace {
            graph,
            n_elems,
            h_per_edge,
            h,
            interior_offset,
            n_interior: acc,
        }
    }

    /// Uniformly refined space (`factor` times more elements per edge);
    /// nodes of `self` are a subset of the refined nodes.
    pub fn refine(&self, factor: usize) -> FemSpace {
        assert!(factor >= 1);
        let n = self.n_elems.iter().map(|&n| n * factor).collect();
        FemSpace::from_elements(self.graph.clone(), n)
    }

    pub fn graph(&self) -> &Arc<TruncatedGraph> {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.n_interior + self.graph.vertices().len()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// Recorded mesh width `h = min_k h_k`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_elems(&self, k: EdgeId) -> usize {
        self.n_elems[k.0]
    }

    pub fn h_edge(&self, k: EdgeId) -> f64 {
        self.h_per_edge[k.0]
    }

    /// Level coordinate of local node `j` on edge `k` (`0 ..= n_k`).
    pub fn node_z(&self, k: EdgeId, j: usize) -> f64 {
        let e = self.graph.edge(k);
        if j == self.n_elems[k.0] {
            e.b
        } else {
            e.a + j as f64 * self.h_per_edge[k.0]
        }
    }

    /// Global dof of local node `j` on edge `k`; edge ends map to the shared
    /// vertex dofs.
    pub fn dof_of_node(&self, k: EdgeId, j: usize) -> usize {
        let n = self.n_elems[k.0];
        let e = self.graph.edge(k);
        if j == 0 {
            self.vertex_dof(e.v_at_a)
        } else if j == n {
            self.vertex_dof(e.v_at_b)
        } else {
            self.interior_offset[k.0] + j - 1
        }
    }

    pub fn vertex_dof(&self, v: VertexId) -> usize {
        self.n_interior + v.0
    }

    /// Inverse of the interior part of the dof map.
    pub fn interior_dof_location(&self, dof: usize) -> Option<(EdgeId, usize)> {
        if dof >= self.n_interior {
            return None;
        }
        let k = match self.interior_offset.binary_search(&dof) {
            Ok(mut i) => {
                // offsets repeat when an edge has a single interior dof
                while i + 1 < self.interior_offset.len() && self.interior_offset[i + 1] == dof {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        Some((EdgeId(k), dof - self.interior_offset[k] + 1))
    }

    /// Whether every node of `coarse` is a node of `self` (power-of-two or
    /// any integer refinement on the same graph).
    pub fn is_refinement_of(&self, coarse: &FemSpace) -> bool {
        self.n_elems.len() == coarse.n_elems.len()
            && self
                .n_elems
                .iter()
                .zip(&coarse.n_elems)
                .all(|(&nf, &nc)| nf >= nc && nf % nc == 0)
            && self
                .graph
                .edges()
                .iter()
                .zip(coarse.graph.edges())
                .all(|(a, b)| a.a == b.a && a.b == b.b)
    }

    /// Value of the P1 function with dof vector `u` at `(k, z)`.
    pub fn eval(&self, u: &[f64], k: EdgeId, z: f64) -> f64 {
        let e = self.graph.edge(k);
        let n = self.n_elems[k.0];
        let hk = self.h_per_edge[k.0];
        let t = ((z - e.a) / hk).clamp(0.0, n as f64);
        let j = (t.floor() as usize).min(n - 1);
        let s = t - j as f64;
        let u0 = u[self.dof_of_node(k, j)];
        let u1 = u[self.dof_of_node(k, j + 1)];
        u0 * (1.0 - s) + u1 * s
    }

    /// Injects a coarse dof vector into this (finer, nested) space by nodal
    /// evaluation of the coarse P1 interpolant.
    pub fn lift_from(&self, coarse: &FemSpace, u_coarse: &[f64]) -> Result<Vec<f64>> {
        if !self.is_refinement_of(coarse) {
            return Err(Error::NonNestedMeshes(format!(
                "fine elements {:?} vs coarse {:?}",
                self.n_elems, coarse.n_elems
            )));
        }
        let mut out = vec![0.0; self.dim()];
        for e in self.graph.edges() {
            let q = self.n_elems[e.id.0] / coarse.n_elems[e.id.0];
            for j in 0..=self.n_elems[e.id.0] {
                let jc = j / q;
                let r = j % q;
                let val = if r == 0 {
                    u_coarse[coarse.dof_of_node(e.id, jc)]
                } else {
                    let s = r as f64 / q as f64;
                    let u0 = u_coarse[coarse.dof_of_node(e.id, jc)];
                    let u1 = u_coarse[coarse.dof_of_node(e.id, jc + 1)];
                    u0 * (1.0 - s) + u1 * s
                };
                out[self.dof_of_node(e.id, j)] = val;
            }
        }
        Ok(out)
    }
}

/// Wraps a dof vector as a [`ScalarField`] (piecewise-linear evaluation with
/// element-wise constant derivative), so discrete solutions can feed back
/// into quadrature-based loads and comparisons.
pub fn p1_field(space: &Arc<FemSpace>, u: &[f64]) -> ScalarField {
    use crate::field::Field1D;
    struct P1Edge {
        space: Arc<FemSpace>,
        u: Arc<Vec<f64>>,
        k: EdgeId,
    }
    impl Field1D for P1Edge {
        fn eval(&self, z: f64) -> f64 {
            self.space.eval(&self.u, self.k, z)
        }
        fn deriv(&self, z: f64) -> f64 {
            let e = self.space.graph().edge(self.k);
            let n = self.space.n_elems(self.k);
            let hk = self.space.h_edge(self.k);
            let t = ((z - e.a) / hk).clamp(0.0, n as f64);
            let j = (t.floor() as usize).min(n - 1);
            (self.u[self.space.dof_of_node(self.k, j + 1)]
                - self.u[self.space.dof_of_node(self.k, j)])
                / hk
        }
    }
    let u = Arc::new(u.to_vec());
    let edges = space
        .graph()
        .edges()
        .iter()
        .map(|e| {
            Arc::new(P1Edge {
                space: space.clone(),
                u: u.clone(),
                k: e.id,
            }) as Arc<dyn crate::field::Field1D>
        })
        .collect();
    ScalarField::new(edges)
}

/// Lagrange interpolation of a graph function: nodal values at interior
/// nodes and vertices. Fails if the function jumps across a vertex.
pub fn interpolate(space: &FemSpace, f: &ScalarField) -> Result<Vec<f64>> {
    let g = space.graph();
    // continuity check at shared vertices
    for v in g.vertices() {
        let incident = g.incident_edges(v.id);
        if incident.len() < 2 {
            continue;
        }
        let vals: Vec<f64> = incident.iter().map(|&k| f.eval(k, v.z)).collect();
        let scale = vals.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let gap = vals
            .iter()
            .fold(0.0_f64, |m, &x| m.max((x - vals[0]).abs()));
        if gap > 1e-9 * scale {
            return Err(Error::DiscontinuousAtVertex(v.id, gap));
        }
    }
    let mut out = vec![0.0; space.dim()];
    for e in g.edges() {
        for j in 0..=space.n_elems(e.id) {
            out[space.dof_of_node(e.id, j)] = f.eval(e.id, space.node_z(e.id, j));
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests_support;
