//! Local regularization of the truncated coefficients.
//!
//! Each edge is split into two halves so every half touches exactly one
//! vertex. Near exterior-type vertices (where alpha vanishes) the diffusion
//! coefficient is lifted by `delta * bump(|z - z_v| / delta)`; near interior
//! vertices (where beta blows up logarithmically) beta is frozen at its
//! value a distance `delta` into the edge and blended back with the same
//! bump. Away from a `2 delta` neighbourhood of the vertices nothing
//! changes.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::field::{Field1D, ScalarField};
use crate::graph::{EdgeId, TruncatedGraph, VertexId, VertexKind};
use crate::{Error, Result};

/// The bump profile: 1 on `[0, 1]`, 0 on `[2, inf)`, cosine blend between.
/// C1, so the regularized alpha stays C1 and its derivative is in L^4.
pub fn bump(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        0.5 * (((t - 1.0) * PI).cos() + 1.0)
    }
}

fn bump_deriv(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        0.0
    } else {
        -0.5 * PI * ((t - 1.0) * PI).sin()
    }
}

/// One half of an edge together with the vertex it touches.
#[derive(Debug, Clone, Copy)]
pub struct HalfEdge {
    pub edge: EdgeId,
    pub lo: f64,
    pub hi: f64,
    pub vertex: VertexId,
    pub vertex_kind: VertexKind,
    /// Level of the touched vertex (`lo` or `hi`).
    pub vertex_z: f64,
}

/// The regularized coefficient pair `(alpha^{R,delta}, beta^delta)`.
#[derive(Clone)]
pub struct RegularizedPair {
    pub alpha: ScalarField,
    pub beta: ScalarField,
    pub delta: f64,
    pub delta_min: f64,
    pub halves: Vec<HalfEdge>,
}

/// Splits the edges of `g` into vertex-touching halves. The clipped edge is
/// split at unit distance from its lower vertex, all others at the midpoint.
pub fn split_halves(g: &TruncatedGraph) -> Vec<HalfEdge> {
    let mut halves = Vec::with_capacity(2 * g.edges().len());
    for e in g.edges() {
        let mid = if Some(e.id) == g.clipped_edge() && e.b - e.a > 1.0 {
            e.a + 1.0
        } else {
            0.5 * (e.a + e.b)
        };
        for (lo, hi, v) in [(e.a, mid, e.v_at_a), (mid, e.b, e.v_at_b)] {
            halves.push(HalfEdge {
                edge: e.id,
                lo,
                hi,
                vertex: v,
                vertex_kind: g.vertex(v).kind,
                vertex_z: g.vertex(v).z,
            });
        }
    }
    halves
}

/// Largest admissible regularization parameter for `g`: small enough that
/// every bump support `2 delta` fits inside its half-edge and that the upper
/// bound `alpha^{R,delta} <= alpha + 1` holds with unit constant.
pub fn delta_min(g: &TruncatedGraph) -> f64 {
    let halves = split_halves(g);
    let half_cap = halves
        .iter()
        .map(|h| 0.5 * (h.hi - h.lo))
        .fold(f64::INFINITY, f64::min);
    let quarter_edge = 0.25 * g.min_edge_len();
    half_cap.min(quarter_edge).min(0.25)
}

/// Builds the regularized pair for `0 < delta < delta_min`.
pub fn regularize(
    alpha_r: &ScalarField,
    beta: &ScalarField,
    g: &TruncatedGraph,
    delta: f64,
) -> Result<RegularizedPair> {
    let dmin = delta_min(g);
    if !(delta > 0.0 && delta < dmin) {
        return Err(Error::DeltaTooLarge {
            delta,
            delta_min: dmin,
        });
    }

    let halves = split_halves(g);
    let mut alpha_edges: Vec<Arc<dyn Field1D>> = Vec::with_capacity(g.edges().len());
    let mut beta_edges: Vec<Arc<dyn Field1D>> = Vec::with_capacity(g.edges().len());

    for e in g.edges() {
        let mut bumps = Vec::new();
        let mut freezes = Vec::new();
        for h in halves.iter().filter(|h| h.edge == e.id) {
            match h.vertex_kind {
                VertexKind::Exterior | VertexKind::TruncationBoundary => {
                    bumps.push(h.vertex_z);
                }
                VertexKind::Interior => {
                    // freeze beta at distance delta into the edge
                    let z_frozen = if h.vertex_z <= h.lo + 0.5 * (h.hi - h.lo) {
                        h.vertex_z + delta
                    } else {
                        h.vertex_z - delta
                    };
                    freezes.push((h.vertex_z, beta.eval(e.id, z_frozen)));
                }
                VertexKind::Infinity => unreachable!("no infinity vertex on a truncated graph"),
            }
        }
        alpha_edges.push(Arc::new(RegAlphaEdge {
            base: alpha_r.edge(e.id).clone(),
            bumps,
            delta,
        }));
        beta_edges.push(Arc::new(RegBetaEdge {
            base: beta.edge(e.id).clone(),
            freezes,
            delta,
        }));
    }

    Ok(RegularizedPair {
        alpha: ScalarField::new(alpha_edges),
        beta: ScalarField::new(beta_edges),
        delta,
        delta_min: dmin,
        halves,
    })
}

struct RegAlphaEdge {
    base: Arc<dyn Field1D>,
    bumps: Vec<f64>,
    delta: f64,
}

impl Field1D for RegAlphaEdge {
    fn eval(&self, z: f64) -> f64 {
        let mut v = self.base.eval(z);
        for &zv in &self.bumps {
            v += self.delta * bump((z - zv).abs() / self.delta);
        }
        v
    }

    fn deriv(&self, z: f64) -> f64 {
        let mut d = self.base.deriv(z);
        for &zv in &self.bumps {
            let t = (z - zv).abs() / self.delta;
            d += bump_deriv(t) * (z - zv).signum();
        }
        d
    }
}

struct RegBetaEdge {
    base: Arc<dyn Field1D>,
    /// `(vertex level, frozen value beta(z_v +- delta))`
    freezes: Vec<(f64, f64)>,
    delta: f64,
}

impl Field1D for RegBetaEdge {
    fn eval(&self, z: f64) -> f64 {
        for &(zv, frozen) in &self.freezes {
            let t = (z - zv).abs() / self.delta;
            if t < 2.0 {
                let w = bump(t);
                return w * frozen + (1.0 - w) * self.base.eval(z);
            }
        }
        self.base.eval(z)
    }

    fn deriv(&self, z: f64) -> f64 {
        for &(zv, frozen) in &self.freezes {
            let t = (z - zv).abs() / self.delta;
            if t < 2.0 {
                let w = bump(t);
                let dw = bump_deriv(t) * (z - zv).signum() / self.delta;
                return dw * (frozen - self.base.eval(z)) + (1.0 - w) * self.base.deriv(z);
            }
        }
        self.base.deriv(z)
    }
}
