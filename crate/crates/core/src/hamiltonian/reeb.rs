//! Graph construction from critical-point analysis.
//!
//! Critical values are swept in increasing order while a set of active
//! level-set components is maintained, each carrying a seed point on its
//! current contour. Minima open new components; a saddle merges the two
//! components reached along its descending directions (identified by
//! tracing the contour just below the saddle level); maxima close the
//! component that shrinks onto them. The one component surviving all
//! critical values becomes the unbounded edge.

use super::critical::{CriticalKind, CriticalPoint};
use super::trace::{continue_seed, trace_closed, TraceOptions};
use super::HamiltonianSpec;
use crate::graph::{build_graph, EdgeId, GraphSpec, MetricGraph, VertexKind};
use crate::{Error, Result};

/// A point on a level-set component of an edge, used to re-enter the
/// component family at any interior level by continuation.
#[derive(Debug, Clone, Copy)]
pub struct EdgeSeed {
    pub point: (f64, f64),
    pub z: f64,
}

/// A metric graph derived from a Hamiltonian, with per-edge contour seeds.
#[derive(Clone)]
pub struct ReducedGraph {
    pub graph: MetricGraph,
    pub critical_points: Vec<CriticalPoint>,
    seeds: Vec<EdgeSeed>,
}

impl ReducedGraph {
    pub fn seed(&self, edge: EdgeId) -> EdgeSeed {
        self.seeds[edge.0]
    }
}

struct ActiveComponent {
    lower_z: f64,
    lower_vertex: usize,
    seed: (f64, f64),
    seed_z: f64,
}

/// Unit eigenvectors of the symmetric 2x2 Hessian; returns
/// `(descending, ascending)` directions at a saddle.
fn saddle_directions(hxx: f64, hxy: f64, hyy: f64) -> ((f64, f64), (f64, f64)) {
    let tr = hxx + hyy;
    let det = hxx * hyy - hxy * hxy;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let l1 = tr / 2.0 - disc; // negative at a saddle
    let l2 = tr / 2.0 + disc;
    let vec_for = |l: f64| -> (f64, f64) {
        // (H - l I) v = 0
        let (a, b) = (hxx - l, hxy);
        let (c, d) = (hxy, hyy - l);
        let v = if a.abs() + b.abs() > c.abs() + d.abs() {
            (-b, a)
        } else {
            (-d, c)
        };
        let n = v.0.hypot(v.1).max(1e-300);
        (v.0 / n, v.1 / n)
    };
    debug_assert!(l1 < 0.0 && l2 > 0.0);
    (vec_for(l1), vec_for(l2))
}

/// 1D Newton along a ray from a critical point to reach a nearby level.
fn step_to_level_along(
    spec: &HamiltonianSpec,
    origin: (f64, f64),
    dir: (f64, f64),
    target: f64,
    t0: f64,
) -> Result<(f64, f64)> {
    let mut t = t0;
    for _ in 0..80 {
        let p = (origin.0 + t * dir.0, origin.1 + t * dir.1);
        let h = spec.eval(p.0, p.1);
        let (gx, gy) = spec.grad(p.0, p.1);
        let dh = gx * dir.0 + gy * dir.1;
        if (h - target).abs() < 1e-13 * (1.0 + target.abs()) {
            return Ok(p);
        }
        if dh.abs() < 1e-300 {
            break;
        }
        t -= (h - target) / dh;
        if !(t.is_finite() && t > 0.0) {
            break;
        }
    }
    Err(Error::TraceDiverged(format!(
        "could not reach level {target} along a ray from ({}, {})",
        origin.0, origin.1
    )))
}

/// Builds the metric graph for `spec` from its classified critical points.
pub fn build_reeb_graph(spec: &HamiltonianSpec, cps: &[CriticalPoint]) -> Result<ReducedGraph> {
    let opts = TraceOptions::coarse();

    // smallest gap between distinct critical values sets the probe offset
    let mut min_gap = f64::INFINITY;
    for (i, a) in cps.iter().enumerate() {
        for b in &cps[i + 1..] {
            let d = (b.value - a.value).abs();
            if d > 1e-9 {
                min_gap = min_gap.min(d);
            }
        }
    }
    if !min_gap.is_finite() {
        min_gap = 1.0;
    }
    let eps = 1e-3 * min_gap;

    let mut active: Vec<ActiveComponent> = Vec::new();
    // edges as (a, b, v_lo, v_hi, seed)
    let mut edges: Vec<(f64, f64, usize, usize, EdgeSeed)> = Vec::new();

    for (ci, cp) in cps.iter().enumerate() {
        let (hxx, hxy, hyy) = spec.hess(cp.x, cp.y);
        match cp.kind {
            CriticalKind::Minimum => {
                // open a component just above the minimum
                let l = ((hxx + hyy) / 2.0).max(1e-12);
                let dir = (1.0, 0.0);
                let t0 = (2.0 * eps / l).sqrt();
                let p = step_to_level_along(spec, (cp.x, cp.y), dir, cp.value + eps, t0)?;
                active.push(ActiveComponent {
                    lower_z: cp.value,
                    lower_vertex: ci,
                    seed: p,
                    seed_z: cp.value + eps,
                });
            }
            CriticalKind::Saddle => {
                let below = cp.value - eps;
                let (desc, asc) = saddle_directions(hxx, hxy, hyy);
                let lneg = {
                    let tr = hxx + hyy;
                    let det = hxx * hyy - hxy * hxy;
                    (tr / 2.0 - (tr * tr / 4.0 - det).max(0.0).sqrt())
                        .abs()
                        .max(1e-12)
                };
                let t0 = (2.0 * eps / lneg).sqrt();
                let p_minus =
                    step_to_level_along(spec, (cp.x, cp.y), (-desc.0, -desc.1), below, t0)?;
                let p_plus = step_to_level_along(spec, (cp.x, cp.y), desc, below, t0)?;

                // identify which active components the two branches belong to
                let mut found: [Option<usize>; 2] = [None, None];
                for (ai, comp) in active.iter_mut().enumerate() {
                    comp.seed = continue_seed(spec, comp.seed, comp.seed_z, below, opts.grad_tol)?;
                    comp.seed_z = below;
                    let contour = trace_closed(spec, comp.seed, below, &opts)?;
                    let lc = super::trace::LevelComponent {
                        z: below,
                        edge: None,
                        points: contour,
                    };
                    for (bi, p) in [p_minus, p_plus].into_iter().enumerate() {
                        let (d, seg) = lc.distance_to(p.0, p.1);
                        if d <= 2.0 * seg + 1e-12 {
                            if found[bi].is_some() {
                                return Err(Error::ComponentTrackingAmbiguity(cp.value));
                            }
                            found[bi] = Some(ai);
                        }
                    }
                }
                let (ia, ib) = match (found[0], found[1]) {
                    (Some(a), Some(b)) if a != b => (a.min(b), a.max(b)),
                    _ => return Err(Error::ComponentTrackingAmbiguity(cp.value)),
                };

                // close the two merging components
                for idx in [ib, ia] {
                    let comp = active.remove(idx);
                    edges.push((
                        comp.lower_z,
                        cp.value,
                        comp.lower_vertex,
                        ci,
                        EdgeSeed {
                            point: comp.seed,
                            z: comp.seed_z,
                        },
                    ));
                }
                // open the merged component just above the saddle
                let above = cp.value + eps;
                let lpos = {
                    let tr = hxx + hyy;
                    let det = hxx * hyy - hxy * hxy;
                    (tr / 2.0 + (tr * tr / 4.0 - det).max(0.0).sqrt()).max(1e-12)
                };
                let q =
                    step_to_level_along(spec, (cp.x, cp.y), asc, above, (2.0 * eps / lpos).sqrt())?;
                active.push(ActiveComponent {
                    lower_z: cp.value,
                    lower_vertex: ci,
                    seed: q,
                    seed_z: above,
                });
            }
            CriticalKind::Maximum => {
                let below = cp.value - eps;
                // the vanishing component is the smallest contour containing the max
                let mut owner: Option<(usize, f64)> = None;
                for (ai, comp) in active.iter_mut().enumerate() {
                    comp.seed = continue_seed(spec, comp.seed, comp.seed_z, below, opts.grad_tol)?;
                    comp.seed_z = below;
                    let contour = trace_closed(spec, comp.seed, below, &opts)?;
                    let lc = super::trace::LevelComponent {
                        z: below,
                        edge: None,
                        points: contour,
                    };
                    if lc.contains(cp.x, cp.y) {
                        let area = lc.area().abs();
                        if owner.is_none_or(|(_, a)| area < a) {
                            owner = Some((ai, area));
                        }
                    }
                }
                let (idx, _) = owner.ok_or(Error::ComponentTrackingAmbiguity(cp.value))?;
                let comp = active.remove(idx);
                edges.push((
                    comp.lower_z,
                    cp.value,
                    comp.lower_vertex,
                    ci,
                    EdgeSeed {
                        point: comp.seed,
                        z: comp.seed_z,
                    },
                ));
            }
        }
    }

    if active.len() != 1 {
        return Err(Error::BadHamiltonian(format!(
            "{} components survive all critical values, expected exactly 1",
            active.len()
        )));
    }
    let last = active.pop().unwrap();
    let infinity_vertex = cps.len();
    edges.push((
        last.lower_z,
        f64::INFINITY,
        last.lower_vertex,
        infinity_vertex,
        EdgeSeed {
            point: last.seed,
            z: last.seed_z,
        },
    ));

    // deterministic edge order: by (lower level, upper level), stable
    edges.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());

    let mut gspec = GraphSpec::default();
    for cp in cps {
        let kind = match cp.kind {
            CriticalKind::Saddle => VertexKind::Interior,
            _ => VertexKind::Exterior,
        };
        gspec.vertex(kind, cp.value);
    }
    gspec.vertex(VertexKind::Infinity, f64::INFINITY);
    let mut seeds = Vec::with_capacity(edges.len());
    for &(a, b, vlo, vhi, seed) in &edges {
        gspec.edge(a, b, vlo, vhi);
        seeds.push(seed);
    }
    let graph = build_graph(&gspec)?;
    Ok(ReducedGraph {
        graph,
        critical_points: cps.to_vec(),
        seeds,
    })
}

/// Convenience: critical points plus graph in one call.
pub fn reduce(spec: &HamiltonianSpec) -> Result<ReducedGraph> {
    let cps = super::critical::find_critical_points(spec)?;
    build_reeb_graph(spec, &cps)
}
