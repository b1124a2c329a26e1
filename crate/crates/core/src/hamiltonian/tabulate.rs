//! Tabulation of contour integrals into interpolation-table coefficient
//! fields, and projection of plane functions onto the graph.
//!
//! Samples are Chebyshev-spaced strictly inside each edge (contours
//! degenerate at critical levels, so a guard band is kept around the
//! endpoints); the asymptotic classes attached at the endpoints come from
//! the vertex kinds and carry the behavior analytically through the guard
//! band.

use std::sync::Arc;

use super::reeb::ReducedGraph;
use super::trace::{continue_seed, contour_integrals, trace_closed, LevelComponent, TraceOptions};
use super::HamiltonianSpec;
use crate::coeff::{AsymptoticClass, CoefficientField, EndpointSpec, PchipTable};
use crate::field::{Field1D, ScalarField};
use crate::graph::Edge;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct TabulateOptions {
    pub samples_per_edge: usize,
    /// Guard band around endpoints, as a fraction of the tabulated span.
    pub guard_frac: f64,
    /// Upper tabulation limit on the unbounded edge.
    pub z_max: f64,
    pub trace: TraceOptions,
}

impl Default for TabulateOptions {
    fn default() -> Self {
        Self {
            samples_per_edge: 48,
            guard_frac: 1e-4,
            z_max: 40.0,
            trace: TraceOptions::default(),
        }
    }
}

/// Sweeps the interior levels of one edge (ascending), handing each traced
/// component to the callback.
fn sweep_edge(
    spec: &HamiltonianSpec,
    reduced: &ReducedGraph,
    edge: &Edge,
    opts: &TabulateOptions,
    mut on_component: impl FnMut(f64, &LevelComponent) -> Result<()>,
) -> Result<()> {
    let b_eff = if edge.is_unbounded() {
        opts.z_max
    } else {
        edge.b
    };
    if b_eff <= edge.a + 4.0 * opts.guard_frac * (b_eff - edge.a) {
        return Err(Error::Invalid(format!(
            "tabulation range for edge {:?} is empty (z_max too small?)",
            edge.id
        )));
    }
    let g = opts.guard_frac * (b_eff - edge.a);
    let lo = edge.a + g;
    let hi = if edge.is_unbounded() {
        b_eff
    } else {
        b_eff - g
    };

    let n = opts.samples_per_edge;
    // Chebyshev points, ascending
    let mut zs: Vec<f64> = (0..n)
        .map(|i| {
            let theta = std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (2.0 * n as f64);
            0.5 * (lo + hi) + 0.5 * (hi - lo) * theta.cos()
        })
        .collect();
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let seed = reduced.seed(edge.id);
    let mut p = seed.point;
    let mut pz = seed.z;
    for &z in &zs {
        p = continue_seed(spec, p, pz, z, opts.trace.grad_tol)?;
        pz = z;
        let points = trace_closed(spec, p, z, &opts.trace)?;
        let comp = LevelComponent {
            z,
            edge: Some(edge.id),
            points,
        };
        on_component(z, &comp)?;
    }
    Ok(())
}

/// Tabulates `(alpha, beta)` on every edge of the reduced graph.
pub fn tabulate_coefficients(
    spec: &HamiltonianSpec,
    reduced: &ReducedGraph,
    opts: &TabulateOptions,
) -> Result<CoefficientField> {
    if opts.samples_per_edge < 16 {
        return Err(Error::Invalid("need at least 16 samples per edge".into()));
    }
    let g = &reduced.graph;
    let mut alpha_edges: Vec<Arc<dyn Field1D>> = Vec::new();
    let mut beta_edges: Vec<Arc<dyn Field1D>> = Vec::new();
    let mut alpha_classes = Vec::new();
    let mut beta_classes = Vec::new();

    for e in g.edges() {
        let mut samples_a: Vec<(f64, f64)> = Vec::with_capacity(opts.samples_per_edge);
        let mut samples_b: Vec<(f64, f64)> = Vec::with_capacity(opts.samples_per_edge);
        sweep_edge(spec, reduced, e, opts, |z, comp| {
            let ints = contour_integrals(spec, comp, &opts.trace)?;
            samples_a.push((z, ints.alpha));
            samples_b.push((z, ints.beta));
            Ok(())
        })?;
        let (ac, bc) = crate::coeff::classes_from_vertex_kinds(g, e);
        let b_hi = if e.is_unbounded() { f64::INFINITY } else { e.b };
        alpha_edges.push(Arc::new(PchipTable::new(
            &samples_a, e.a, &ac.at_a, b_hi, &ac.at_b,
        )));
        beta_edges.push(Arc::new(PchipTable::new(
            &samples_b, e.a, &bc.at_a, b_hi, &bc.at_b,
        )));
        alpha_classes.push(ac);
        beta_classes.push(bc);
    }

    Ok(CoefficientField {
        alpha: ScalarField::new(alpha_edges),
        beta: ScalarField::new(beta_edges),
        alpha_classes,
        beta_classes,
    })
}

/// Projects a plane function onto the graph: the tabulated average against
/// the invariant measure on each level component.
pub fn tabulate_projection(
    spec: &HamiltonianSpec,
    reduced: &ReducedGraph,
    phi: &(dyn Fn(f64, f64) -> f64 + Sync),
    opts: &TabulateOptions,
) -> Result<ScalarField> {
    if opts.samples_per_edge < 16 {
        return Err(Error::Invalid("need at least 16 samples per edge".into()));
    }
    let g = &reduced.graph;
    let mut edges: Vec<Arc<dyn Field1D>> = Vec::new();
    for e in g.edges() {
        let mut samples: Vec<(f64, f64)> = Vec::with_capacity(opts.samples_per_edge);
        sweep_edge(spec, reduced, e, opts, |z, comp| {
            let avg = super::trace::contour_average(spec, comp, &opts.trace, &phi)?;
            samples.push((z, avg));
            Ok(())
        })?;
        let cls = EndpointSpec::new(AsymptoticClass::Constant, 1.0);
        let b_hi = if e.is_unbounded() { f64::INFINITY } else { e.b };
        edges.push(Arc::new(PchipTable::new(&samples, e.a, &cls, b_hi, &cls)));
    }
    Ok(ScalarField::new(edges))
}
