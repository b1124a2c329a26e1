//! Coefficient fields on the graph: the diffusion pair `(alpha, beta)`, the
//! graph weight `gamma`, the truncation cut-off and the local
//! regularization, plus validators for the standing assumptions.
//!
//! Near a vertex the coefficients fall into one of four asymptotic classes:
//! `alpha` vanishes linearly at extrema and at the truncation boundary,
//! tends to a constant at saddles and grows linearly along the unbounded
//! edge; `beta` is bounded except for a logarithmic blow-up at saddles.

mod csvio;
mod cutoff;
mod regularize;
mod table;
mod validate;
mod weight;

pub use csvio::{classes_from_vertex_kinds, coefficients_from_csv, weight_from_csv};
pub use cutoff::{make_cutoff, CutOff, CutOffKind};
pub use regularize::{bump, delta_min, regularize, split_halves, HalfEdge, RegularizedPair};
pub use table::PchipTable;
pub use validate::{
    check_asp_reg, check_gamma_derivative_bound, validate_weight_compatibility,
    validate_weight_compatibility_regularized, GammaDerReport, KappaOptions, KappaReport,
    RegBounds,
};
pub use weight::{build_weight_base, build_weight_truncated, WeightFamily};

use std::f64::consts::PI;
use std::sync::Arc;

use crate::field::{Field1D, ScalarField};
use crate::graph::{MetricGraph, VertexKind};
use crate::{Error, Result};

/// Behavior of a coefficient near one edge endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticClass {
    /// `const * |z - z_v|`; alpha at extrema and at the truncation boundary.
    LinearVanishing,
    Constant,
    /// `const * |log|z - z_v||`; beta at saddles.
    LogBlowup,
    /// `const * z` as `z -> inf`; alpha along the unbounded edge.
    LinearGrowth,
}

#[derive(Debug, Clone, Copy)]
pub struct EndpointSpec {
    pub class: AsymptoticClass,
    pub constant: f64,
}

impl EndpointSpec {
    pub fn new(class: AsymptoticClass, constant: f64) -> Self {
        Self { class, constant }
    }
}

/// Classes declared at the two ends of an edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeEndpoints {
    pub at_a: EndpointSpec,
    pub at_b: EndpointSpec,
}

impl EdgeEndpoints {
    pub fn new(at_a: EndpointSpec, at_b: EndpointSpec) -> Self {
        Self { at_a, at_b }
    }
}

/// The diffusion coefficient pair on a graph, with asymptotic metadata.
#[derive(Clone)]
pub struct CoefficientField {
    pub alpha: ScalarField,
    pub beta: ScalarField,
    pub alpha_classes: Vec<EdgeEndpoints>,
    pub beta_classes: Vec<EdgeEndpoints>,
}

impl CoefficientField {
    /// Wraps raw fields without invariant checks; used for synthetic test
    /// coefficients (e.g. `alpha = beta = 1` on a relaxed graph) that do not
    /// model a Hamiltonian.
    pub fn from_fields_unchecked(
        alpha: ScalarField,
        beta: ScalarField,
        alpha_classes: Vec<EdgeEndpoints>,
        beta_classes: Vec<EdgeEndpoints>,
    ) -> Self {
        Self {
            alpha,
            beta,
            alpha_classes,
            beta_classes,
        }
    }

    /// Synthetic constant coefficients, class `Constant` everywhere.
    pub fn constant(n_edges: usize, alpha: f64, beta: f64) -> Self {
        let cls = EdgeEndpoints::new(
            EndpointSpec::new(AsymptoticClass::Constant, alpha),
            EndpointSpec::new(AsymptoticClass::Constant, alpha),
        );
        let cls_b = EdgeEndpoints::new(
            EndpointSpec::new(AsymptoticClass::Constant, beta),
            EndpointSpec::new(AsymptoticClass::Constant, beta),
        );
        Self {
            alpha: ScalarField::constant(n_edges, alpha),
            beta: ScalarField::constant(n_edges, beta),
            alpha_classes: vec![cls; n_edges],
            beta_classes: vec![cls_b; n_edges],
        }
    }

    /// Checks the structural invariants on a sampling grid: `alpha >= 0`
    /// vanishing (only) at exterior endpoints, `beta > 0` on interiors.
    pub fn validate(&self, g: &MetricGraph) -> Result<()> {
        const GRID: usize = 257;
        for e in g.edges() {
            let b_eff = if e.is_unbounded() { e.a + 100.0 } else { e.b };
            let scale = sample_scale(&self.alpha, e.id, e.a, b_eff);
            for i in 1..GRID {
                let z = e.a + (b_eff - e.a) * i as f64 / GRID as f64;
                let a = self.alpha.eval(e.id, z);
                let b = self.beta.eval(e.id, z);
                if a < -1e-12 * scale {
                    return Err(Error::BadCoefficient(format!(
                        "alpha negative on edge {:?} at z = {z}: {a}",
                        e.id
                    )));
                }
                if b <= 0.0 {
                    return Err(Error::BadCoefficient(format!(
                        "beta non-positive on edge {:?} at z = {z}: {b}",
                        e.id
                    )));
                }
            }
            for (v, z_end) in [(e.v_at_a, e.a), (e.v_at_b, e.b)] {
                if g.vertex(v).kind == VertexKind::Exterior {
                    let a = self.alpha.eval(e.id, z_end);
                    if a.abs() > 1e-12 * scale {
                        return Err(Error::BadCoefficient(format!(
                            "alpha does not vanish at exterior vertex {v:?}: {a}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn sample_scale(f: &ScalarField, k: crate::graph::EdgeId, a: f64, b: f64) -> f64 {
    let mut s = 0.0_f64;
    for i in 1..16 {
        let z = a + (b - a) * i as f64 / 16.0;
        s = s.max(f.eval(k, z).abs());
    }
    s.max(1e-30)
}

/// Per-edge declaration for [`analytic_coefficients`].
#[derive(Debug, Clone, Copy)]
pub struct AnalyticEdge {
    pub alpha: EdgeEndpoints,
    pub beta: EdgeEndpoints,
}

/// Builds closed-form coefficients from per-endpoint asymptotic classes.
///
/// Each edge blends its two endpoint models with the smooth partition
/// `W(t) = (1 + cos(pi t)) / 2`; on the unbounded edge the blend window has
/// unit width so the growth model holds exactly beyond it.
pub fn analytic_coefficients(
    g: &MetricGraph,
    profile: &[AnalyticEdge],
) -> Result<CoefficientField> {
    if profile.len() != g.edges().len() {
        return Err(Error::Invalid(format!(
            "profile covers {} edges, graph has {}",
            profile.len(),
            g.edges().len()
        )));
    }
    let mut alpha_edges: Vec<Arc<dyn Field1D>> = Vec::new();
    let mut beta_edges: Vec<Arc<dyn Field1D>> = Vec::new();
    let mut alpha_classes = Vec::new();
    let mut beta_classes = Vec::new();

    for (e, decl) in g.edges().iter().zip(profile) {
        for (v, spec, side) in [
            (e.v_at_a, decl.alpha.at_a, "a"),
            (e.v_at_b, decl.alpha.at_b, "b"),
        ] {
            let kind = g.vertex(v).kind;
            if kind == VertexKind::Interior && spec.class == AsymptoticClass::LinearVanishing {
                return Err(Error::InconsistentClass(
                    e.id,
                    "alpha".into(),
                    format!("linear-vanishing declared at interior vertex (side {side})"),
                ));
            }
            if kind == VertexKind::Exterior && spec.class != AsymptoticClass::LinearVanishing {
                return Err(Error::InconsistentClass(
                    e.id,
                    "alpha".into(),
                    format!("alpha must vanish linearly at exterior vertex (side {side})"),
                ));
            }
            if spec.constant <= 0.0 {
                return Err(Error::InconsistentClass(
                    e.id,
                    "alpha".into(),
                    "class constants must be positive".into(),
                ));
            }
        }
        alpha_edges.push(Arc::new(BlendField::new(e.a, e.b, decl.alpha)));
        beta_edges.push(Arc::new(BlendField::new(e.a, e.b, decl.beta)));
        alpha_classes.push(decl.alpha);
        beta_classes.push(decl.beta);
    }

    let field = CoefficientField {
        alpha: ScalarField::new(alpha_edges),
        beta: ScalarField::new(beta_edges),
        alpha_classes,
        beta_classes,
    };
    field.validate(g)?;
    Ok(field)
}

/// The coefficient pair of the quadratic single-well Hamiltonian
/// `H = |x|^2 / 2`: `alpha(z) = 4 pi z`, `beta(z) = 2 pi` on `[0, inf)`.
pub fn harmonic_profile() -> Vec<AnalyticEdge> {
    vec![AnalyticEdge {
        alpha: EdgeEndpoints::new(
            EndpointSpec::new(AsymptoticClass::LinearVanishing, 4.0 * PI),
            EndpointSpec::new(AsymptoticClass::LinearGrowth, 4.0 * PI),
        ),
        beta: EdgeEndpoints::new(
            EndpointSpec::new(AsymptoticClass::Constant, 2.0 * PI),
            EndpointSpec::new(AsymptoticClass::Constant, 2.0 * PI),
        ),
    }]
}

/// A double-well-shaped profile on the 3-edge graph (two wells merging at a
/// saddle, then the unbounded edge): log blow-up of `beta` at the saddle,
/// linear vanishing of `alpha` at the wells.
pub fn double_well_like_profile(g: &MetricGraph) -> Result<Vec<AnalyticEdge>> {
    let spec_for = |v: crate::graph::VertexId| -> EndpointSpec {
        match g.vertex(v).kind {
            VertexKind::Exterior | VertexKind::TruncationBoundary => {
                EndpointSpec::new(AsymptoticClass::LinearVanishing, 2.0)
            }
            VertexKind::Interior => EndpointSpec::new(AsymptoticClass::Constant, 2.0),
            VertexKind::Infinity => EndpointSpec::new(AsymptoticClass::LinearGrowth, 4.0 * PI),
        }
    };
    let beta_for = |v: crate::graph::VertexId| -> EndpointSpec {
        match g.vertex(v).kind {
            VertexKind::Interior => EndpointSpec::new(AsymptoticClass::LogBlowup, 1.0),
            _ => EndpointSpec::new(AsymptoticClass::Constant, 2.0 * PI),
        }
    };
    let mut out = Vec::new();
    for e in g.edges() {
        out.push(AnalyticEdge {
            alpha: EdgeEndpoints::new(spec_for(e.v_at_a), spec_for(e.v_at_b)),
            beta: EdgeEndpoints::new(beta_for(e.v_at_a), beta_for(e.v_at_b)),
        });
    }
    Ok(out)
}

/// Multiplies `alpha` by the cut-off, producing the truncated coefficient
/// with left derivative `alpha(R+1) * K0` at the boundary vertex.
pub fn truncate_alpha(alpha: &ScalarField, eta: &CutOff) -> ScalarField {
    let eta_field = ScalarField::uniform(alpha.n_edges(), *eta);
    alpha.product(&eta_field)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Model {
    LinVan { z0: f64, c: f64 },
    Const(f64),
    Log { z0: f64, c: f64, scale: f64 },
    Growth(f64),
}

impl Model {
    fn from_spec(spec: EndpointSpec, z0: f64, len: f64) -> Self {
        match spec.class {
            AsymptoticClass::LinearVanishing => Model::LinVan {
                z0,
                c: spec.constant,
            },
            AsymptoticClass::Constant => Model::Const(spec.constant),
            AsymptoticClass::LogBlowup => Model::Log {
                z0,
                c: spec.constant,
                scale: len,
            },
            AsymptoticClass::LinearGrowth => Model::Growth(spec.constant),
        }
    }

    fn eval(&self, z: f64) -> f64 {
        match *self {
            Model::LinVan { z0, c } => c * (z - z0).abs(),
            Model::Const(c) => c,
            // c * (1 - ln(|z - z0| / L)) >= c on the edge, ~ c |log|z - z0|| near z0
            Model::Log { z0, c, scale } => {
                let d = ((z - z0).abs() / scale).max(1e-300);
                c * (1.0 - d.ln())
            }
            Model::Growth(c) => c * z,
        }
    }

    fn deriv(&self, z: f64) -> f64 {
        match *self {
            Model::LinVan { z0, c } => c * (z - z0).signum(),
            Model::Const(_) => 0.0,
            Model::Log { z0, c, .. } => {
                let d = z - z0;
                -c / if d == 0.0 { 1e-300 } else { d }
            }
            Model::Growth(c) => c,
        }
    }
}

/// Smooth blend of two endpoint models across an edge.
struct BlendField {
    a: f64,
    window: f64,
    ma: Model,
    mb: Model,
}

impl BlendField {
    fn new(a: f64, b: f64, decl: EdgeEndpoints) -> Self {
        let (window, len) = if b.is_finite() {
            (b - a, b - a)
        } else {
            (1.0, 1.0)
        };
        Self {
            a,
            window,
            ma: Model::from_spec(decl.at_a, a, len),
            mb: Model::from_spec(decl.at_b, b, len),
        }
    }

    fn tau(&self, z: f64) -> f64 {
        ((z - self.a) / self.window).clamp(0.0, 1.0)
    }
}

impl Field1D for BlendField {
    fn eval(&self, z: f64) -> f64 {
        let t = self.tau(z);
        let w = 0.5 * (1.0 + (PI * t).cos());
        self.ma.eval(z) * w + self.mb.eval(z) * (1.0 - w)
    }

    fn deriv(&self, z: f64) -> f64 {
        let t = self.tau(z);
        let w = 0.5 * (1.0 + (PI * t).cos());
        let inside = z > self.a && z < self.a + self.window;
        let dw = if inside {
            -0.5 * PI * (PI * t).sin() / self.window
        } else {
            0.0
        };
        self.ma.deriv(z) * w
            + self.mb.deriv(z) * (1.0 - w)
            + dw * (self.ma.eval(z) - self.mb.eval(z))
    }
}
