//! Built-in graph weight families.
//!
//! The weight is identically one on the bounded edges; on the unbounded edge
//! it decays either sub-exponentially, `exp(-rho1 (z - H0)^rho2)` with
//! `0 < rho2 < 1/2`, or polynomially, `(z - H0 + 1)^(-rho3)` with `rho3 > 1`.
//! Truncation convergence additionally needs better-than-quadratic decay
//! (`rho3 > 2`), which the sweep harness checks through the bound proxy.

use std::sync::Arc;

use crate::field::{Field1D, FnField, ScalarField};
use crate::graph::{Edge, MetricGraph, TruncatedGraph};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFamily {
    Unit,
    ExpDecay { rho1: f64, rho2: f64 },
    PolyDecay { rho3: f64 },
}

impl WeightFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightFamily::Unit => Ok(()),
            WeightFamily::ExpDecay { rho1, rho2 } => {
                if rho1 > 0.0 && rho2 > 0.0 && rho2 < 0.5 {
                    Ok(())
                } else {
                    Err(Error::BadWeightFamily(format!(
                        "exp decay needs rho1 > 0 and 0 < rho2 < 1/2, got ({rho1}, {rho2})"
                    )))
                }
            }
            WeightFamily::PolyDecay { rho3 } => {
                if rho3 > 1.0 {
                    Ok(())
                } else {
                    Err(Error::BadWeightFamily(format!(
                        "poly decay needs rho3 > 1, got {rho3}"
                    )))
                }
            }
        }
    }

    fn tail_field(&self, h0: f64) -> FnField {
        match *self {
            WeightFamily::Unit => FnField::constant(1.0),
            WeightFamily::ExpDecay { rho1, rho2 } => FnField::with_deriv(
                move |z| (-rho1 * (z - h0).max(0.0).powf(rho2)).exp(),
                move |z| {
                    let s = (z - h0).max(1e-300);
                    -rho1 * rho2 * s.powf(rho2 - 1.0) * (-rho1 * s.powf(rho2)).exp()
                },
            ),
            WeightFamily::PolyDecay { rho3 } => FnField::with_deriv(
                move |z| (z - h0 + 1.0).max(1e-300).powf(-rho3),
                move |z| -rho3 * (z - h0 + 1.0).max(1e-300).powf(-rho3 - 1.0),
            ),
        }
    }
}

/// Builds `gamma` on a full graph: one on bounded edges, the family tail on
/// the unbounded edge (anchored at its lower end so `gamma` is continuous).
pub fn build_weight_base(g: &MetricGraph, family: WeightFamily) -> Result<ScalarField> {
    family.validate()?;
    let tail = g.unbounded_edge().map(|e| e.id);
    if tail.is_none() && family != WeightFamily::Unit {
        return Err(Error::BadWeightFamily(
            "decaying weights need an unbounded edge to anchor to".into(),
        ));
    }
    Ok(build(g.edges(), family, tail))
}

/// Builds `gamma` on a truncated graph; the tail sits on the clipped edge.
pub fn build_weight_truncated(g: &TruncatedGraph, family: WeightFamily) -> Result<ScalarField> {
    family.validate()?;
    let tail = g.clipped_edge();
    if tail.is_none() && family != WeightFamily::Unit {
        return Err(Error::BadWeightFamily(
            "decaying weights need an unbounded edge to anchor to".into(),
        ));
    }
    Ok(build(g.edges(), family, tail))
}

fn build(edges: &[Edge], family: WeightFamily, tail: Option<crate::graph::EdgeId>) -> ScalarField {
    let fields = edges
        .iter()
        .map(|e| {
            let f: Arc<dyn Field1D> = if Some(e.id) == tail && family != WeightFamily::Unit {
                Arc::new(family.tail_field(e.a))
            } else {
                Arc::new(FnField::constant(1.0))
            };
            f
        })
        .collect();
    ScalarField::new(fields)
}
