//! Scalar functions on the edges of a graph.
//!
//! Coefficients, weights and noise basis functions are all per-edge scalar
//! functions of the level coordinate `z`. They are stored behind the
//! [`Field1D`] trait so closed forms, interpolation tables and wrapped
//! (truncated, regularized) variants share one evaluation interface.

use std::sync::Arc;

use crate::graph::EdgeId;

/// A scalar function of one variable, evaluated on a single edge.
pub trait Field1D: Send + Sync {
    fn eval(&self, z: f64) -> f64;

    /// Derivative with respect to `z`. The default is a central difference
    /// with step `1e-6 * (1 + |z|)`; implementors with closed forms
    /// override it.
    fn deriv(&self, z: f64) -> f64 {
        let h = 1e-6 * (1.0 + z.abs());
        (self.eval(z + h) - self.eval(z - h)) / (2.0 * h)
    }
}

/// Closure-backed field with an optional analytic derivative.
#[derive(Clone)]
pub struct FnField {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl FnField {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            df: None,
        }
    }

    pub fn with_deriv(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            df: Some(Arc::new(df)),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::with_deriv(move |_| c, |_| 0.0)
    }
}

impl Field1D for FnField {
    fn eval(&self, z: f64) -> f64 {
        (self.f)(z)
    }

    fn deriv(&self, z: f64) -> f64 {
        match &self.df {
            Some(df) => df(z),
            None => {
                let h = 1e-6 * (1.0 + z.abs());
                (self.eval(z + h) - self.eval(z - h)) / (2.0 * h)
            }
        }
    }
}

/// A scalar function on a graph: one [`Field1D`] per edge, indexed by edge id.
///
/// Used both for coefficients (alpha, beta, gamma and their truncated or
/// regularized variants) and for plain graph functions (initial data, noise
/// basis elements).
#[derive(Clone)]
pub struct ScalarField {
    edges: Vec<Arc<dyn Field1D>>,
}

impl ScalarField {
    pub fn new(edges: Vec<Arc<dyn Field1D>>) -> Self {
        Self { edges }
    }

    /// Same function on every edge.
    pub fn uniform(n_edges: usize, field: impl Field1D + 'static) -> Self {
        let f: Arc<dyn Field1D> = Arc::new(field);
        Self {
            edges: vec![f; n_edges],
        }
    }

    pub fn constant(n_edges: usize, c: f64) -> Self {
        Self::uniform(n_edges, FnField::constant(c))
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, k: EdgeId) -> &Arc<dyn Field1D> {
        &self.edges[k.0]
    }

    pub fn eval(&self, k: EdgeId, z: f64) -> f64 {
        self.edges[k.0].eval(z)
    }

    pub fn deriv(&self, k: EdgeId, z: f64) -> f64 {
        self.edges[k.0].deriv(z)
    }

    /// Pointwise combination `self * other` edge by edge.
    pub fn product(&self, other: &ScalarField) -> ScalarField {
        assert_eq!(self.n_edges(), other.n_edges());
        let edges = self
            .edges
            .iter()
            .zip(&other.edges)
            .map(|(a, b)| {
                Arc::new(ProductField {
                    a: a.clone(),
                    b: b.clone(),
                }) as Arc<dyn Field1D>
            })
            .collect();
        ScalarField { edges }
    }
}

struct ProductField {
    a: Arc<dyn Field1D>,
    b: Arc<dyn Field1D>,
}

impl Field1D for ProductField {
    fn eval(&self, z: f64) -> f64 {
        self.a.eval(z) * self.b.eval(z)
    }

    fn deriv(&self, z: f64) -> f64 {
        self.a.deriv(z) * self.b.eval(z) + self.a.eval(z) * self.b.deriv(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_deriv_is_central_difference() {
        struct Sq;
        impl Field1D for Sq {
            fn eval(&self, z: f64) -> f64 {
                z * z
            }
        }
        let f = Sq;
        assert!((f.deriv(3.0) - 6.0).abs() < 1e-6);
    }

    #[test]
    fn product_rule() {
        let a = FnField::with_deriv(|z| z, |_| 1.0);
        let b = FnField::with_deriv(|z| z.cos(), |z| -z.sin());
        let fa = ScalarField::uniform(1, a);
        let fb = ScalarField::uniform(1, b);
        let p = fa.product(&fb);
        let z = 0.7_f64;
        let expect = z.cos() - z * z.sin();
        assert!((p.deriv(EdgeId(0), z) - expect).abs() < 1e-12);
    }
}
