//! Assembly of the weighted mass matrices, the (generally non-symmetric)
//! form matrix and the energy inner product.
//!
//! Element integrals use fixed 8-point Gauss-Legendre. The unregularized
//! error-norm mass `M` (weight `beta gamma`) has an integrable log
//! singularity at interior vertices, so the two elements touching such a
//! vertex are integrated with 32 points and a `1e-14` endpoint guard.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::quad::gauss_legendre;
use super::solve::ShiftedSolver;
use super::sparse::{Coo, Csr};
use super::FemSpace;
use crate::field::ScalarField;
use crate::graph::VertexKind;
use crate::{Error, Result};

/// Coefficient fields consumed by [`assemble`].
pub struct FemFields<'a> {
    /// Regularized truncated diffusion coefficient `alpha^{R,delta}`.
    pub alpha: &'a ScalarField,
    /// Regularized `beta^delta` (the solver-side mass weight).
    pub beta_delta: &'a ScalarField,
    /// Unregularized `beta` (the error-norm mass weight).
    pub beta: &'a ScalarField,
    pub gamma: &'a ScalarField,
}

/// Owned copies of the fields an operator set was assembled from; load
/// vectors for reaction and noise terms re-evaluate them at quadrature
/// points.
#[derive(Clone)]
pub struct StoredFields {
    pub alpha: ScalarField,
    pub beta_delta: ScalarField,
    pub beta: ScalarField,
    pub gamma: ScalarField,
}

/// Assembled sparse operators on a [`FemSpace`].
///
/// `a[i][j] = -a0(phi_j, phi_i)` where `a0` is the unshifted bilinear form,
/// so the semi-discrete system reads `M_delta du/dt = A u + loads`. The
/// matrices share one sparsity pattern. Factorizations of shifted
/// combinations are cached keyed by their coefficients.
pub struct AssembledOperators {
    pub space: Arc<FemSpace>,
    pub fields: StoredFields,
    /// Mass with weight `beta^delta gamma`.
    pub m_delta: Csr,
    /// Mass with weight `beta gamma`, for error norms.
    pub m_err: Csr,
    /// Negated form matrix.
    pub a: Csr,
    /// Energy inner product: `alpha gamma` on derivatives plus
    /// `beta^delta gamma` on values.
    pub s: Csr,
    solver_cache: Mutex<HashMap<(u64, u64), Arc<ShiftedSolver>>>,
}

impl AssembledOperators {
    /// Factorization of `cm * M_delta + ca * A`, cached.
    pub fn solver(self: &Arc<Self>, cm: f64, ca: f64) -> Result<Arc<ShiftedSolver>> {
        let key = (cm.to_bits(), ca.to_bits());
        if let Some(s) = self.solver_cache.lock().unwrap().get(&key) {
            return Ok(s.clone());
        }
        let k = self.m_delta.linear_combo(cm, &self.a, ca);
        let solver = Arc::new(ShiftedSolver::factor(self.space.clone(), k)?);
        self.solver_cache
            .lock()
            .unwrap()
            .insert(key, solver.clone());
        Ok(solver)
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `<f, phi_i>` in the solver mass weight, for an arbitrary integrand.
    pub fn load(&self, f: impl Fn(crate::graph::EdgeId, f64) -> f64) -> Vec<f64> {
        load_mass(&self.space, &self.fields.beta_delta, &self.fields.gamma, f)
    }

    /// Weighted norm `sqrt(u^T M u)` in the requested mass.
    pub fn norm_m_delta(&self, u: &[f64]) -> f64 {
        self.m_delta.bilinear(u, u).max(0.0).sqrt()
    }

    pub fn norm_m_err(&self, u: &[f64]) -> f64 {
        self.m_err.bilinear(u, u).max(0.0).sqrt()
    }

    pub fn norm_energy(&self, u: &[f64]) -> f64 {
        self.s.bilinear(u, u).max(0.0).sqrt()
    }
}

const GUARD: f64 = 1e-14;

pub fn assemble(space: &Arc<FemSpace>, fields: &FemFields) -> Result<Arc<AssembledOperators>> {
    let dim = space.dim();
    let mut m_delta = Coo::new(dim);
    let mut m_err = Coo::new(dim);
    let mut a = Coo::new(dim);
    let mut s = Coo::new(dim);
    let g = space.graph();

    for e in g.edges() {
        let n = space.n_elems(e.id);
        let h = space.h_edge(e.id);
        let interior_a = g.vertex(e.v_at_a).kind == VertexKind::Interior;
        let interior_b = g.vertex(e.v_at_b).kind == VertexKind::Interior;

        for el in 0..n {
            let z0 = space.node_z(e.id, el);
            let z1 = if el + 1 == n {
                e.b
            } else {
                space.node_z(e.id, el + 1)
            };
            let dofs = [space.dof_of_node(e.id, el), space.dof_of_node(e.id, el + 1)];
            let dphi = [-1.0 / h, 1.0 / h];

            let mut md = [[0.0; 2]; 2];
            let mut me = [[0.0; 2]; 2];
            let mut af = [[0.0; 2]; 2];
            let mut sf = [[0.0; 2]; 2];

            // 8-point pass: m_delta, a, s
            for &(x, w) in gauss_legendre(8) {
                let z = 0.5 * (z0 + z1) + 0.5 * (z1 - z0) * x;
                let wz = w * 0.5 * (z1 - z0);
                let phi = [(z1 - z) / h, (z - z0) / h];
                let alpha = fields.alpha.eval(e.id, z);
                let bd = fields.beta_delta.eval(e.id, z);
                let gm = fields.gamma.eval(e.id, z);
                let dgm = fields.gamma.deriv(e.id, z);
                for i in 0..2 {
                    for j in 0..2 {
                        md[i][j] += wz * phi[i] * phi[j] * bd * gm;
                        // -1/2 * alpha * phi_j' * (phi_i' gamma + phi_i gamma')
                        af[i][j] -= 0.5 * wz * alpha * dphi[j] * (dphi[i] * gm + phi[i] * dgm);
                        sf[i][j] +=
                            wz * (alpha * gm * dphi[i] * dphi[j] + bd * gm * phi[i] * phi[j]);
                    }
                }
            }

            // error-norm mass: high order next to a log singularity
            let singular = (el == 0 && interior_a) || (el + 1 == n && interior_b);
            let order = if singular { 32 } else { 8 };
            for &(x, w) in gauss_legendre(order) {
                let mut z = 0.5 * (z0 + z1) + 0.5 * (z1 - z0) * x;
                if singular {
                    z = z.clamp(e.a + GUARD, e.b - GUARD);
                }
                let wz = w * 0.5 * (z1 - z0);
                let phi = [(z1 - z) / h, (z - z0) / h];
                let b = fields.beta.eval(e.id, z);
                let gm = fields.gamma.eval(e.id, z);
                for i in 0..2 {
                    for j in 0..2 {
                        me[i][j] += wz * phi[i] * phi[j] * b * gm;
                    }
                }
            }

            for i in 0..2 {
                for j in 0..2 {
                    m_delta.push(dofs[i], dofs[j], md[i][j]);
                    m_err.push(dofs[i], dofs[j], me[i][j]);
                    a.push(dofs[i], dofs[j], af[i][j]);
                    s.push(dofs[i], dofs[j], sf[i][j]);
                }
            }
        }
    }

    let m_delta = m_delta.to_csr();
    for i in 0..dim {
        if m_delta.get(i, i) <= 0.0 {
            return Err(Error::SingularMass(i));
        }
    }

    Ok(Arc::new(AssembledOperators {
        space: space.clone(),
        fields: StoredFields {
            alpha: fields.alpha.clone(),
            beta_delta: fields.beta_delta.clone(),
            beta: fields.beta.clone(),
            gamma: fields.gamma.clone(),
        },
        m_delta,
        m_err: m_err.to_csr(),
        a: a.to_csr(),
        s: s.to_csr(),
        solver_cache: Mutex::new(HashMap::new()),
    }))
}

/// Load vector `<f, phi_i>` in the `beta^delta gamma` inner product, by
/// per-element quadrature of an arbitrary integrand `f(edge, z)`.
pub fn load_mass(
    space: &FemSpace,
    beta_delta: &ScalarField,
    gamma: &ScalarField,
    f: impl Fn(crate::graph::EdgeId, f64) -> f64,
) -> Vec<f64> {
    let mut rhs = vec![0.0; space.dim()];
    let g = space.graph();
    for e in g.edges() {
        let n = space.n_elems(e.id);
        let h = space.h_edge(e.id);
        for el in 0..n {
            let z0 = space.node_z(e.id, el);
            let z1 = if el + 1 == n {
                e.b
            } else {
                space.node_z(e.id, el + 1)
            };
            let dofs = [space.dof_of_node(e.id, el), space.dof_of_node(e.id, el + 1)];
            for &(x, w) in gauss_legendre(8) {
                let z = 0.5 * (z0 + z1) + 0.5 * (z1 - z0) * x;
                let wz = w * 0.5 * (z1 - z0);
                let phi = [(z1 - z) / h, (z - z0) / h];
                let common = wz * f(e.id, z) * beta_delta.eval(e.id, z) * gamma.eval(e.id, z);
                rhs[dofs[0]] += common * phi[0];
                rhs[dofs[1]] += common * phi[1];
            }
        }
    }
    rhs
}

/// Load vector `a0(f, phi_i) = 1/2 int alpha f' (phi_i gamma)' dz` for a
/// differentiable graph function `f`.
pub fn load_form_a0(
    space: &FemSpace,
    alpha: &ScalarField,
    gamma: &ScalarField,
    f: &ScalarField,
) -> Vec<f64> {
    let mut rhs = vec![0.0; space.dim()];
    let g = space.graph();
    for e in g.edges() {
        let n = space.n_elems(e.id);
        let h = space.h_edge(e.id);
        let dphi = [-1.0 / h, 1.0 / h];
        for el in 0..n {
            let z0 = space.node_z(e.id, el);
            let z1 = if el + 1 == n {
                e.b
            } else {
                space.node_z(e.id, el + 1)
            };
            let dofs = [space.dof_of_node(e.id, el), space.dof_of_node(e.id, el + 1)];
            for &(x, w) in gauss_legendre(8) {
                let z = 0.5 * (z0 + z1) + 0.5 * (z1 - z0) * x;
                let wz = w * 0.5 * (z1 - z0);
                let phi = [(z1 - z) / h, (z - z0) / h];
                let common = 0.5 * wz * alpha.eval(e.id, z) * f.deriv(e.id, z);
                let gm = gamma.eval(e.id, z);
                let dgm = gamma.deriv(e.id, z);
                for i in 0..2 {
                    rhs[dofs[i]] += common * (dphi[i] * gm + phi[i] * dgm);
                }
            }
        }
    }
    rhs
}
