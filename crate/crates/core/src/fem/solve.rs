//! Direct solver exploiting the dof structure of graph P1 matrices.
//!
//! A shifted matrix `K = cm M + ca A` is tridiagonal within each edge's
//! interior block and couples to vertex dofs only through the first and last
//! interior node of each incident edge. Eliminating the interior blocks with
//! pivoted tridiagonal LU leaves a dense Schur complement on the (few)
//! vertex dofs. Every solve is O(dofs) and is checked against a residual
//! tolerance of `1e-12` with one step of iterative refinement in reserve.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::sparse::{norm2, Csr};
use super::FemSpace;
use crate::field::ScalarField;
use crate::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-12;

/// Pivoted LU of a tridiagonal block.
struct TriLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TriLu {
    fn factor(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>) -> Result<TriLu> {
        let n = d.len();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if dl[i] == 0.0 {
                if d[i] == 0.0 {
                    return Err(Error::SingularSystem(format!(
                        "zero pivot at tridiag row {i}"
                    )));
                }
                continue;
            }
            if d[i].abs() >= dl[i].abs() {
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                swapped[i] = true;
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
            }
        }
        if d[n - 1] == 0.0 {
            return Err(Error::SingularSystem(
                "zero pivot at last tridiag row".into(),
            ));
        }
        Ok(TriLu {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if !self.swapped[i] {
                b[i + 1] -= self.dl[i] * b[i];
            } else {
                let tmp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tmp - self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Coupling of one edge block to its two end vertices.
struct EdgeCoupling {
    offset: usize,
    len: usize,
    /// Vertex dofs at the a- and b-end.
    v_dofs: [usize; 2],
    /// `K[v_a, first interior]`, `K[v_b, last interior]`.
    c_vals: [f64; 2],
    /// `T^{-1} e_first * b_vals[0]` and `T^{-1} e_last * b_vals[1]`.
    g_cols: [Vec<f64>; 2],
}

/// Cached factorization of one shifted combination `cm M + ca A`.
pub struct ShiftedSolver {
    space: Arc<FemSpace>,
    k: Csr,
    blocks: Vec<(TriLu, EdgeCoupling)>,
    schur: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n_interior: usize,
}

impl ShiftedSolver {
    pub fn factor(space: Arc<FemSpace>, k: Csr) -> Result<ShiftedSolver> {
        let n_interior = space.n_interior();
        let n_vertices = space.dim() - n_interior;
        let g = space.graph().clone();

        let mut blocks = Vec::with_capacity(g.edges().len());
        let mut schur = DMatrix::<f64>::zeros(n_vertices, n_vertices);

        // vertex-vertex part of K
        for vi in 0..n_vertices {
            let row = n_interior + vi;
            for (j, v) in k.row(row) {
                if j >= n_interior {
                    schur[(vi, j - n_interior)] += v;
                }
            }
        }

        for e in g.edges() {
            let n = space.n_elems(e.id);
            let len = n - 1;
            let offset = space.dof_of_node(e.id, 1);
            let v_dofs = [space.vertex_dof(e.v_at_a), space.vertex_dof(e.v_at_b)];

            let mut dl = vec![0.0; len - 1];
            let mut d = vec![0.0; len];
            let mut du = vec![0.0; len - 1];
            let mut b_vals = [0.0; 2];
            for r in 0..len {
                let row = offset + r;
                for (j, v) in k.row(row) {
                    if j == row {
                        d[r] = v;
                    } else if j + 1 == row {
                        dl[r - 1] = v;
                    } else if j == row + 1 && r + 1 < len {
                        du[r] = v;
                    } else if j == v_dofs[0] && r == 0 {
                        b_vals[0] = v;
                    } else if j == v_dofs[1] && r == len - 1 {
                        b_vals[1] = v;
                    } else {
                        return Err(Error::SingularSystem(format!(
                            "unexpected coupling K[{row}, {j}] in edge {:?}",
                            e.id
                        )));
                    }
                }
            }
            let lu = TriLu::factor(dl, d, du)?;

            let c_vals = [k.get(v_dofs[0], offset), k.get(v_dofs[1], offset + len - 1)];

            // columns of T^{-1} B
            let mut ga = vec![0.0; len];
            ga[0] = b_vals[0];
            lu.solve_in_place(&mut ga);
            let mut gb = vec![0.0; len];
            gb[len - 1] = b_vals[1];
            lu.solve_in_place(&mut gb);

            // Schur update: D -= C T^{-1} B
            let va = v_dofs[0] - n_interior;
            let vb = v_dofs[1] - n_interior;
            schur[(va, va)] -= c_vals[0] * ga[0];
            schur[(va, vb)] -= c_vals[0] * gb[0];
            schur[(vb, va)] -= c_vals[1] * ga[len - 1];
            schur[(vb, vb)] -= c_vals[1] * gb[len - 1];

            blocks.push((
                lu,
                EdgeCoupling {
                    offset,
                    len,
                    v_dofs,
                    c_vals,
                    g_cols: [ga, gb],
                },
            ));
        }

        let schur = schur.lu();
        // numerically singular Schur complement (e.g. a zero shift with unit
        // weights puts the constants in the kernel): check the pivot spread
        let pivots: Vec<f64> = (0..n_vertices).map(|i| schur.u()[(i, i)].abs()).collect();
        let pmax = pivots.iter().fold(0.0_f64, |m, &v| m.max(v));
        let pmin = pivots.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if !(pmin > 1e-14 * pmax) {
            return Err(Error::SingularSystem(format!(
                "vertex Schur complement is numerically singular (pivot ratio {:.2e})",
                pmin / pmax
            )));
        }
        Ok(ShiftedSolver {
            space,
            k,
            blocks,
            schur,
            n_interior,
        })
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &Csr {
        &self.k
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.solve_once(rhs);
        // residual check with one step of iterative refinement
        let mut r = self.residual(rhs, &x);
        let scale = norm2(rhs)
            .max(self.k.max_abs() * norm2(&x))
            .max(f64::MIN_POSITIVE);
        if norm2(&r) > RESIDUAL_TOL * scale {
            let dx = self.solve_once(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            r = self.residual(rhs, &x);
            if norm2(&r) > RESIDUAL_TOL * scale {
                return Err(Error::SingularSystem(format!(
                    "residual {:.3e} exceeds tolerance after refinement",
                    norm2(&r) / scale
                )));
            }
        }
        Ok(x)
    }

    fn residual(&self, rhs: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r = self.k.matvec(x);
        for (ri, bi) in r.iter_mut().zip(rhs) {
            *ri = bi - *ri;
        }
        r
    }

    fn solve_once(&self, rhs: &[f64]) -> Vec<f64> {
        let n_vertices = self.space.dim() - self.n_interior;
        let mut x = rhs.to_vec();
        let mut rv = DVector::<f64>::zeros(n_vertices);
        for vi in 0..n_vertices {
            rv[vi] = rhs[self.n_interior + vi];
        }

        // interior elimination
        for (lu, c) in &self.blocks {
            lu.solve_in_place(&mut x[c.offset..c.offset + c.len]);
            rv[c.v_dofs[0] - self.n_interior] -= c.c_vals[0] * x[c.offset];
            rv[c.v_dofs[1] - self.n_interior] -= c.c_vals[1] * x[c.offset + c.len - 1];
        }

        let xv = self.schur.solve(&rv).expect("factored Schur complement");

        // back substitution into the interiors
        for (_, c) in &self.blocks {
            let va = xv[c.v_dofs[0] - self.n_interior];
            let vb = xv[c.v_dofs[1] - self.n_interior];
            for r in 0..c.len {
                x[c.offset + r] -= c.g_cols[0][r] * va + c.g_cols[1][r] * vb;
            }
        }
        for vi in 0..n_vertices {
            x[self.n_interior + vi] = xv[vi];
        }
        x
    }
}

/// Solves `M_delta x = rhs`: the discrete L2 projection given a load vector.
pub fn l2_project(ops: &Arc<super::AssembledOperators>, rhs: &[f64]) -> Result<Vec<f64>> {
    ops.solver(1.0, 0.0)?.solve(rhs)
}

/// Shifted Ritz projection: `R_h f` solves
/// `lambda <R_h f, psi> + a0(R_h f, psi) = lambda <f, psi> + a0(f, psi)`
/// for all `psi` in the space, i.e. `(lambda M_delta - A) x` equals the
/// shifted load (recall `A` is the negated form matrix).
///
/// `kappa1` is the (estimated) weight-compatibility constant; the shift must
/// exceed `kappa1 / 8` for the form to be coercive.
pub fn ritz_project(
    ops: &Arc<super::AssembledOperators>,
    f: &ScalarField,
    gamma: &ScalarField,
    beta_delta: &ScalarField,
    alpha: &ScalarField,
    lambda: f64,
    kappa1: f64,
) -> Result<Vec<f64>> {
    let threshold = kappa1 / 8.0;
    if !(lambda > threshold) {
        return Err(Error::NonCoerciveShift { lambda, threshold });
    }
    let space = &ops.space;
    let mut rhs = super::load_mass(space, beta_delta, gamma, |k, z| f.eval(k, z));
    for (r, a0) in rhs
        .iter_mut()
        .zip(super::load_form_a0(space, alpha, gamma, f))
    {
        *r = lambda * *r + a0;
    }
    ops.solver(lambda, -1.0)?.solve(&rhs)
}

/// Solves the shifted system `(y M_delta - A) x = rhs` (real shifts only).
pub fn solve_shifted(
    ops: &Arc<super::AssembledOperators>,
    y: f64,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    ops.solver(y, -1.0)?.solve(rhs)
}
