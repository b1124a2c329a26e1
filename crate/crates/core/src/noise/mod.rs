//! Q-Wiener noise on the graph via a finite Karhunen-Loeve expansion.
//!
//! The basis comes either from user-declared graph functions with a declared
//! trace bound, or from a finite symmetric atomic spectral measure: each
//! atom pair `{xi, -xi}` of weight `w` contributes the plane waves
//! `sqrt(2w) cos(x . xi)` and `sqrt(2w) sin(x . xi)` (an atom at the origin
//! contributes the constant `sqrt(w)`), which are then projected onto the
//! graph by contour averaging. In both modes the pointwise trace bound
//! `sum_j |e_j|^2 <= mu(R^2)` is verified on a sampling grid.

mod stream;

pub use stream::{sample_increments, uniform_grid, NoiseIncrementStream};

use std::sync::Arc;

use crate::coeff::CutOff;
use crate::fem::{l2_project, p1_field, AssembledOperators};
use crate::field::{Field1D, ScalarField};
use crate::graph::TruncatedGraph;
use crate::hamiltonian::{tabulate_projection, HamiltonianSpec, ReducedGraph, TabulateOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    Direct,
    SpectralAtoms,
}

/// Finite KL basis of the driving Wiener process.
#[derive(Clone)]
pub struct NoiseModel {
    basis: Vec<ScalarField>,
    bound: f64,
    mode: NoiseMode,
}

impl NoiseModel {
    pub fn n_modes(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ScalarField] {
        &self.basis
    }

    pub fn mode(&self) -> NoiseMode {
        self.mode
    }

    /// Total mass of the spectral measure (or the declared bound).
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Largest grid violation of `sum_j |e_j(z,k)|^2 - bound`; negative when
    /// the bound holds everywhere sampled.
    pub fn bound_margin(&self, g: &TruncatedGraph, n_grid: usize) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for e in g.edges() {
            for i in 0..=n_grid {
                let z = e.a + (e.b - e.a) * i as f64 / n_grid as f64;
                let s: f64 = self.basis.iter().map(|b| b.eval(e.id, z).powi(2)).sum();
                worst = worst.max(s - self.bound);
            }
        }
        worst
    }

    /// Tabulates the basis to CSV with columns `z,k,e_1..e_J`.
    pub fn write_basis_csv(
        &self,
        g: &TruncatedGraph,
        samples_per_edge: usize,
        w: &mut dyn std::io::Write,
    ) -> crate::Result<()> {
        write!(w, "z,k")?;
        for j in 1..=self.n_modes() {
            write!(w, ",e_{j}")?;
        }
        writeln!(w)?;
        for e in g.edges() {
            for i in 0..=samples_per_edge {
                let z = e.a + (e.b - e.a) * i as f64 / samples_per_edge as f64;
                write!(w, "{z:.16e},{}", e.id.0)?;
                for b in &self.basis {
                    write!(w, ",{:.16e}", b.eval(e.id, z))?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// An atom of the spectral measure at frequency `xi` with weight `w`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralAtom {
    pub xi: (f64, f64),
    pub weight: f64,
}

/// Wraps user-declared basis functions after checking vertex continuity and
/// the declared trace bound on a grid.
pub fn build_direct_noise(
    g: &TruncatedGraph,
    basis: Vec<ScalarField>,
    bound: f64,
) -> Result<NoiseModel> {
    if basis.is_empty() {
        return Err(Error::Invalid("need at least one basis function".into()));
    }
    for b in &basis {
        check_vertex_continuity(g, b)?;
    }
    let model = NoiseModel {
        basis,
        bound,
        mode: NoiseMode::Direct,
    };
    check_bound(&model, g)?;
    Ok(model)
}

/// Builds the KL basis of a symmetric atomic spectral measure and projects
/// it onto the reduced graph.
pub fn build_spectral_noise(
    spec: &HamiltonianSpec,
    reduced: &ReducedGraph,
    truncated: &TruncatedGraph,
    atoms: &[SpectralAtom],
    tab: &TabulateOptions,
) -> Result<NoiseModel> {
    if atoms.iter().any(|a| a.weight <= 0.0) {
        return Err(Error::Invalid("atom weights must be positive".into()));
    }
    // symmetry: every off-origin atom needs its mirror with equal weight
    let tol = 1e-12;
    for a in atoms {
        if a.xi.0.abs() < tol && a.xi.1.abs() < tol {
            continue;
        }
        let mirrored = atoms.iter().any(|b| {
            (b.xi.0 + a.xi.0).abs() < tol
                && (b.xi.1 + a.xi.1).abs() < tol
                && (b.weight - a.weight).abs() < tol * (1.0 + a.weight)
        });
        if !mirrored {
            return Err(Error::AsymmetricAtoms);
        }
    }

    let total_mass: f64 = atoms.iter().map(|a| a.weight).sum();
    let mut basis = Vec::new();

    // origin atoms contribute one constant mode of size sqrt(w0)
    let w0: f64 = atoms
        .iter()
        .filter(|a| a.xi.0.abs() < tol && a.xi.1.abs() < tol)
        .map(|a| a.weight)
        .sum();
    if w0 > 0.0 {
        basis.push(ScalarField::constant(
            reduced.graph.edges().len(),
            w0.sqrt(),
        ));
    }

    // one cos and one sin mode per atom pair
    let mut used = vec![false; atoms.len()];
    for (i, a) in atoms.iter().enumerate() {
        if used[i] || (a.xi.0.abs() < tol && a.xi.1.abs() < tol) {
            continue;
        }
        for (j, b) in atoms.iter().enumerate() {
            if j > i && (b.xi.0 + a.xi.0).abs() < tol && (b.xi.1 + a.xi.1).abs() < tol {
                used[j] = true;
            }
        }
        used[i] = true;
        let (kx, ky) = a.xi;
        let scale = (2.0 * a.weight).sqrt();
        let cos_mode = tabulate_projection(
            spec,
            reduced,
            &move |x, y| scale * (kx * x + ky * y).cos(),
            tab,
        )?;
        let sin_mode = tabulate_projection(
            spec,
            reduced,
            &move |x, y| scale * (kx * x + ky * y).sin(),
            tab,
        )?;
        basis.push(cos_mode);
        basis.push(sin_mode);
    }

    let model = NoiseModel {
        basis,
        bound: total_mass,
        mode: NoiseMode::SpectralAtoms,
    };
    check_bound(&model, truncated)?;
    Ok(model)
}

fn check_vertex_continuity(g: &TruncatedGraph, f: &ScalarField) -> Result<()> {
    for v in g.vertices() {
        let incident = g.incident_edges(v.id);
        if incident.len() < 2 {
            continue;
        }
        let vals: Vec<f64> = incident.iter().map(|&k| f.eval(k, v.z)).collect();
        let scale = vals.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let gap = vals
            .iter()
            .fold(0.0_f64, |m, &x| m.max((x - vals[0]).abs()));
        if gap > 1e-9 * scale {
            return Err(Error::DiscontinuousAtVertex(v.id, gap));
        }
    }
    Ok(())
}

fn check_bound(model: &NoiseModel, g: &TruncatedGraph) -> Result<()> {
    const GRID: usize = 256;
    let tol = 1e-6 * model.bound.max(1e-12);
    for e in g.edges() {
        for i in 0..=GRID {
            let z = e.a + (e.b - e.a) * i as f64 / GRID as f64;
            let s: f64 = model.basis.iter().map(|b| b.eval(e.id, z).powi(2)).sum();
            if s > model.bound + tol {
                return Err(Error::BoundViolated {
                    edge: e.id,
                    z,
                    value: s,
                    bound: model.bound,
                });
            }
        }
    }
    Ok(())
}

/// Load vector `<sum_j g(u) eta e_j dW_j, phi_i>` in the solver mass weight:
/// the diffusion term of one time step. The nonlinearity is evaluated at dof
/// points (collocation) and re-expanded as a P1 function.
pub fn diffusion_load(
    ops: &Arc<AssembledOperators>,
    model: &NoiseModel,
    u: &[f64],
    g_fn: &dyn Fn(f64) -> f64,
    dw: &[f64],
    cutoff: Option<&CutOff>,
) -> Vec<f64> {
    assert_eq!(dw.len(), model.n_modes());
    let nodal: Vec<f64> = u.iter().map(|&v| g_fn(v)).collect();
    let gu = p1_field(&ops.space, &nodal);
    ops.load(|k, z| {
        let eta = cutoff.map_or(1.0, |c| c.eval(z));
        let noise: f64 = model
            .basis
            .iter()
            .zip(dw)
            .map(|(e, &dwj)| dwj * e.eval(k, z))
            .sum();
        gu.eval(k, z) * eta * noise
    })
}

/// `P_h [ sum_j g(u) eta e_j dW_j ]` as a dof vector: the load above pushed
/// through the mass solve.
pub fn apply_diffusion(
    ops: &Arc<AssembledOperators>,
    model: &NoiseModel,
    u: &[f64],
    g_fn: &dyn Fn(f64) -> f64,
    dw: &[f64],
    cutoff: Option<&CutOff>,
) -> Result<Vec<f64>> {
    let rhs = diffusion_load(ops, model, u, g_fn, dw, cutoff);
    l2_project(ops, &rhs)
}

#[cfg(test)]
mod tests;
