//! Grid validators for the standing assumptions on coefficients and weights.
//!
//! The compatibility constant `kappa = sup alpha |gamma'|^2 / (beta gamma^2)`
//! and its regularized analogue are existence statements in the theory; here
//! they are estimated on sampling grids, and "pass" means the estimate is
//! finite and stable under grid refinement. On the unbounded edge the grid
//! horizon grows with the point count, so inadmissible weights (whose sup
//! diverges at infinity) fail the stability test instead of silently passing
//! on a fixed window.

use super::regularize::RegularizedPair;
use crate::field::ScalarField;
use crate::graph::{Edge, EdgeId, TruncatedGraph};

#[derive(Debug, Clone, Copy)]
pub struct KappaOptions {
    /// Base number of grid points per edge (the refined pass uses twice as many).
    pub n_grid: usize,
    /// Guard band near edge endpoints, as a fraction of the edge length.
    pub guard_frac: f64,
    /// Grid step on the unbounded edge; the horizon is `a + n_grid * step`.
    pub unbounded_step: f64,
    /// Refined-to-base ratio above which the estimate counts as divergent.
    pub stability_ratio: f64,
}

impl Default for KappaOptions {
    fn default() -> Self {
        Self {
            n_grid: 400,
            guard_frac: 1e-4,
            unbounded_step: 0.25,
            stability_ratio: 1.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KappaReport {
    /// Estimate on the base grid.
    pub kappa_coarse: f64,
    /// Estimate on the refined grid (reported as the measured constant).
    pub kappa: f64,
    pub ratio: f64,
    pub pass: bool,
    pub per_edge: Vec<(EdgeId, f64)>,
    /// True when a table-backed field limited the check to a finite window.
    pub truncated_domain: bool,
}

/// Estimates `sup alpha |gamma'|^2 / (beta gamma^2)` over a sampling grid.
pub fn validate_weight_compatibility(
    alpha: &ScalarField,
    beta: &ScalarField,
    gamma: &ScalarField,
    edges: &[Edge],
    opts: &KappaOptions,
) -> KappaReport {
    let coarse = kappa_sup(alpha, beta, gamma, edges, opts.n_grid, opts);
    let fine = kappa_sup(alpha, beta, gamma, edges, 2 * opts.n_grid, opts);
    let kappa_coarse = coarse.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    let kappa = fine.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    let ratio = if kappa_coarse > 0.0 {
        kappa / kappa_coarse
    } else {
        1.0
    };
    let pass = kappa.is_finite() && ratio <= opts.stability_ratio;
    KappaReport {
        kappa_coarse,
        kappa,
        ratio,
        pass,
        per_edge: fine,
        truncated_domain: edges.iter().any(|e| e.is_unbounded()),
    }
}

/// Same estimate for the regularized pair on the truncated graph; the
/// resulting constant bounds `kappa_1`.
pub fn validate_weight_compatibility_regularized(
    pair: &RegularizedPair,
    gamma: &ScalarField,
    g: &TruncatedGraph,
    opts: &KappaOptions,
) -> KappaReport {
    validate_weight_compatibility(&pair.alpha, &pair.beta, gamma, g.edges(), opts)
}

fn kappa_sup(
    alpha: &ScalarField,
    beta: &ScalarField,
    gamma: &ScalarField,
    edges: &[Edge],
    n: usize,
    opts: &KappaOptions,
) -> Vec<(EdgeId, f64)> {
    edges
        .iter()
        .map(|e| {
            let (lo, hi) = grid_range(e, n, opts);
            let mut sup = 0.0_f64;
            for i in 0..n {
                let z = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
                let a = alpha.eval(e.id, z);
                let b = beta.eval(e.id, z);
                let gm = gamma.eval(e.id, z);
                let dg = gamma.deriv(e.id, z);
                if b > 0.0 && gm > 0.0 {
                    sup = sup.max(a * dg * dg / (b * gm * gm));
                }
            }
            (e.id, sup)
        })
        .collect()
}

fn grid_range(e: &Edge, n: usize, opts: &KappaOptions) -> (f64, f64) {
    if e.is_unbounded() {
        (e.a + opts.guard_frac, e.a + n as f64 * opts.unbounded_step)
    } else {
        let g = opts.guard_frac * e.len();
        (e.a + g, e.b - g)
    }
}

#[derive(Debug, Clone)]
pub struct GammaDerReport {
    /// `sup |gamma'|` over the bounded edges.
    pub c_bounded: f64,
    /// `sup sqrt(z) |gamma'| / gamma` over the unbounded edge.
    pub c_unbounded: f64,
    pub finite: bool,
}

/// Samples the derivative growth condition the built-in weight families are
/// required to satisfy.
pub fn check_gamma_derivative_bound(
    gamma: &ScalarField,
    edges: &[Edge],
    opts: &KappaOptions,
) -> GammaDerReport {
    let mut c_bounded = 0.0_f64;
    let mut c_unbounded = 0.0_f64;
    for e in edges {
        let n = opts.n_grid;
        let (lo, hi) = grid_range(e, n, opts);
        for i in 0..n {
            let z = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            let dg = gamma.deriv(e.id, z).abs();
            if e.is_unbounded() {
                let gm = gamma.eval(e.id, z);
                if gm > 0.0 {
                    c_unbounded = c_unbounded.max(z.max(0.0).sqrt() * dg / gm);
                }
            } else {
                c_bounded = c_bounded.max(dg);
            }
        }
    }
    GammaDerReport {
        c_bounded,
        c_unbounded,
        finite: c_bounded.is_finite() && c_unbounded.is_finite(),
    }
}

/// Empirical constants of the regularization bounds, sampled on a grid.
#[derive(Debug, Clone)]
pub struct RegBounds {
    /// `inf alpha^{R,delta}` — must be positive (the `c1(delta)` constant).
    pub c1_delta: f64,
    /// `inf beta^delta` — must be positive (`c3`).
    pub c3: f64,
    /// `sup beta^delta` — must be finite (`c4(delta)`).
    pub c4_delta: f64,
    /// `sup beta^delta / beta` — must be finite (`c5`).
    pub c5: f64,
    /// Largest violation of `alpha^{R,delta} >= alpha^R` (the `c0 = 1` bound).
    pub lower_violation: f64,
    /// Largest violation of `alpha^{R,delta} <= alpha + 1` (the `c2 = 1` bound).
    pub upper_violation: f64,
    pub pass: bool,
}

/// Checks the two-sided regularization bounds with unit outer constants on a
/// per-edge grid (default a thousand points per edge).
pub fn check_asp_reg(
    pair: &RegularizedPair,
    alpha: &ScalarField,
    alpha_r: &ScalarField,
    beta: &ScalarField,
    g: &TruncatedGraph,
    n_grid: usize,
) -> RegBounds {
    let mut c1 = f64::INFINITY;
    let mut c3 = f64::INFINITY;
    let mut c4 = 0.0_f64;
    let mut c5 = 0.0_f64;
    let mut lower_violation = 0.0_f64;
    let mut upper_violation = 0.0_f64;

    for e in g.edges() {
        for i in 0..n_grid {
            let z = e.a + (e.b - e.a) * (i as f64 + 0.5) / n_grid as f64;
            let ad = pair.alpha.eval(e.id, z);
            let ar = alpha_r.eval(e.id, z);
            let a = alpha.eval(e.id, z);
            let bd = pair.beta.eval(e.id, z);
            let b = beta.eval(e.id, z);
            c1 = c1.min(ad);
            c3 = c3.min(bd);
            c4 = c4.max(bd);
            if b > 0.0 {
                c5 = c5.max(bd / b);
            }
            lower_violation = lower_violation.max(ar - ad);
            upper_violation = upper_violation.max(ad - (a + 1.0));
        }
    }

    let tol = 1e-10 * (1.0 + c4.abs());
    let pass = c1 > 0.0
        && c3 > 0.0
        && c4.is_finite()
        && c5.is_finite()
        && lower_violation <= tol
        && upper_violation <= tol;
    RegBounds {
        c1_delta: c1,
        c3,
        c4_delta: c4,
        c5,
        lower_violation,
        upper_violation,
        pass,
    }
}
