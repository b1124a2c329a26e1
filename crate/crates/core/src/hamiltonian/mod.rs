//! Reduction of a planar Hamiltonian to a metric graph with coefficients.
//!
//! The level sets of a confining Hamiltonian `H` (finite critical points,
//! non-degenerate Hessians, quadratic growth) collapse to a graph: level-set
//! components become edge points, saddles become interior vertices, extrema
//! become exterior vertices. The diffusion coefficients on the edges are the
//! contour integrals
//!
//! ```text
//!   alpha(z) = int_{C(z)} |grad H| dl,     beta(z) = int_{C(z)} |grad H|^-1 dl,
//! ```
//!
//! computed here by predictor-corrector tracing of the level curves, and a
//! plane function projects to the graph as its average against the
//! normalized invariant measure `d mu ~ |grad H|^-1 dl`.

pub mod expr;

mod critical;
mod reeb;
mod tabulate;
mod trace;

pub use critical::{find_critical_points, CriticalKind, CriticalPoint};
pub use reeb::{build_reeb_graph, reduce, EdgeSeed, ReducedGraph};
pub use tabulate::{tabulate_coefficients, tabulate_projection, TabulateOptions};
pub use trace::{
    contour_average, contour_integrals, contour_laplacian_integral, trace_closed, trace_level,
    ContourIntegrals, LevelComponent, TraceOptions,
};

use std::sync::Arc;

use expr::Expression;

use crate::{Error, Result};

type ScalarFn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type GradFn2 = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;
type HessFn2 = Arc<dyn Fn(f64, f64) -> (f64, f64, f64) + Send + Sync>;

/// A planar Hamiltonian with exact first and second derivatives, a search
/// box for critical points and a seed grid resolution.
#[derive(Clone)]
pub struct HamiltonianSpec {
    h: ScalarFn2,
    grad: GradFn2,
    /// Returns `(h_xx, h_xy, h_yy)`.
    hess: HessFn2,
    pub box_lo: f64,
    pub box_hi: f64,
    pub seed_resolution: usize,
}

impl HamiltonianSpec {
    pub fn new(
        h: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
        hess: impl Fn(f64, f64) -> (f64, f64, f64) + Send + Sync + 'static,
        box_lo: f64,
        box_hi: f64,
        seed_resolution: usize,
    ) -> Self {
        Self {
            h: Arc::new(h),
            grad: Arc::new(grad),
            hess: Arc::new(hess),
            box_lo,
            box_hi,
            seed_resolution,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.h)(x, y)
    }

    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        (self.grad)(x, y)
    }

    pub fn grad_norm(&self, x: f64, y: f64) -> f64 {
        let (gx, gy) = self.grad(x, y);
        gx.hypot(gy)
    }

    pub fn hess(&self, x: f64, y: f64) -> (f64, f64, f64) {
        (self.hess)(x, y)
    }

    pub fn laplacian(&self, x: f64, y: f64) -> f64 {
        let (hxx, _, hyy) = self.hess(x, y);
        hxx + hyy
    }

    /// Checks that the minimum over the seed grid (polished by Newton) is
    /// approximately zero and that the supplied gradient matches finite
    /// differences on random samples.
    pub fn validate(&self) -> Result<()> {
        use rand::prelude::*;
        let n = self.seed_resolution.max(16);
        let mut min_h = f64::INFINITY;
        let mut argmin = (0.0, 0.0);
        for i in 0..=n {
            for j in 0..=n {
                let x = self.box_lo + (self.box_hi - self.box_lo) * i as f64 / n as f64;
                let y = self.box_lo + (self.box_hi - self.box_lo) * j as f64 / n as f64;
                let h = self.eval(x, y);
                if h < min_h {
                    min_h = h;
                    argmin = (x, y);
                }
            }
        }
        // polish the grid minimum before comparing against zero
        let (mut x, mut y) = argmin;
        for _ in 0..80 {
            let (gx, gy) = self.grad(x, y);
            let (hxx, hxy, hyy) = self.hess(x, y);
            let det = hxx * hyy - hxy * hxy;
            if det.abs() < 1e-14 {
                break;
            }
            let dx = (-gx * hyy + gy * hxy) / det;
            let dy = (gx * hxy - gy * hxx) / det;
            x += dx;
            y += dy;
            if dx.hypot(dy) < 1e-14 * (1.0 + x.abs() + y.abs()) {
                break;
            }
        }
        min_h = min_h.min(self.eval(x, y));
        let scale = self.eval(self.box_hi, self.box_hi).abs().max(1.0);
        if min_h.abs() > 1e-6 * scale {
            return Err(Error::BadHamiltonian(format!(
                "min H over the search box is {min_h}, expected approximately 0"
            )));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..32 {
            let x = rng.random_range(self.box_lo..self.box_hi);
            let y = rng.random_range(self.box_lo..self.box_hi);
            let (gx, gy) = self.grad(x, y);
            let h = 1e-6 * (1.0 + x.abs().max(y.abs()));
            let fdx = (self.eval(x + h, y) - self.eval(x - h, y)) / (2.0 * h);
            let fdy = (self.eval(x, y + h) - self.eval(x, y - h)) / (2.0 * h);
            let gscale = gx.abs().max(gy.abs()).max(1.0);
            if (gx - fdx).abs() > 1e-5 * gscale || (gy - fdy).abs() > 1e-5 * gscale {
                return Err(Error::BadHamiltonian(format!(
                    "gradient mismatch at ({x}, {y}): ({gx}, {gy}) vs FD ({fdx}, {fdy})"
                )));
            }
        }
        Ok(())
    }
}

/// `H = |x|^2 / 2`: one minimum, circular level sets.
pub fn harmonic() -> HamiltonianSpec {
    HamiltonianSpec::new(
        |x, y| 0.5 * (x * x + y * y),
        |x, y| (x, y),
        |_, _| (1.0, 0.0, 1.0),
        -4.0,
        4.0,
        24,
    )
}

/// `H = (x1^2 - 1)^2 + x2^2`: two wells at `(+-1, 0)`, saddle at the origin.
pub fn double_well() -> HamiltonianSpec {
    HamiltonianSpec::new(
        |x, y| {
            let q = x * x - 1.0;
            q * q + y * y
        },
        |x, y| (4.0 * x * (x * x - 1.0), 2.0 * y),
        |x, _| (12.0 * x * x - 4.0, 0.0, 2.0),
        -2.2,
        2.2,
        24,
    )
}

/// Sixth-degree well profile `p(t) = t^6 - 2 t^4 + t^2 + 0.15 t` (shifted to
/// minimum zero) plus `x2^2`: three wells and two saddles with pairwise
/// distinct critical values.
pub fn triple_well() -> HamiltonianSpec {
    fn p(t: f64) -> f64 {
        ((t * t - 2.0) * t * t + 1.0) * t * t + 0.15 * t
    }
    fn dp(t: f64) -> f64 {
        (6.0 * t * t * t * t - 8.0 * t * t + 2.0) * t + 0.15
    }
    fn ddp(t: f64) -> f64 {
        (30.0 * t * t - 24.0) * t * t + 2.0
    }
    // global minimum of p, located once by Newton from the three well seeds
    fn p_min() -> f64 {
        let mut best = f64::INFINITY;
        for seed in [-1.1, -0.05, 1.1] {
            let mut t = seed;
            for _ in 0..60 {
                let step = dp(t) / ddp(t);
                t -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            best = best.min(p(t));
        }
        best
    }
    let shift = p_min();
    HamiltonianSpec::new(
        move |x, y| p(x) - shift + y * y,
        |x, y| (dp(x), 2.0 * y),
        |x, _| (ddp(x), 0.0, 2.0),
        -1.8,
        1.8,
        32,
    )
}

/// Resolves a named built-in or parses an expression Hamiltonian (derivatives
/// from forward-mode jets).
pub fn registry(name: &str) -> Result<HamiltonianSpec> {
    match name {
        "harmonic" => Ok(harmonic()),
        "double-well" | "double_well" => Ok(double_well()),
        "triple-well" | "triple_well" => Ok(triple_well()),
        other => from_expression(other, -4.0, 4.0, 32),
    }
}

/// Builds a spec from an expression in `x1`, `x2`.
pub fn from_expression(
    text: &str,
    box_lo: f64,
    box_hi: f64,
    seed_resolution: usize,
) -> Result<HamiltonianSpec> {
    let e = Expression::parse(text)?;
    let e1 = e.clone();
    let e2 = e.clone();
    Ok(HamiltonianSpec::new(
        move |x, y| e.eval(x, y),
        move |x, y| {
            let j = e1.eval_jet(x, y);
            (j.gx, j.gy)
        },
        move |x, y| {
            let j = e2.eval_jet(x, y);
            (j.hxx, j.hxy, j.hyy)
        },
        box_lo,
        box_hi,
        seed_resolution,
    ))
}
