//! Predictor-corrector tracing of closed level curves and contour integrals.
//!
//! The predictor steps along the normalized co-gradient with a step bounded
//! by the local curvature (fixed maximum turn angle per step); the corrector
//! is Newton projection back onto the level set along the gradient. Closure
//! is detected by crossing the section through the start point normal to the
//! initial tangent. Integrals use the composite midpoint rule with segment
//! midpoints re-projected onto the curve; the difference against a once
//! split rule is reported as the oscillation estimate.

use super::reeb::ReducedGraph;
use super::HamiltonianSpec;
use crate::graph::EdgeId;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Maximum turn angle per step, radians. The chord-length deficit per
    /// segment scales as `max_turn^2 / 24`, which sets the relative accuracy
    /// of the contour integrals.
    pub max_turn: f64,
    /// Hard floor on `|grad H|` along the curve.
    pub grad_tol: f64,
    pub max_steps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            max_turn: 2e-3,
            grad_tol: 1e-10,
            max_steps: 2_000_000,
        }
    }
}

impl TraceOptions {
    /// Cheap settings for topology probes where 1e-2 accuracy suffices.
    pub fn coarse() -> Self {
        Self {
            max_turn: 2e-2,
            ..Self::default()
        }
    }
}

/// Closed polyline approximation of one level-set component. The points do
/// not repeat the start; segment `i` joins `points[i]` to
/// `points[(i+1) % len]`.
#[derive(Debug, Clone)]
pub struct LevelComponent {
    pub z: f64,
    pub edge: Option<EdgeId>,
    pub points: Vec<(f64, f64)>,
}

impl LevelComponent {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Polygon perimeter of the polyline.
    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let (x0, y0) = self.points[i];
                let (x1, y1) = self.points[(i + 1) % n];
                (x1 - x0).hypot(y1 - y0)
            })
            .sum()
    }

    /// Signed area (shoelace), used for containment heuristics.
    pub fn area(&self) -> f64 {
        let n = self.points.len();
        0.5 * (0..n)
            .map(|i| {
                let (x0, y0) = self.points[i];
                let (x1, y1) = self.points[(i + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum::<f64>()
    }

    /// Ray-casting point-in-polygon test.
    pub fn contains(&self, px: f64, py: f64) -> bool {
        let n = self.points.len();
        let mut inside = false;
        for i in 0..n {
            let (x0, y0) = self.points[i];
            let (x1, y1) = self.points[(i + 1) % n];
            if (y0 > py) != (y1 > py) {
                let xi = x0 + (py - y0) / (y1 - y0) * (x1 - x0);
                if px < xi {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the polyline together with the length of the
    /// nearest segment.
    pub fn distance_to(&self, px: f64, py: f64) -> (f64, f64) {
        let n = self.points.len();
        let mut best = f64::INFINITY;
        let mut seg_len = 0.0;
        for i in 0..n {
            let (x0, y0) = self.points[i];
            let (x1, y1) = self.points[(i + 1) % n];
            let (dx, dy) = (x1 - x0, y1 - y0);
            let l2 = dx * dx + dy * dy;
            let t = if l2 == 0.0 {
                0.0
            } else {
                (((px - x0) * dx + (py - y0) * dy) / l2).clamp(0.0, 1.0)
            };
            let d = (px - (x0 + t * dx)).hypot(py - (y0 + t * dy));
            if d < best {
                best = d;
                seg_len = l2.sqrt();
            }
        }
        (best, seg_len)
    }
}

/// Newton projection of `p` onto the level set `{H = z}` along the gradient.
pub fn newton_to_level(
    spec: &HamiltonianSpec,
    mut p: (f64, f64),
    z: f64,
    grad_tol: f64,
) -> Result<(f64, f64)> {
    for _ in 0..60 {
        let h = spec.eval(p.0, p.1);
        let (gx, gy) = spec.grad(p.0, p.1);
        let g2 = gx * gx + gy * gy;
        if g2.sqrt() < grad_tol {
            return Err(Error::NearZeroGradient(g2.sqrt()));
        }
        let r = z - h;
        if r.abs() <= 1e-14 * (1.0 + z.abs()) {
            return Ok(p);
        }
        p = (p.0 + r * gx / g2, p.1 + r * gy / g2);
    }
    let h = spec.eval(p.0, p.1);
    if (z - h).abs() <= 1e-11 * (1.0 + z.abs()) {
        Ok(p)
    } else {
        Err(Error::TraceDiverged(format!(
            "level projection stalled at H = {h}, target {z}"
        )))
    }
}

/// Moves a point lying on `{H = z_from}` to the level `z_to` by gradient
/// flow, staying inside the same component family.
pub fn continue_seed(
    spec: &HamiltonianSpec,
    mut p: (f64, f64),
    mut z: f64,
    z_to: f64,
    grad_tol: f64,
) -> Result<(f64, f64)> {
    for _ in 0..100_000 {
        if (z - z_to).abs() < 1e-15 * (1.0 + z_to.abs()) {
            return Ok(p);
        }
        let g = spec.grad_norm(p.0, p.1);
        if g < grad_tol {
            return Err(Error::NearZeroGradient(g));
        }
        // cap the spatial displacement per substep
        let dz_cap = 0.05 * (1.0 + p.0.abs() + p.1.abs()) * g;
        let dz = (z_to - z).clamp(-dz_cap, dz_cap);
        z += dz;
        p = newton_to_level(spec, p, z, grad_tol)?;
    }
    Err(Error::TraceDiverged(
        "seed continuation did not reach the target level".into(),
    ))
}

/// Curvature of the level curve of `H` through `(x, y)`.
fn level_curvature(spec: &HamiltonianSpec, x: f64, y: f64) -> f64 {
    let (gx, gy) = spec.grad(x, y);
    let (hxx, hxy, hyy) = spec.hess(x, y);
    let g = gx.hypot(gy).max(1e-300);
    (hxx * gy * gy - 2.0 * hxy * gx * gy + hyy * gx * gx).abs() / (g * g * g)
}

/// Traces the closed level curve through `p0` at level `z`.
pub fn trace_closed(
    spec: &HamiltonianSpec,
    p0: (f64, f64),
    z: f64,
    opts: &TraceOptions,
) -> Result<Vec<(f64, f64)>> {
    let start = newton_to_level(spec, p0, z, opts.grad_tol)?;
    let (gx, gy) = spec.grad(start.0, start.1);
    let g0 = gx.hypot(gy);
    if g0 < opts.grad_tol {
        return Err(Error::NearZeroGradient(g0));
    }
    // co-gradient direction (fixed orientation)
    let t0 = (-gy / g0, gx / g0);

    let kappa0 = level_curvature(spec, start.0, start.1).max(1e-12);
    let h0 = opts.max_turn / kappa0;
    let h_cap = 100.0 * h0;

    let mut points = vec![start];
    let mut p = start;
    let mut arclen = 0.0;
    let mut f_prev = 0.0; // section coordinate (p - start) . t0

    for step in 0..opts.max_steps {
        let (gx, gy) = spec.grad(p.0, p.1);
        let g = gx.hypot(gy);
        if g < opts.grad_tol {
            return Err(Error::NearZeroGradient(g));
        }
        let tang = (-gy / g, gx / g);
        let kappa = level_curvature(spec, p.0, p.1).max(opts.max_turn / h_cap);
        let mut h = opts.max_turn / kappa;

        // predictor-corrector with step rejection: reject when the corrector
        // moved far or when the tangent turned more than the budget (the
        // local-curvature step can otherwise leap over a saddle neck)
        let mut next = p;
        let mut accepted = false;
        for _ in 0..60 {
            let pred = (p.0 + h * tang.0, p.1 + h * tang.1);
            match newton_to_level(spec, pred, z, opts.grad_tol) {
                Ok(corr) => {
                    let corr_dist = (corr.0 - pred.0).hypot(corr.1 - pred.1);
                    let (ngx, ngy) = spec.grad(corr.0, corr.1);
                    let ng = ngx.hypot(ngy);
                    let turn_cos = if ng >= opts.grad_tol {
                        (tang.0 * (-ngy / ng) + tang.1 * (ngx / ng)).clamp(-1.0, 1.0)
                    } else {
                        -1.0
                    };
                    if corr_dist <= 0.3 * h && turn_cos.acos() <= 4.0 * opts.max_turn {
                        next = corr;
                        accepted = true;
                        break;
                    }
                }
                Err(Error::NearZeroGradient(_)) | Err(Error::TraceDiverged(_)) => {}
                Err(e) => return Err(e),
            }
            h *= 0.5;
            if h < 1e-13 * (1.0 + p.0.abs() + p.1.abs()) {
                break;
            }
        }
        if !accepted {
            return Err(Error::TraceDiverged(format!(
                "no acceptable step at ({}, {}), level {z}",
                p.0, p.1
            )));
        }

        arclen += (next.0 - p.0).hypot(next.1 - p.1);
        let f_new = (next.0 - start.0) * t0.0 + (next.1 - start.1) * t0.1;

        // closure: crossing the start section from behind, near the start
        if step > 4 && arclen > 5.0 * h0 && f_prev < 0.0 && f_new >= 0.0 {
            let perp = {
                let rx = next.0 - start.0 - f_new * t0.0;
                let ry = next.1 - start.1 - f_new * t0.1;
                rx.hypot(ry)
            };
            if perp <= 3.0 * h {
                return Ok(points);
            }
        }

        points.push(next);
        p = next;
        f_prev = f_new;
    }
    Err(Error::TraceDiverged(format!(
        "no closure after {} steps",
        opts.max_steps
    )))
}

/// Traces the component of `{H = z}` belonging to `edge`, using the stored
/// per-edge seed with continuation.
pub fn trace_level(
    spec: &HamiltonianSpec,
    reduced: &ReducedGraph,
    edge: EdgeId,
    z: f64,
    opts: &TraceOptions,
) -> Result<LevelComponent> {
    let e = reduced.graph.edge(edge);
    if !(z > e.a && z < e.b) {
        return Err(Error::LevelOutsideEdge { edge, z });
    }
    let seed = reduced.seed(edge);
    let p = continue_seed(spec, seed.point, seed.z, z, opts.grad_tol)?;
    let points = trace_closed(spec, p, z, opts)?;
    Ok(LevelComponent {
        z,
        edge: Some(edge),
        points,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ContourIntegrals {
    pub alpha: f64,
    pub beta: f64,
    /// Step-halving oscillation estimate, relative.
    pub oscillation: f64,
}

/// Contour integrals of `|grad H|` and `|grad H|^-1` over a traced
/// component, midpoint rule with curve-projected midpoints.
pub fn contour_integrals(
    spec: &HamiltonianSpec,
    comp: &LevelComponent,
    opts: &TraceOptions,
) -> Result<ContourIntegrals> {
    let (a1, b1) = midpoint_pass(spec, comp, opts, false)?;
    let (a2, b2) = midpoint_pass(spec, comp, opts, true)?;
    let osc = ((a2 - a1).abs() / a2.abs().max(1e-300)).max((b2 - b1).abs() / b2.abs().max(1e-300));
    Ok(ContourIntegrals {
        alpha: a2,
        beta: b2,
        oscillation: osc,
    })
}

fn midpoint_pass(
    spec: &HamiltonianSpec,
    comp: &LevelComponent,
    opts: &TraceOptions,
    split: bool,
) -> Result<(f64, f64)> {
    let n = comp.points.len();
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut min_g = f64::INFINITY;
    let mut segment = |p: (f64, f64), q: (f64, f64)| -> Result<()> {
        let mid = newton_to_level(
            spec,
            (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1)),
            comp.z,
            opts.grad_tol,
        )?;
        let g = spec.grad_norm(mid.0, mid.1);
        min_g = min_g.min(g);
        let dl = (q.0 - p.0).hypot(q.1 - p.1);
        alpha += g * dl;
        beta += dl / g;
        Ok(())
    };
    for i in 0..n {
        let p = comp.points[i];
        let q = comp.points[(i + 1) % n];
        if split {
            let mid = newton_to_level(
                spec,
                (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1)),
                comp.z,
                opts.grad_tol,
            )?;
            segment(p, mid)?;
            segment(mid, q)?;
        } else {
            segment(p, q)?;
        }
    }
    if min_g < opts.grad_tol {
        return Err(Error::NearZeroGradient(min_g));
    }
    Ok((alpha, beta))
}

/// Average of a plane function against the normalized invariant measure
/// `d mu ~ |grad H|^-1 dl`: returns `(int phi |grad H|^-1 dl) / beta`.
pub fn contour_average(
    spec: &HamiltonianSpec,
    comp: &LevelComponent,
    opts: &TraceOptions,
    phi: &dyn Fn(f64, f64) -> f64,
) -> Result<f64> {
    let n = comp.points.len();
    let mut num = 0.0;
    let mut beta = 0.0;
    for i in 0..n {
        let p = comp.points[i];
        let q = comp.points[(i + 1) % n];
        let mid = newton_to_level(
            spec,
            (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1)),
            comp.z,
            opts.grad_tol,
        )?;
        let g = spec.grad_norm(mid.0, mid.1);
        if g < opts.grad_tol {
            return Err(Error::NearZeroGradient(g));
        }
        let dl = (q.0 - p.0).hypot(q.1 - p.1);
        num += phi(mid.0, mid.1) * dl / g;
        beta += dl / g;
    }
    Ok(num / beta)
}

/// `int laplacian(H) / |grad H| dl`, the derivative of alpha along the edge.
pub fn contour_laplacian_integral(
    spec: &HamiltonianSpec,
    comp: &LevelComponent,
    opts: &TraceOptions,
) -> Result<f64> {
    let avg = contour_average(spec, comp, opts, &|x, y| spec.laplacian(x, y))?;
    let (_, beta) = midpoint_pass(spec, comp, opts, false)?;
    Ok(avg * beta)
}
