//! Critical point search: Newton from grid seeds, Hessian classification.

use super::HamiltonianSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Minimum,
    Maximum,
    Saddle,
}

#[derive(Debug, Clone, Copy)]
pub struct CriticalPoint {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub kind: CriticalKind,
}

/// Newton-converged, deduplicated critical points sorted by value.
///
/// Equal critical values are rejected when a saddle is involved (the level
/// structure would be ambiguous); ties between extrema are harmless and kept
/// — the symmetric double well is the canonical example.
pub fn find_critical_points(spec: &HamiltonianSpec) -> Result<Vec<CriticalPoint>> {
    let n = spec.seed_resolution.max(8);
    let box_size = spec.box_hi - spec.box_lo;
    let mut roots: Vec<(f64, f64)> = Vec::new();

    for i in 0..=n {
        for j in 0..=n {
            let mut x = spec.box_lo + box_size * i as f64 / n as f64;
            let mut y = spec.box_lo + box_size * j as f64 / n as f64;
            let mut converged = false;
            for _ in 0..80 {
                let (gx, gy) = spec.grad(x, y);
                let (hxx, hxy, hyy) = spec.hess(x, y);
                let det = hxx * hyy - hxy * hxy;
                if det.abs() < 1e-14 {
                    break;
                }
                let dx = (-gx * hyy + gy * hxy) / det;
                let dy = (gx * hxy - gy * hxx) / det;
                x += dx;
                y += dy;
                if x.abs() > 2.0 * box_size + spec.box_hi.abs() || !x.is_finite() || !y.is_finite()
                {
                    break;
                }
                if dx.hypot(dy) < 1e-14 * (1.0 + x.abs() + y.abs()) {
                    converged = true;
                    break;
                }
            }
            if converged
                && spec.grad_norm(x, y) < 1e-10 * (1.0 + box_size)
                && !roots
                    .iter()
                    .any(|&(rx, ry)| (rx - x).hypot(ry - y) < 1e-7 * box_size)
            {
                roots.push((x, y));
            }
        }
    }

    let mut cps: Vec<CriticalPoint> = Vec::with_capacity(roots.len());
    for (x, y) in roots {
        let (hxx, hxy, hyy) = spec.hess(x, y);
        let det = hxx * hyy - hxy * hxy;
        let scale = hxx.abs().max(hyy.abs()).max(hxy.abs()).max(1e-30);
        if det.abs() < 1e-8 * scale * scale {
            return Err(Error::DegenerateHessian(x, y));
        }
        let kind = if det < 0.0 {
            CriticalKind::Saddle
        } else if hxx + hyy > 0.0 {
            CriticalKind::Minimum
        } else {
            CriticalKind::Maximum
        };
        cps.push(CriticalPoint {
            x,
            y,
            value: spec.eval(x, y),
            kind,
        });
    }

    cps.sort_by(|a, b| {
        (a.value, a.x, a.y)
            .partial_cmp(&(b.value, b.x, b.y))
            .expect("finite values")
    });

    let vscale = cps.iter().map(|c| c.value.abs()).fold(1.0_f64, f64::max);
    for w in cps.windows(2) {
        if (w[1].value - w[0].value).abs() < 1e-9 * vscale
            && (w[0].kind == CriticalKind::Saddle || w[1].kind == CriticalKind::Saddle)
        {
            return Err(Error::DuplicateCriticalValue(w[0].value));
        }
    }

    if cps.is_empty() {
        return Err(Error::BadHamiltonian(
            "no critical points found in the search box".into(),
        ));
    }
    Ok(cps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{double_well, harmonic, triple_well};

    #[test]
    fn harmonic_has_one_minimum_at_origin() {
        let cps = find_critical_points(&harmonic()).unwrap();
        assert_eq!(cps.len(), 1);
        assert_eq!(cps[0].kind, CriticalKind::Minimum);
        assert!(cps[0].x.abs() < 1e-12 && cps[0].y.abs() < 1e-12);
        assert!(cps[0].value.abs() < 1e-14);
    }

    /// Hand calculus: grad H = (4 x (x^2 - 1), 2 y) vanishes at (0,0), (+-1,0);
    /// Hessian diag(12 x^2 - 4, 2) gives a saddle at the origin, minima at +-1.
    #[test]
    fn double_well_minima_and_saddle() {
        let cps = find_critical_points(&double_well()).unwrap();
        assert_eq!(cps.len(), 3);
        assert_eq!(cps[0].kind, CriticalKind::Minimum);
        assert_eq!(cps[1].kind, CriticalKind::Minimum);
        assert_eq!(cps[2].kind, CriticalKind::Saddle);
        assert!((cps[0].x + 1.0).abs() < 1e-9);
        assert!((cps[1].x - 1.0).abs() < 1e-9);
        assert!(cps[2].x.abs() < 1e-9);
        assert!((cps[2].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triple_well_finds_three_minima_two_saddles() {
        let cps = find_critical_points(&triple_well()).unwrap();
        let minima = cps
            .iter()
            .filter(|c| c.kind == CriticalKind::Minimum)
            .count();
        let saddles = cps
            .iter()
            .filter(|c| c.kind == CriticalKind::Saddle)
            .count();
        assert_eq!((minima, saddles), (3, 2));
        assert!(cps[0].value.abs() < 1e-12, "global minimum shifted to zero");
        // pairwise distinct values
        for w in cps.windows(2) {
            assert!(w[1].value - w[0].value > 1e-6);
        }
    }

    #[test]
    fn degenerate_hessian_is_reported() {
        // H = x^4 + y^4 has a degenerate critical point at the origin
        let spec = crate::hamiltonian::HamiltonianSpec::new(
            |x, y| x.powi(4) + y.powi(4),
            |x, y| (4.0 * x.powi(3), 4.0 * y.powi(3)),
            |x, y| (12.0 * x * x, 0.0, 12.0 * y * y),
            -2.0,
            2.0,
            16,
        );
        assert!(matches!(
            find_critical_points(&spec),
            Err(Error::DegenerateHessian(_, _)) | Err(Error::BadHamiltonian(_))
        ));
    }
}
