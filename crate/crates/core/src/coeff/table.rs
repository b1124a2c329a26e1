//! Monotone cubic interpolation tables with analytic endpoint tails.
//!
//! Tabulated coefficients are sampled strictly inside an edge (integrals
//! degenerate at critical levels), so evaluation near the endpoints falls
//! back to the declared asymptotic model fitted to the nearest samples; this
//! avoids ever evaluating `log` at zero and keeps the log singularity
//! integrable.

use super::{AsymptoticClass, EndpointSpec};
use crate::field::Field1D;

/// The asymptotic model used outside the sampled range.
#[derive(Debug, Clone, Copy)]
enum Tail {
    /// `c * |z - z0|`
    Linear {
        z0: f64,
        c: f64,
    },
    /// `c0 + c1 * |z - z0|` near the far end of an unbounded edge (`z0 = 0`).
    Affine {
        c0: f64,
        c1: f64,
    },
    Constant(f64),
    /// `c0 + c1 * |log|z - z0||`
    Log {
        z0: f64,
        c0: f64,
        c1: f64,
    },
}

impl Tail {
    fn eval(&self, z: f64) -> f64 {
        match *self {
            Tail::Linear { z0, c } => c * (z - z0).abs(),
            Tail::Affine { c0, c1 } => c0 + c1 * z,
            Tail::Constant(c) => c,
            Tail::Log { z0, c0, c1 } => {
                let d = (z - z0).abs().max(1e-300);
                c0 + c1 * d.ln().abs()
            }
        }
    }

    fn deriv(&self, z: f64) -> f64 {
        match *self {
            Tail::Linear { z0, c } => c * (z - z0).signum(),
            Tail::Affine { c1, .. } => c1,
            Tail::Constant(_) => 0.0,
            Tail::Log { z0, c1, .. } => {
                let d = z - z0;
                let da = d.abs().max(1e-300);
                // d/dz |log|d|| = sign(log|d|) / d
                c1 * da.ln().signum() / if d == 0.0 { 1e-300 } else { d }
            }
        }
    }
}

/// Fritsch-Carlson monotone cubic through `(z_i, y_i)` plus endpoint tails.
#[derive(Clone)]
pub struct PchipTable {
    z: Vec<f64>,
    y: Vec<f64>,
    /// Derivative at each sample.
    d: Vec<f64>,
    tail_lo: Tail,
    tail_hi: Tail,
}

impl PchipTable {
    /// `samples` must be sorted by `z` with at least 4 points. `at_lo` /
    /// `at_hi` declare the asymptotic class at the edge endpoints `z_lo` /
    /// `z_hi` (`z_hi = inf` for the unbounded edge); the tail constants are
    /// fitted so the model passes through the outermost sample.
    pub fn new(
        samples: &[(f64, f64)],
        z_lo: f64,
        at_lo: &EndpointSpec,
        z_hi: f64,
        at_hi: &EndpointSpec,
    ) -> Self {
        assert!(samples.len() >= 4, "need at least 4 samples");
        assert!(
            samples.windows(2).all(|w| w[0].0 < w[1].0),
            "samples must be increasing in z"
        );
        let z: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let y: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let d = fritsch_carlson_slopes(&z, &y);
        let n = z.len();
        let tail_lo = fit_tail(at_lo.class, z_lo, (z[0], y[0]), (z[1], y[1]));
        let tail_hi = fit_tail(
            at_hi.class,
            z_hi,
            (z[n - 1], y[n - 1]),
            (z[n - 2], y[n - 2]),
        );
        Self {
            z,
            y,
            d,
            tail_lo,
            tail_hi,
        }
    }

    pub fn sample_range(&self) -> (f64, f64) {
        (self.z[0], *self.z.last().unwrap())
    }

    fn segment(&self, z: f64) -> usize {
        match self.z.binary_search_by(|v| v.partial_cmp(&z).unwrap()) {
            Ok(i) => i.min(self.z.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.z.len() - 2),
        }
    }
}

impl Field1D for PchipTable {
    fn eval(&self, z: f64) -> f64 {
        if z < self.z[0] {
            return self.tail_lo.eval(z);
        }
        if z > *self.z.last().unwrap() {
            return self.tail_hi.eval(z);
        }
        let i = self.segment(z);
        let h = self.z[i + 1] - self.z[i];
        let t = (z - self.z[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    fn deriv(&self, z: f64) -> f64 {
        if z < self.z[0] {
            return self.tail_lo.deriv(z);
        }
        if z > *self.z.last().unwrap() {
            return self.tail_hi.deriv(z);
        }
        let i = self.segment(z);
        let h = self.z[i + 1] - self.z[i];
        let t = (z - self.z[i]) / h;
        let (d00, d10, d01, d11) = hermite_basis_deriv(t);
        (d00 * self.y[i] + d01 * self.y[i + 1]) / h + d10 * self.d[i] + d11 * self.d[i + 1]
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

fn hermite_basis_deriv(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    (
        6.0 * t2 - 6.0 * t,
        3.0 * t2 - 4.0 * t + 1.0,
        -6.0 * t2 + 6.0 * t,
        3.0 * t2 - 2.0 * t,
    )
}

/// Slopes limited so the interpolant is monotone on monotone data.
fn fritsch_carlson_slopes(z: &[f64], y: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mut delta = vec![0.0; n - 1];
    for i in 0..n - 1 {
        delta[i] = (y[i + 1] - y[i]) / (z[i + 1] - z[i]);
    }
    let mut d = vec![0.0; n];
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            // weighted harmonic mean
            let h0 = z[i] - z[i - 1];
            let h1 = z[i + 1] - z[i];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // clamp endpoint slopes to preserve monotonicity of the first segment
    for (i, di) in [(0usize, 0usize), (n - 1, n - 2)] {
        if d[i] * delta[di] < 0.0 {
            d[i] = 0.0;
        } else if delta[di] != 0.0 && (d[i] / delta[di]).abs() > 3.0 {
            d[i] = 3.0 * delta[di];
        }
    }
    d
}

fn fit_tail(class: AsymptoticClass, z_end: f64, nearest: (f64, f64), second: (f64, f64)) -> Tail {
    match class {
        AsymptoticClass::LinearVanishing => {
            let c = nearest.1 / (nearest.0 - z_end).abs().max(1e-300);
            Tail::Linear { z0: z_end, c }
        }
        AsymptoticClass::Constant => Tail::Constant(nearest.1),
        AsymptoticClass::LogBlowup => {
            // two-point fit of c0 + c1 |log|z - z_end||, exact at the nearest sample
            let l1 = (nearest.0 - z_end).abs().ln().abs();
            let l2 = (second.0 - z_end).abs().ln().abs();
            let c1 = if (l1 - l2).abs() > 1e-14 {
                (nearest.1 - second.1) / (l1 - l2)
            } else {
                0.0
            };
            let c0 = nearest.1 - c1 * l1;
            Tail::Log { z0: z_end, c0, c1 }
        }
        AsymptoticClass::LinearGrowth => {
            // two-point affine fit, exact at the outermost sample
            let c1 = (nearest.1 - second.1) / (nearest.0 - second.0);
            let c0 = nearest.1 - c1 * nearest.0;
            Tail::Affine { c0, c1 }
        }
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::coeff::EndpointSpec;
    use crate::field::Field1D;
    use proptest::prelude::*;

    proptest! {
        /// Monotone samples produce a monotone interpolant (the point of the
        /// slope limiter), and the table reproduces its samples exactly.
        #[test]
        fn monotone_data_stays_monotone(increments in proptest::collection::vec(0.01f64..2.0, 6..24)) {
            let mut z = 0.1;
            let mut y = 1.0;
            let mut samples = vec![(z, y)];
            for (i, dy) in increments.iter().enumerate() {
                z += 0.2 + 0.05 * (i as f64);
                y += dy;
                samples.push((z, y));
            }
            let spec = EndpointSpec::new(AsymptoticClass::Constant, 1.0);
            let t = PchipTable::new(&samples, 0.0, &spec, z + 0.1, &spec);
            for (zs, ys) in &samples {
                prop_assert!((t.eval(*zs) - ys).abs() < 1e-12);
            }
            let mut prev = t.eval(samples[0].0);
            let n = 400;
            for i in 1..=n {
                let zz = samples[0].0
                    + (samples.last().unwrap().0 - samples[0].0) * i as f64 / n as f64;
                let v = t.eval(zz);
                prop_assert!(v >= prev - 1e-12, "not monotone at z = {zz}");
                prev = v;
            }
        }
    }
}
