//! Cut-off profiles freezing the dynamics beyond `z = R + 1`.
//!
//! The left derivative at `R + 1` must be nonzero so the truncated diffusion
//! coefficient decays linearly at the artificial boundary vertex, like at
//! every other exterior vertex.

use crate::field::Field1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutOffKind {
    /// `eta(z) = R + 1 - z` on `[R, R+1]`, `K0 = -1`.
    Linear,
    /// `eta(z) = 1 - (z - R)^2` on `[R, R+1]`: C1 at `R`, `K0 = -2`.
    SmoothedLinear,
}

/// Continuous profile with `eta = 1` on `[0, R]` and `eta = 0` beyond `R+1`.
#[derive(Debug, Clone, Copy)]
pub struct CutOff {
    r: f64,
    kind: CutOffKind,
}

pub fn make_cutoff(r: f64, kind: CutOffKind) -> CutOff {
    assert!(r > 0.0, "cut-off radius must be positive");
    CutOff { r, kind }
}

impl CutOff {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn kind(&self) -> CutOffKind {
        self.kind
    }

    /// Left derivative at `R + 1`; nonzero by construction.
    pub fn k0(&self) -> f64 {
        match self.kind {
            CutOffKind::Linear => -1.0,
            CutOffKind::SmoothedLinear => -2.0,
        }
    }
}

impl Field1D for CutOff {
    fn eval(&self, z: f64) -> f64 {
        if z <= self.r {
            1.0
        } else if z >= self.r + 1.0 {
            0.0
        } else {
            match self.kind {
                CutOffKind::Linear => self.r + 1.0 - z,
                CutOffKind::SmoothedLinear => 1.0 - (z - self.r) * (z - self.r),
            }
        }
    }

    /// One-sided from the left at the kinks.
    fn deriv(&self, z: f64) -> f64 {
        if z <= self.r || z > self.r + 1.0 {
            0.0
        } else {
            match self.kind {
                CutOffKind::Linear => -1.0,
                CutOffKind::SmoothedLinear => -2.0 * (z - self.r),
            }
        }
    }
}
