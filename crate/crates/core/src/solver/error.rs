//! Weighted-norm differences between solutions on nested meshes.

use crate::fem::{AssembledOperators, FemSpace};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorWeight {
    /// `beta gamma`: the norm the convergence statements are posed in.
    BetaGamma,
    /// `beta^delta gamma`: the solver-side norm.
    BetaDeltaGamma,
}

/// `|| u_fine - lift(u_coarse) ||` in the requested weighted L2 norm, using
/// the fine mesh's mass matrix. The coarse mesh must be nested in the fine
/// one (power-of-two refinement).
pub fn weighted_error(
    ops_fine: &AssembledOperators,
    u_fine: &[f64],
    space_coarse: &FemSpace,
    u_coarse: &[f64],
    weight: ErrorWeight,
) -> Result<f64> {
    let lifted = ops_fine.space.lift_from(space_coarse, u_coarse)?;
    let diff: Vec<f64> = u_fine.iter().zip(&lifted).map(|(a, b)| a - b).collect();
    Ok(match weight {
        ErrorWeight::BetaGamma => ops_fine.norm_m_err(&diff),
        ErrorWeight::BetaDeltaGamma => ops_fine.norm_m_delta(&diff),
    })
}
