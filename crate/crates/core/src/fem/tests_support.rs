//! FEM fixtures shared by unit tests across the crate.

use std::sync::Arc;

use super::{assemble, AssembledOperators, FemFields, FemSpace};
use crate::coeff::CoefficientField;
use crate::field::ScalarField;
use crate::graph::tests_support::unit_interval;
use crate::graph::TruncatedGraph;

/// Constant-coefficient operators on the unit interval with `n` elements.
pub(crate) fn unit_ops(n: usize) -> (Arc<FemSpace>, Arc<AssembledOperators>) {
    unit_ops_weighted(n, 1.0, 1.0)
}

pub(crate) fn unit_ops_weighted(
    n: usize,
    alpha: f64,
    beta: f64,
) -> (Arc<FemSpace>, Arc<AssembledOperators>) {
    let g = Arc::new(TruncatedGraph::from_compact(&unit_interval()).unwrap());
    let space = Arc::new(FemSpace::from_elements(g, vec![n]));
    let coeff = CoefficientField::constant(1, alpha, beta);
    let gamma = ScalarField::constant(1, 1.0);
    let ops = assemble(
        &space,
        &FemFields {
            alpha: &coeff.alpha,
            beta_delta: &coeff.beta,
            beta: &coeff.beta,
            gamma: &gamma,
        },
    )
    .unwrap();
    (space, ops)
}
