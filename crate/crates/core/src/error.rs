use thiserror::Error;

use crate::graph::{EdgeId, VertexId};

/// Errors across graph construction, coefficient handling, discretization
/// and time integration.
#[derive(Debug, Error)]
pub enum Error {
    // ---- graph construction -------------------------------------------
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("vertex {0:?} violates the degree rule: degree {1}, expected {2}")]
    BadDegree(VertexId, usize, String),
    #[error("edge {0:?} has an interval inconsistent with its endpoints: {1}")]
    InconsistentInterval(EdgeId, String),
    #[error("graph has no unbounded edge")]
    NoUnboundedEdge,
    #[error("truncation radius R = {r} must exceed H0 = {h0}")]
    RTooSmall { r: f64, h0: f64 },
    #[error("invalid graph description: {0}")]
    BadGraphFile(String),

    // ---- coefficients ---------------------------------------------------
    #[error("edge {0:?}: {1} class at an endpoint is inconsistent with the vertex kind: {2}")]
    InconsistentClass(EdgeId, String, String),
    #[error("delta = {delta} is not in (0, {delta_min})")]
    DeltaTooLarge { delta: f64, delta_min: f64 },
    #[error("invalid weight family parameters: {0}")]
    BadWeightFamily(String),
    #[error("coefficient field invariant violated: {0}")]
    BadCoefficient(String),

    // ---- Hamiltonian reduction -----------------------------------------
    #[error("degenerate Hessian at critical point ({0}, {1})")]
    DegenerateHessian(f64, f64),
    #[error("duplicate critical value {0} involving a saddle")]
    DuplicateCriticalValue(f64),
    #[error("contour trace diverged: {0}")]
    TraceDiverged(String),
    #[error("component selection ambiguous at saddle level {0}")]
    ComponentTrackingAmbiguity(f64),
    #[error("seed continuation left the expected component: {0}")]
    WrongComponent(String),
    #[error("gradient too small on contour: |grad H| = {0}")]
    NearZeroGradient(f64),
    #[error("level z = {z} is not strictly inside edge {edge:?}")]
    LevelOutsideEdge { edge: EdgeId, z: f64 },
    #[error("invalid Hamiltonian: {0}")]
    BadHamiltonian(String),
    #[error("expression parse error: {0}")]
    BadExpression(String),

    // ---- finite elements --------------------------------------------------
    #[error("target mesh width {target_h} does not resolve the shortest edge {min_len}")]
    MeshTooCoarse { target_h: f64, min_len: f64 },
    #[error("non-positive diagonal mass entry at dof {0}")]
    SingularMass(usize),
    #[error("linear system is singular or lost accuracy: {0}")]
    SingularSystem(String),
    #[error("shift {lambda} is not coercive (requires lambda > {threshold})")]
    NonCoerciveShift { lambda: f64, threshold: f64 },
    #[error("function is discontinuous at vertex {0:?} (gap {1:.3e})")]
    DiscontinuousAtVertex(VertexId, f64),
    #[error("meshes are not nested: {0}")]
    NonNestedMeshes(String),

    // ---- noise -----------------------------------------------------------
    #[error("KL bound violated at edge {edge:?}, z = {z}: sum |e_j|^2 = {value} > {bound}")]
    BoundViolated {
        edge: EdgeId,
        z: f64,
        value: f64,
        bound: f64,
    },
    #[error("spectral atoms are not symmetric under xi -> -xi")]
    AsymmetricAtoms,

    // ---- time integration -------------------------------------------------
    #[error("non-finite state at step {step}: {context}")]
    NonFinite { step: usize, context: String },
    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
