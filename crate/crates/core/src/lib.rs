//! Solver library for degenerate parabolic stochastic PDEs on non-compact
//! metric graphs.
//!
//! The equation under study is
//!
//! ```text
//!   du = L u dt + b(u) dt + g(u) dW,      L f = (alpha f')' / (2 beta)
//! ```
//!
//! posed edge-wise on a metric graph with Kirchhoff gluing at interior
//! vertices. The coefficients `alpha`, `beta` come from contour integrals of
//! a planar Hamiltonian and degenerate near vertices, the graph has one
//! unbounded edge, and `W` is a Q-Wiener process with finite spectral
//! measure. The numerical pipeline is
//!
//! 1. truncate the graph at `z = R + 1` with a cut-off of nonzero left slope
//!    ([`coeff::CutOff`]),
//! 2. regularize the degenerate coefficients locally near vertices with a
//!    bump of width `2 delta` ([`coeff::regularize`]),
//! 3. discretize with P1 finite elements on an equally spaced partition of
//!    each edge ([`fem`]), and integrate in time with a drift-implicit
//!    Euler-Maruyama scheme ([`solver`]).
//!
//! [`hamiltonian`] derives graphs and coefficients from a planar Hamiltonian
//! (critical points, level-set contour tracing, contour integrals), and
//! [`noise`] builds the Karhunen-Loeve basis of the driving process either
//! directly or from atomic spectral measures.

// Comparisons are deliberately written negated so NaN parameters fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coeff;
pub mod fem;
pub mod field;
pub mod graph;
pub mod hamiltonian;
pub mod noise;
pub mod solver;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
