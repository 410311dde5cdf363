//! Stabilizer subspaces as Bell-certified objects.
//!
//! This crate builds stabilizer codes (the five-qubit code, the toric code on
//! an L×L torus), certifies their code spaces as genuinely multipartite
//! entangled, synthesizes the Bell inequalities those subspaces maximally
//! violate, and verifies the whole self-testing chain numerically:
//!
//! - [`pauli`] — exact signed Pauli-string algebra (symplectic bitmasks) with
//!   dense and matrix-free numeric realizations;
//! - [`stabilizer`] — stabilizer groups, code projectors/bases, and
//!   genuine-entanglement certificates over all bipartitions;
//! - [`toric`] — the torus lattice, its vertex/plaquette generators and loop
//!   operators, and the constructive entanglement witness;
//! - [`bell`] — Bell expressions synthesized from generators by the
//!   X→(A₀+A₁)/√2, Z→(A₀−A₁)/√2 substitution at one chosen party;
//! - [`bounds`] — classical bounds by exhaustive deterministic-strategy
//!   enumeration, quantum values by dense or matrix-free eigenanalysis, and
//!   sum-of-squares certificate residuals;
//! - [`selftest`] — stabilization/anticommutation residuals, qubit-frame
//!   extraction, decomposition onto the code space, and subspace
//!   extractability;
//! - [`robustness`] — extraction channels, the K ⪰ aB + b operator
//!   certificate, and the extractability-vs-violation curve;
//! - [`geometry`] — full correlation vectors of the maximally violating
//!   states and the affine dimension of the face they span.

pub mod bell;
pub mod bounds;
pub mod geometry;
pub mod linalg;
pub mod pauli;
pub mod robustness;
pub mod selftest;
pub mod stabilizer;
pub mod toric;

mod error;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
