//! Canonical Green's functions on hyperelliptic Riemann surfaces.
//!
//! The pipeline runs from a branch set on the sphere ([`branch`]) through
//! period matrices and the canonical metric ([`periods`]), a triangulated
//! two-sheeted model of the surface ([`mesh`]), to the canonical Laplacian,
//! Green's functions and the invariants `ψ` and `φ` ([`laplace`]). Genus one
//! has its own closed-form stack in [`elliptic`] which doubles as an oracle
//! for the numerical path.

pub mod branch;
pub mod curve;
pub mod elliptic;
pub mod laplace;
pub mod mesh;
pub mod periods;
pub mod pipeline;
pub mod quad;
