//! The canonical Laplacian `Δ_μ`, its Green's function and spectrum, and
//! the invariants built from them.
//!
//! In a local coordinate `z`, `∂∂̄f = -(i/2) Δ_flat f dA`, so the
//! convention `∂∂̄f = π i Δ_μ(f) μ` gives `Δ_μ f · μ = -Δ_flat f dA / 2π`.
//! The weak form is therefore `(1/2π) ∫ ∇f·∇g dA` against the mass
//! `∫ f g μ`, and `Δ_μ` is nonnegative.

mod green;
mod invariants;
mod spectral;

use std::f64::consts::PI;

use faer::prelude::*;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;
use thiserror::Error;

use crate::mesh::{MeshError, SurfaceMesh};

pub use green::{green_difference_oracle, green_function, DifferenceOracle, GreenField, SourceRegion};
pub use invariants::{
    log_delta_matrix, theorem_a_residuals, theorem_a_spread, theorem_b_residual, weierstrass_energy_psi,
    GreenMatrix,
};
pub use spectral::{eigenpairs, kawazumi_zhang_phi, phi_direct, PhiEstimate, SpectralData};

/// Normalization constants of the discrete operator.
pub mod constants {
    use std::f64::consts::PI;

    /// `∂∂̄f = -(i/2) Δ_flat f dA` in any holomorphic chart.
    pub const DDBAR_TO_FLAT: f64 = 0.5;
    /// Multiplier of the cotangent stiffness: `Δ_μ` has weak form
    /// `(1/2π) ∫ ∇f·∇g dA`.
    pub const STIFFNESS_SCALE: f64 = 1.0 / (2.0 * PI);
    /// `g_μ` behaves like `+log r` near its pole.
    pub const LOG_COEFFICIENT: f64 = 1.0;
}

#[derive(Debug, Error)]
pub enum LaplaceError {
    #[error("mesh is disconnected")]
    DisconnectedMesh,
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("requested {requested} eigenpairs but the mesh has only {available} vertices")]
    InsufficientSpectrum { requested: usize, available: usize },
    #[error("spectral tail estimate {tail:e} exceeds tolerance {tol:e}")]
    SpectralTail { tail: f64, tol: f64 },
    #[error("evaluation point is a pole of the integrand")]
    EvaluationAtPole,
    #[error("source vertex {0} has no usable chart neighbourhood")]
    BadSource(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Stiffness and mass matrices of `Δ_μ` with a factorization of the
/// stiffness pinned at one vertex.
#[derive(Clone)]
pub struct LaplaceOperator {
    pub n: usize,
    /// Upper-and-lower triplets of `S`.
    pub stiffness: Vec<Triplet<usize, usize, f64>>,
    /// Lumped `μ`-mass per vertex.
    pub mass: Vec<f64>,
    pinned: usize,
    pinned_factor: Llt<usize, f64>,
}

impl std::fmt::Debug for LaplaceOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LaplaceOperator").field("n", &self.n).field("nnz", &self.stiffness.len()).finish()
    }
}

fn check_connected(mesh: &SurfaceMesh) -> Result<(), LaplaceError> {
    let n = mesh.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for t in &mesh.triangles {
        for a in 0..3 {
            adj[t[a]].push(t[(a + 1) % 3]);
            adj[t[(a + 1) % 3]].push(t[a]);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    if count == n {
        Ok(())
    } else {
        Err(LaplaceError::DisconnectedMesh)
    }
}

/// Assemble `(S, M)` with `S v = λ M v` discretizing `Δ_μ`.
pub fn assemble_laplacian(mesh: &SurfaceMesh) -> Result<LaplaceOperator, LaplaceError> {
    check_connected(mesh)?;
    let n = mesh.num_vertices();
    let mut trip = Vec::with_capacity(mesh.triangles.len() * 9);
    for (t, cot) in mesh.triangles.iter().zip(&mesh.cotangents) {
        for a in 0..3 {
            // edge opposite corner a joins b and c
            let (b, c) = (t[(a + 1) % 3], t[(a + 2) % 3]);
            let w = 0.5 * cot[a] * constants::STIFFNESS_SCALE;
            trip.push(Triplet::new(b, c, -w));
            trip.push(Triplet::new(c, b, -w));
            trip.push(Triplet::new(b, b, w));
            trip.push(Triplet::new(c, c, w));
        }
    }
    let pinned = n - 1;
    let pinned_factor = factor(n, &trip, Some(pinned), 0.0, &[])?;
    Ok(LaplaceOperator { n, stiffness: trip, mass: mesh.mu_weights.clone(), pinned, pinned_factor })
}

/// Cholesky factor of `S + shift·M`, optionally with vertex `pin` removed.
fn factor(
    n: usize,
    trip: &[Triplet<usize, usize, f64>],
    pin: Option<usize>,
    shift: f64,
    mass: &[f64],
) -> Result<Llt<usize, f64>, LaplaceError> {
    let keep = |i: usize| pin != Some(i);
    let idx = |i: usize| match pin {
        Some(p) if i > p => i - 1,
        _ => i,
    };
    let dim = if pin.is_some() { n - 1 } else { n };
    let mut t: Vec<Triplet<usize, usize, f64>> = trip
        .iter()
        .filter(|e| keep(e.row) && keep(e.col))
        .map(|e| Triplet::new(idx(e.row), idx(e.col), e.val))
        .collect();
    if shift != 0.0 {
        for (i, &m) in mass.iter().enumerate() {
            if keep(i) {
                t.push(Triplet::new(idx(i), idx(i), shift * m));
            }
        }
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &t)
        .map_err(|e| LaplaceError::SolverFailure(format!("{e:?}")))?;
    a.sp_cholesky(Side::Lower).map_err(|e| LaplaceError::SolverFailure(format!("{e:?}")))
}

impl LaplaceOperator {
    /// `S x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for e in &self.stiffness {
            y[e.row] += e.val * x[e.col];
        }
        y
    }

    /// Solve `S u = b` for `b` summing to zero; the result has `Σ u M = 0`.
    /// Loads are measured against the unit total mass, hence the absolute floor.
    pub fn solve_mean_zero(&self, b: &[f64]) -> Result<Vec<f64>, LaplaceError> {
        let total: f64 = b.iter().sum();
        let scale = b.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
        if total.abs() > 1e-8 * scale + 1e-12 {
            return Err(LaplaceError::SolverFailure(format!("incompatible right-hand side (sum {total:e})")));
        }
        let p = self.pinned;
        let mut v: Vec<f64> = b.iter().enumerate().filter(|&(i, _)| i != p).map(|(_, &x)| x).collect();
        let m = v.len();
        self.pinned_factor.solve_in_place(MatMut::from_column_major_slice_mut(&mut v, m, 1));
        let mut u = Vec::with_capacity(self.n);
        u.extend_from_slice(&v[..p]);
        u.push(0.0);
        u.extend_from_slice(&v[p..]);
        let mean: f64 = u.iter().zip(&self.mass).map(|(a, m)| a * m).sum();
        for x in &mut u {
            *x -= mean;
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(LaplaceError::SolverFailure("non-finite solution".into()));
        }
        Ok(u)
    }

    /// Remove the mass-weighted total from a load vector so that it is
    /// compatible with the constant kernel.
    pub fn project_load(&self, b: &mut [f64]) {
        let total: f64 = b.iter().sum();
        for (x, m) in b.iter_mut().zip(&self.mass) {
            *x -= total * m;
        }
    }
}

/// Flat-torus eigenvalues `2π Im τ |k|²`-type oracle for `C/(Z + τZ)` under
/// the present convention: the `count` smallest nonzero values.
pub fn flat_torus_eigenvalues(tau: num_complex::Complex64, count: usize) -> Vec<f64> {
    // characters exp(2πi(m s + n r)) for z = s + r τ; |∇|² = 4π²|n - m τ|²/Im τ²
    let mut out = Vec::new();
    let span = 12i64;
    for m in -span..=span {
        for n in -span..=span {
            if m == 0 && n == 0 {
                continue;
            }
            let k = num_complex::Complex64::new(n as f64, 0.0) - tau * m as f64;
            let flat = 4.0 * PI * PI * k.norm_sqr() / (tau.im * tau.im);
            // density of μ is 1/Im τ against dA
            out.push(flat * tau.im * constants::STIFFNESS_SCALE);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.truncate(count);
    out
}

#[cfg(test)]
mod tests;
