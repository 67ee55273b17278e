use nalgebra::DMatrix;

use super::{green_function, LaplaceError, LaplaceOperator, SourceRegion};
use crate::branch::BranchSet;
use crate::mesh::SurfaceMesh;

/// `g_μ(w_i, w_j)` for all pairs of Weierstrass points.
#[derive(Debug, Clone)]
pub struct GreenMatrix {
    /// Row `i` is the field with source `w_i`; the diagonal is zero.
    pub raw: DMatrix<f64>,
    /// `(raw + rawᵀ)/2`.
    pub symmetric: DMatrix<f64>,
    /// Largest `|g(w_i,w_j) - g(w_j,w_i)|`.
    pub asymmetry: f64,
    /// `∫ g μ` for each source after the constant was fixed.
    pub means: Vec<f64>,
}

impl GreenMatrix {
    pub fn compute(mesh: &SurfaceMesh, op: &LaplaceOperator) -> Result<GreenMatrix, LaplaceError> {
        let nb = mesh.marked.len();
        let mut raw = DMatrix::zeros(nb, nb);
        let mut means = Vec::with_capacity(nb);
        for i in 0..nb {
            let region = SourceRegion::branch(mesh, i)?;
            let g = green_function(mesh, op, &region)?;
            for j in 0..nb {
                if j != i {
                    raw[(i, j)] = g.values[mesh.marked[j]];
                }
            }
            means.push(g.mean);
        }
        let symmetric = (&raw + raw.transpose()) * 0.5;
        let asymmetry = (&raw - raw.transpose()).abs().max();
        Ok(GreenMatrix { raw, symmetric, asymmetry, means })
    }
}

/// `ψ = (1/(2h+2)) Σ_{i≠j} g_μ(w_i, w_j)`.
pub fn weierstrass_energy_psi(green: &GreenMatrix) -> f64 {
    let n = green.symmetric.nrows();
    green.symmetric.sum() / n as f64
}

/// `g_μ(w_i,w_j) - log|δ_ij|/(4h(2h+1)) - ψ/(2h+1)` for `i ≠ j` (zero on the diagonal).
pub fn theorem_a_residuals(green: &GreenMatrix, log_delta: &DMatrix<f64>, psi: f64, h: usize) -> DMatrix<f64> {
    let n = green.symmetric.nrows();
    let hf = h as f64;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            green.symmetric[(i, j)] - log_delta[(i, j)] / (4.0 * hf * (2.0 * hf + 1.0)) - psi / (2.0 * hf + 1.0)
        }
    })
}

/// Spread over pairs of `g_μ(w_i,w_j) - log|δ_ij|/(4h(2h+1))`, and its mean.
pub fn theorem_a_spread(green: &GreenMatrix, log_delta: &DMatrix<f64>, h: usize) -> (f64, f64) {
    let n = green.symmetric.nrows();
    let hf = h as f64;
    let mut vals = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            vals.push(green.symmetric[(i, j)] - log_delta[(i, j)] / (4.0 * hf * (2.0 * hf + 1.0)));
        }
    }
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo, vals.iter().sum::<f64>() / vals.len() as f64)
}

/// `ψ - φ/(2h) - log 2`.
pub fn theorem_b_residual(psi: f64, phi: f64, h: usize) -> f64 {
    psi - phi / (2.0 * h as f64) - std::f64::consts::LN_2
}

/// `log|δ_ij|` for all pairs (zero on the diagonal).
pub fn log_delta_matrix(bs: &BranchSet) -> DMatrix<f64> {
    let n = bs.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { bs.log_abs_delta(i, j).expect("valid indices") })
}
