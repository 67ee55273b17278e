use faer::prelude::*;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::{factor, LaplaceError, LaplaceOperator};
use crate::mesh::SurfaceMesh;

/// Lowest eigenpairs of `S v = λ M v`, `M`-orthonormal.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// `eigenfunctions[ℓ][v]`.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// Largest `|∫ φ_ℓ φ_m μ - δ_ℓm|`.
    pub orthonormality_defect: f64,
    /// Lanczos steps taken.
    pub krylov_dimension: usize,
}

impl SpectralData {
    /// The truncation order `L` (eigenpairs `0..=L` are stored).
    pub fn order(&self) -> usize {
        self.eigenvalues.len() - 1
    }
}

fn mdot(m: &[f64], a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).zip(m).map(|((x, y), w)| x * y * w).sum()
}

/// `w -= Q Qᵀ M w`, repeated once if the first pass cancelled most of `w`.
fn project_out(q: faer::MatRef<'_, f64>, m: &[f64], w: &mut [f64]) {
    let before = mdot(m, w, w).sqrt();
    for _ in 0..2 {
        let mw = Col::from_fn(w.len(), |i| m[i] * w[i]);
        let c = q.transpose() * &mw;
        let qc = q * &c;
        w.iter_mut().zip(qc.iter()).for_each(|(x, y)| *x -= y);
        if mdot(m, w, w).sqrt() > std::f64::consts::FRAC_1_SQRT_2 * before {
            break;
        }
    }
}

/// `V ← V L⁻ᵀ` with `VᵀMV = LLᵀ`; returns the largest entry of `VᵀMV - I` before.
fn m_orthonormalize(v: &mut Mat<f64>, m: &[f64]) -> Result<f64, LaplaceError> {
    let k = v.ncols();
    let mv = Mat::from_fn(v.nrows(), k, |i, j| m[i] * v[(i, j)]);
    let g = v.transpose() * &mv;
    let gram = DMatrix::from_fn(k, k, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]));
    let defect = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| (gram[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0_f64, f64::max);
    let chol = gram
        .cholesky()
        .ok_or_else(|| LaplaceError::SolverFailure("Ritz vectors are linearly dependent".into()))?;
    let linv = chol.l().try_inverse().expect("triangular factor is invertible");
    let lt = Mat::from_fn(k, k, |i, j| linv[(j, i)]);
    *v = &*v * &lt;
    Ok(defect)
}

/// The `l + 1` smallest eigenpairs by shift-invert Lanczos with full
/// reorthogonalization in the `M` inner product.
pub fn eigenpairs(op: &LaplaceOperator, l: usize) -> Result<SpectralData, LaplaceError> {
    let n = op.n;
    let want = l + 1;
    if l == 0 || want + 10 > n {
        return Err(LaplaceError::InsufficientSpectrum { requested: want, available: n });
    }
    let m = &op.mass;
    let shift = 0.1;
    let llt = factor(n, &op.stiffness, None, shift, m)?;
    let solve = |rhs: &mut [f64]| {
        llt.solve_in_place(faer::MatMut::from_column_major_slice_mut(rhs, n, 1));
    };

    let mut target = (2 * want + 60).min(n - 1);
    let mut basis = Mat::<f64>::zeros(n, target + 1);
    // deterministic start vector
    let mut q0: Vec<f64> = (0..n).map(|i| 1.0 + (0.7 * i as f64 + 0.3).sin()).collect();
    let nrm = mdot(m, &q0, &q0).sqrt();
    q0.iter_mut().for_each(|x| *x /= nrm);
    basis.col_as_slice_mut(0).copy_from_slice(&q0);

    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut breakdown = false;
    loop {
        if basis.ncols() < target + 1 {
            basis.resize_with(n, target + 1, |_, _| 0.0);
        }
        while !breakdown && alpha.len() < target {
            let j = alpha.len();
            let q = basis.col_as_slice(j);
            let mut w: Vec<f64> = q.iter().zip(m).map(|(a, b)| a * b).collect();
            solve(&mut w);
            let a = mdot(m, q, &w);
            alpha.push(a);
            project_out(basis.as_ref().subcols(0, j + 1), m, &mut w);
            let b = mdot(m, &w, &w).sqrt();
            beta.push(b);
            if b < 1e-14 * a.abs().max(1e-300) {
                breakdown = true;
                break;
            }
            w.iter_mut().for_each(|x| *x /= b);
            basis.col_as_slice_mut(j + 1).copy_from_slice(&w);
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let bk = beta[k - 1];
        let converged = k >= want
            && order.iter().take(want).all(|&i| {
                let theta = eig.eigenvalues[i];
                (bk * eig.eigenvectors[(k - 1, i)]).abs() <= 1e-10 * theta.abs()
            });
        if !(converged || breakdown) {
            if target >= n - 1 {
                return Err(LaplaceError::SolverFailure("Lanczos did not converge".into()));
            }
            target = (target + target / 2).min(n - 1);
            continue;
        }
        if k < want {
            return Err(LaplaceError::InsufficientSpectrum { requested: want, available: k });
        }
        // Ritz pairs
        let vals: Vec<f64> = order.iter().take(want).map(|&i| 1.0 / eig.eigenvalues[i] - shift).collect();
        let y = Mat::from_fn(k, want, |r, c| eig.eigenvectors[(r, order[c])]);
        let mut v = basis.as_ref().subcols(0, k) * &y;
        m_orthonormalize(&mut v, m)?;
        let defect = m_orthonormalize(&mut v, m)?;
        let mut vecs: Vec<Vec<f64>> = (0..want).map(|c| v.col_as_slice(c).to_vec()).collect();
        // fix signs: the constant mode positive, others by first large entry
        for v in &mut vecs {
            let s: f64 = v.iter().zip(m).map(|(a, b)| a * b).sum();
            let pivot = if s.abs() > 1e-6 { s } else { *v.iter().max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap()).unwrap() };
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        return Ok(SpectralData { eigenvalues: vals, eigenfunctions: vecs, orthonormality_defect: defect, krylov_dimension: k });
    }
}

/// Per-vertex `h × h` weights of `ψ_m conj(ψ_n) dA` for the orthonormal
/// basis `ω = ψ dx`.
pub(crate) fn orthonormal_weights(mesh: &SurfaceMesh) -> Vec<DMatrix<Complex64>> {
    let h = mesh.genus();
    let c = &mesh.curve.ortho;
    let cbar = c.map(|z| z.conj());
    mesh.gram_weights
        .iter()
        .map(|w| c.transpose() * DMatrix::from_row_slice(h, h, w) * &cbar)
        .collect()
}

/// `φ` from the truncated eigen-expansion.
#[derive(Debug, Clone, Serialize)]
pub struct PhiEstimate {
    pub value: f64,
    /// Geometric extrapolation of the omitted tail from the last two octaves.
    pub tail_estimate: f64,
    /// Contribution of each `ℓ = 1..=L`.
    pub terms: Vec<f64>,
    /// Largest deviation of `∫ φ_0 ψ_m conj(ψ_n) dA` from `δ_mn`.
    pub constant_mode_defect: f64,
}

/// `φ = Σ_{ℓ>0} (2/λ_ℓ) Σ_{m,n} |∫ φ_ℓ ω_m ∧ conj(ω_n)|²`, the wedge
/// integrals taken in the same `(i/2)`-normalized pairing as the Gram
/// matrix. The tail is checked against `tol` when given.
pub fn kawazumi_zhang_phi(
    mesh: &SurfaceMesh,
    spec: &SpectralData,
    tol: Option<f64>,
) -> Result<PhiEstimate, LaplaceError> {
    let h = mesh.genus();
    let weights = orthonormal_weights(mesh);
    let coeff = |f: &[f64]| -> DMatrix<Complex64> {
        let mut acc = DMatrix::<Complex64>::zeros(h, h);
        for (w, &v) in weights.iter().zip(f) {
            acc += w * Complex64::new(v, 0.0);
        }
        acc
    };
    let c0 = coeff(&spec.eigenfunctions[0]);
    let mut defect = 0.0_f64;
    for a in 0..h {
        for b in 0..h {
            let e = if a == b { 1.0 } else { 0.0 };
            defect = defect.max((c0[(a, b)] - e).norm());
        }
    }
    let l = spec.order();
    let mut terms = Vec::with_capacity(l);
    for ell in 1..=l {
        let c = coeff(&spec.eigenfunctions[ell]);
        // wedge integrals in the (i/2)-normalized pairing, as for the Gram matrix
        let s: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        terms.push(2.0 * s / spec.eigenvalues[ell]);
    }
    let value: f64 = terms.iter().sum();
    let tail_estimate = geometric_tail(&terms);
    if let Some(t) = tol {
        if tail_estimate > t {
            return Err(LaplaceError::SpectralTail { tail: tail_estimate, tol: t });
        }
    }
    Ok(PhiEstimate { value, tail_estimate, terms, constant_mode_defect: defect })
}

fn geometric_tail(terms: &[f64]) -> f64 {
    let l = terms.len();
    if l < 4 {
        return f64::INFINITY;
    }
    let last: f64 = terms[l / 2..].iter().sum();
    let prev: f64 = terms[l / 4..l / 2].iter().sum();
    if last <= 0.0 {
        return 0.0;
    }
    let q = last / prev.max(1e-300);
    if q >= 1.0 {
        f64::INFINITY
    } else {
        last * q / (1.0 - q)
    }
}

/// `φ` without truncation: the same quadratic form evaluated with one
/// Poisson solve per coefficient function.
pub fn phi_direct(mesh: &SurfaceMesh, op: &LaplaceOperator) -> Result<f64, LaplaceError> {
    let h = mesh.genus();
    let weights = orthonormal_weights(mesh);
    let mut total = 0.0;
    for a in 0..h {
        for b in 0..h {
            for part in 0..2 {
                let mut load: Vec<f64> = weights
                    .iter()
                    .map(|w| if part == 0 { w[(a, b)].re } else { w[(a, b)].im })
                    .collect();
                op.project_load(&mut load);
                let u = op.solve_mean_zero(&load)?;
                let q: f64 = load.iter().zip(&u).map(|(x, y)| x * y).sum();
                total += 2.0 * q;
            }
        }
    }
    Ok(total)
}
