//! Periods of the naive differentials `ν_m = x^{m-1} dx / y` on
//! `y² = ∏(x - α_r)`, their Gram matrix and an orthonormal basis.
//!
//! All branch points are first moved to finite position by a Möbius map and
//! rescaled into the unit disk ("working coordinates"). The homology basis is
//! built from a chain of segments joining consecutive branch points (ordered
//! along a projection direction, so no two segments cross). Each segment
//! lifts to a closed cycle; adjacent cycles meet once at their shared branch
//! point and the sign of that intersection is read off in the local
//! coordinate `t = √(x - α)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::branch::{BranchError, BranchSet, MobiusMap, SpherePoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodError {
    #[error("period quadrature did not reach tolerance (last relative change {0:e})")]
    QuadratureFailure(f64),
    #[error("branch points {0} and {1} are too close for quadrature")]
    NearDegenerate(usize, usize),
    #[error("Gram matrix is not positive definite (homology orientation error)")]
    NotPositiveDefinite,
    #[error("point is a branch point")]
    AtBranchPoint,
    #[error("sheet must be 0 or 1")]
    BadSheet,
    #[error("could not build a symplectic basis from the cycle chain")]
    SymplecticFailure,
    #[error(transparent)]
    Branch(#[from] BranchError),
}

const PERIOD_RTOL: f64 = 1e-11;
const MAX_NODES: usize = 1 << 17;
/// Working coordinates place every branch point within this radius.
pub const WORKING_RADIUS: f64 = 0.6;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Periods, Gram matrix and orthonormalizing coefficients of a curve.
#[derive(Debug, Clone)]
pub struct CurveData {
    pub branch: BranchSet,
    /// Map from the input coordinate to working coordinates.
    pub normalization: MobiusMap,
    /// Branch points in working coordinates, index-aligned with `branch`.
    pub roots: Vec<Complex64>,
    /// Branch indices in chain order.
    pub chain: Vec<usize>,
    /// Pairs `(chain[2k], chain[2k+1])`: the cuts encircled by the a-cycles.
    pub cut_pairing: Vec<(usize, usize)>,
    /// `h × 2h` periods of `ν_m` over the chain cycles `c_k`.
    pub chain_periods: DMatrix<Complex64>,
    /// `2h × 2h` intersection matrix of the chain cycles.
    pub intersection: DMatrix<i64>,
    /// Rows are a-cycles then b-cycles in chain-cycle coordinates.
    pub symplectic: DMatrix<i64>,
    /// `A_{mk} = ∫_{a_k} ν_m`.
    pub a_periods: DMatrix<Complex64>,
    /// `B_{mk} = ∫_{b_k} ν_m`.
    pub b_periods: DMatrix<Complex64>,
    /// `G_{mn} = (i/2) ∫ ν_m ∧ conj(ν_n)`.
    pub gram: DMatrix<Complex64>,
    /// Columns of `C` give the orthonormal basis `ω = ν C`.
    pub ortho: DMatrix<Complex64>,
    /// Largest relative change of a period under the last node doubling.
    pub period_error: f64,
    pub quadrature_nodes: usize,
}

impl CurveData {
    pub fn genus(&self) -> usize {
        self.branch.genus()
    }

    /// Riemann matrix `A⁻¹ B`.
    pub fn riemann_matrix(&self) -> DMatrix<Complex64> {
        self.a_periods
            .clone()
            .lu()
            .solve(&self.b_periods)
            .expect("a-periods are invertible")
    }

    /// Copy with `C` replaced by `C U` (another orthonormal basis when `U` is unitary).
    pub fn with_rotated_basis(&self, u: &DMatrix<Complex64>) -> CurveData {
        let mut out = self.clone();
        out.ortho = &self.ortho * u;
        out
    }

    /// Values of the naive coefficient polynomials `x^{m-1}` at `x`.
    pub fn naive_numerators(&self, x: Complex64) -> Vec<Complex64> {
        let h = self.genus();
        let mut out = Vec::with_capacity(h);
        let mut p = c(1.0, 0.0);
        for _ in 0..h {
            out.push(p);
            p *= x;
        }
        out
    }

    /// `|y(x)|²` in working coordinates.
    pub fn abs_y_sqr(&self, x: Complex64) -> f64 {
        self.roots.iter().map(|&a| (x - a).norm()).product()
    }

    /// `(1/h) Σ_k |Σ_m C_{mk} x^{m-1}|²`, the numerator of the density.
    pub fn density_numerator(&self, x: Complex64) -> f64 {
        density_numerator(&self.ortho, &self.naive_numerators(x))
    }

    /// As [`Self::density_numerator`] but in the coordinate `w = 1/x` using
    /// the polynomials `w^{h-m}`.
    pub fn density_numerator_at_infinity(&self, w: Complex64) -> f64 {
        let mut v = self.naive_numerators(w);
        v.reverse();
        density_numerator(&self.ortho, &v)
    }
}

fn density_numerator(ortho: &DMatrix<Complex64>, nu: &[Complex64]) -> f64 {
    let h = nu.len();
    let mut acc = 0.0;
    for k in 0..h {
        let mut s = c(0.0, 0.0);
        for m in 0..h {
            s += ortho[(m, k)] * nu[m];
        }
        acc += s.norm_sqr();
    }
    acc / h as f64
}

/// Möbius map taking `bs` to finite points inside the disk of radius
/// [`WORKING_RADIUS`] centred at the origin.
pub fn working_normalization(bs: &BranchSet) -> Result<MobiusMap, BranchError> {
    let mut map = MobiusMap::identity();
    if bs.infinity_index().is_some() {
        let fin: Vec<Complex64> = bs.points().iter().filter_map(|p| p.as_finite()).collect();
        let centre = fin.iter().sum::<Complex64>() / fin.len() as f64;
        let spread = fin
            .iter()
            .map(|z| (z - centre).norm())
            .fold(0.0_f64, f64::max)
            .max(1e-300);
        // pole of the inversion: the grid point farthest from every branch point
        let mut best = (f64::NEG_INFINITY, centre);
        for a in -10i32..=10 {
            for b in -10i32..=10 {
                let p = centre + c(a as f64, b as f64) * (0.15 * spread);
                let d = fin.iter().map(|z| (z - p).norm()).fold(f64::INFINITY, f64::min);
                if d > best.0 {
                    best = (d, p);
                }
            }
        }
        map = MobiusMap::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), -best.1)?;
    }
    let moved: Vec<Complex64> = bs
        .points()
        .iter()
        .map(|&p| map.apply(p).as_finite().expect("finite after inversion"))
        .collect();
    let centre = moved.iter().sum::<Complex64>() / moved.len() as f64;
    let spread = moved
        .iter()
        .map(|z| (z - centre).norm())
        .fold(0.0_f64, f64::max);
    let s = WORKING_RADIUS / spread;
    let affine = MobiusMap::new(c(s, 0.0), -centre * s, c(0.0, 0.0), c(1.0, 0.0))?;
    Ok(affine.compose(&map))
}

/// Order of the branch points along the projection direction that best
/// separates them.
fn chain_order(roots: &[Complex64]) -> Vec<usize> {
    let mut best: (f64, Vec<usize>) = (f64::NEG_INFINITY, Vec::new());
    for step in 0..24 {
        let dir = Complex64::from_polar(1.0, PI * step as f64 / 24.0 + 0.013);
        let mut idx: Vec<usize> = (0..roots.len()).collect();
        let proj = |k: usize| (roots[k] * dir.conj()).re;
        idx.sort_by(|&a, &b| proj(a).partial_cmp(&proj(b)).unwrap());
        // score: smallest ratio of projection gap to segment length
        let mut score = f64::INFINITY;
        for w in idx.windows(2) {
            let gap = proj(w[1]) - proj(w[0]);
            score = score.min(gap / (roots[w[1]] - roots[w[0]]).norm());
        }
        if score > best.0 {
            best = (score, idx);
        }
    }
    best.1
}

/// A segment `[p_a, p_b]` of the chain with the continuous branch
/// `H(x) = ∏_{r ∉ {a,b}} √(x - α_r)` along it.
struct Segment {
    a: usize,
    b: usize,
    mid: Complex64,
    half: Complex64,
    others: Vec<(Complex64, Complex64)>,
}

impl Segment {
    fn new(roots: &[Complex64], a: usize, b: usize) -> Self {
        let mid = (roots[a] + roots[b]) * 0.5;
        let half = (roots[b] - roots[a]) * 0.5;
        let others = (0..roots.len())
            .filter(|&r| r != a && r != b)
            .map(|r| {
                let cr = mid - roots[r];
                (roots[r], cr)
            })
            .collect();
        Segment {
            a,
            b,
            mid,
            half,
            others,
        }
    }

    fn point(&self, s: f64) -> Complex64 {
        self.mid + self.half * s
    }

    fn h(&self, x: Complex64) -> Complex64 {
        self.others
            .iter()
            .map(|&(al, cr)| cr.sqrt() * ((x - al) / cr).sqrt())
            .product()
    }

    /// `∫_{p_a}^{p_b} x^{m-1} dx / y` on the sheet `y = i·d·√(1-s²)·H(x)`,
    /// by Gauss–Chebyshev with `n` nodes.
    fn integrals(&self, genus: usize, n: usize) -> Vec<Complex64> {
        let mut acc = vec![c(0.0, 0.0); genus];
        for j in 0..n {
            let s = (PI * (2 * j + 1) as f64 / (2 * n) as f64).cos();
            let x = self.point(s);
            let base = self.h(x).inv();
            let mut p = c(1.0, 0.0);
            for slot in acc.iter_mut() {
                *slot += p * base;
                p *= x;
            }
        }
        let f = c(0.0, -PI / n as f64);
        acc.into_iter().map(|v| v * f).collect()
    }
}

pub fn compute_periods(bs: &BranchSet) -> Result<CurveData, PeriodError> {
    let normalization = working_normalization(bs)?;
    compute_periods_with(bs, normalization)
}

/// As [`compute_periods`] with a caller-chosen map to finite working coordinates.
pub fn compute_periods_with(bs: &BranchSet, normalization: MobiusMap) -> Result<CurveData, PeriodError> {
    let h = bs.genus();
    let roots: Vec<Complex64> = bs
        .points()
        .iter()
        .map(|&p| match normalization.apply(p) {
            SpherePoint::Finite(z) => Ok(z),
            SpherePoint::Infinity => Err(PeriodError::Branch(BranchError::DegenerateMap)),
        })
        .collect::<Result<_, _>>()?;
    let scale = roots.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(1e-300);
    for r in 0..roots.len() {
        for s in r + 1..roots.len() {
            if (roots[r] - roots[s]).norm() < 1e-10 * scale {
                return Err(PeriodError::NearDegenerate(r, s));
            }
        }
    }
    let chain = chain_order(&roots);
    let segments: Vec<Segment> = chain
        .windows(2)
        .take(2 * h)
        .map(|w| Segment::new(&roots, w[0], w[1]))
        .collect();

    let mut n = 32usize;
    let mut prev: Option<Vec<Vec<Complex64>>> = None;
    let mut last_change = f64::INFINITY;
    let values = loop {
        let cur: Vec<Vec<Complex64>> = segments.iter().map(|sg| sg.integrals(h, n)).collect();
        if let Some(p) = &prev {
            let mut worst = 0.0_f64;
            for (sa, sb) in cur.iter().zip(p) {
                let size = sa.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
                for (x, y) in sa.iter().zip(sb) {
                    worst = worst.max((x - y).norm() / size);
                }
            }
            last_change = worst;
            if worst < PERIOD_RTOL {
                break cur;
            }
        }
        if n >= MAX_NODES {
            return Err(PeriodError::QuadratureFailure(last_change));
        }
        prev = Some(cur);
        n *= 2;
    };

    let mut chain_periods = DMatrix::<Complex64>::zeros(h, 2 * h);
    for (k, col) in values.iter().enumerate() {
        for m in 0..h {
            chain_periods[(m, k)] = col[m] * 2.0;
        }
    }

    // intersections of consecutive chain cycles at their shared branch point
    let mut intersection = DMatrix::<i64>::zeros(2 * h, 2 * h);
    for k in 0..2 * h - 1 {
        let s0 = &segments[k];
        let s1 = &segments[k + 1];
        debug_assert_eq!(s0.b, s1.a);
        let p = roots[s0.b];
        let w = (s0.half * s0.h(p)).conj() * (s1.half * s1.h(p));
        let eps = if w.im < 0.0 { 1 } else { -1 };
        intersection[(k, k + 1)] = eps;
        intersection[(k + 1, k)] = -eps;
    }

    let symplectic = symplectic_basis(&intersection).ok_or(PeriodError::SymplecticFailure)?;
    let sym_c = symplectic.map(|v| c(v as f64, 0.0));
    let rows = &chain_periods * sym_c.transpose();
    let a_periods = rows.columns(0, h).into_owned();
    let b_periods = rows.columns(h, h).into_owned();

    let cut_pairing = (0..h + 1).map(|k| (chain[2 * k], chain[2 * k + 1])).collect();
    let mut cd = CurveData {
        branch: bs.clone(),
        normalization,
        roots,
        chain,
        cut_pairing,
        chain_periods,
        intersection,
        symplectic,
        a_periods,
        b_periods,
        gram: DMatrix::zeros(h, h),
        ortho: DMatrix::zeros(h, h),
        period_error: last_change,
        quadrature_nodes: n,
    };
    cd.gram = gram_matrix(&cd)?;
    cd.ortho = orthonormalize(&cd.gram)?;
    Ok(cd)
}

/// Splits a unimodular antisymmetric form into hyperbolic pairs over Z.
/// Returns the a-vectors then the b-vectors as rows.
fn symplectic_basis(j: &DMatrix<i64>) -> Option<DMatrix<i64>> {
    let dim = j.nrows();
    let form = |u: &DVector<i64>, v: &DVector<i64>| (u.transpose() * j * v)[(0, 0)];
    let mut pool: Vec<DVector<i64>> = (0..dim)
        .map(|k| {
            let mut e = DVector::zeros(dim);
            e[k] = 1;
            e
        })
        .collect();
    let mut avecs = Vec::new();
    let mut bvecs = Vec::new();
    while !pool.is_empty() {
        let x = pool.remove(0);
        let pos = pool.iter().position(|y| form(&x, y).abs() == 1)?;
        let mut y = pool.remove(pos);
        if form(&x, &y) == -1 {
            y = -y;
        }
        for z in pool.iter_mut() {
            let zb = form(z, &y);
            let za = form(z, &x);
            *z = &*z - &x * zb + &y * za;
        }
        avecs.push(x);
        bvecs.push(y);
    }
    let h = avecs.len();
    let mut out = DMatrix::zeros(2 * h, dim);
    for (k, v) in avecs.iter().chain(bvecs.iter()).enumerate() {
        out.set_row(k, &v.transpose());
    }
    Some(out)
}

/// Gram matrix from periods alone: for closed forms with periods `P` over a
/// basis with intersection matrix `J`, `∫ θ∧η = P(θ)ᵀ J⁻ᵀ P(η)`.
pub fn gram_matrix(cd: &CurveData) -> Result<DMatrix<Complex64>, PeriodError> {
    let j = cd.intersection.map(|v| v as f64);
    let jinv_t = j
        .try_inverse()
        .ok_or(PeriodError::SymplecticFailure)?
        .transpose()
        .map(|v| c(v, 0.0));
    let p = &cd.chain_periods;
    let g = (p * jinv_t * p.adjoint()) * c(0.0, 0.5);
    let g = (&g + g.adjoint()) * c(0.5, 0.0);
    let herm = DMatrix::from_fn(g.nrows(), g.ncols(), |r, s| g[(r, s)]);
    let eig = hermitian_eigenvalues(&herm);
    if eig.iter().any(|&l| l <= 0.0) {
        return Err(PeriodError::NotPositiveDefinite);
    }
    Ok(herm)
}

/// Eigenvalues of a small Hermitian matrix via its real symmetric embedding.
pub fn hermitian_eigenvalues(g: &DMatrix<Complex64>) -> Vec<f64> {
    let n = g.nrows();
    let mut r = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let z = g[(a, b)];
            r[(a, b)] = z.re;
            r[(a + n, b + n)] = z.re;
            r[(a, b + n)] = -z.im;
            r[(a + n, b)] = z.im;
        }
    }
    let mut ev: Vec<f64> = r.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev.into_iter().step_by(2).collect()
}

/// `C = L^{-T}` for `G = L L*`, so that `Cᵀ G C̄ = I` and `ω = ν C` is orthonormal.
pub fn orthonormalize(gram: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, PeriodError> {
    let chol = gram.clone().cholesky().ok_or(PeriodError::NotPositiveDefinite)?;
    let l = chol.l();
    let linv = l.try_inverse().ok_or(PeriodError::NotPositiveDefinite)?;
    Ok(linv.transpose())
}

/// Density of `μ` against planar Lebesgue measure in the working `x`-chart,
/// `ρ = (1/h) Σ_k |ψ_k(x)|²` with `ω_k = ψ_k dx`. The two sheets carry the
/// same density, so the integral over one sheet is `½`.
pub fn canonical_density(cd: &CurveData, x: Complex64, sheet: u8) -> Result<f64, PeriodError> {
    if sheet > 1 {
        return Err(PeriodError::BadSheet);
    }
    let y2 = cd.abs_y_sqr(x);
    if y2 == 0.0 {
        return Err(PeriodError::AtBranchPoint);
    }
    Ok(cd.density_numerator(x) / y2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> BranchSet {
        BranchSet::new(
            vec![
                SpherePoint::finite(0.0, 0.0),
                SpherePoint::finite(1.0, 0.0),
                SpherePoint::finite(0.5, 0.0),
                SpherePoint::Infinity,
            ],
            1,
        )
        .unwrap()
    }

    pub(crate) fn quintic() -> BranchSet {
        let mut pts: Vec<SpherePoint> = (0..5)
            .map(|k| SpherePoint::Finite(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 5.0)))
            .collect();
        pts.push(SpherePoint::Infinity);
        BranchSet::new(pts, 2).unwrap()
    }

    #[test]
    fn genus_one_square_lattice() {
        let cd = compute_periods(&square()).unwrap();
        let tau = crate::elliptic::reduce_modulus(cd.riemann_matrix()[(0, 0)]);
        assert!((tau - c(0.0, 1.0)).norm() < 1e-8, "{tau}");
        // G = |A|² Im τ in genus one
        let t = cd.riemann_matrix()[(0, 0)];
        let g = cd.a_periods[(0, 0)].norm_sqr() * t.im;
        assert!((cd.gram[(0, 0)].re - g).abs() < 1e-8 * g);
        assert!((cd.ortho[(0, 0)].norm_sqr() * cd.gram[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quintic_riemann_matrix() {
        let cd = compute_periods(&quintic()).unwrap();
        let t = cd.riemann_matrix();
        assert!((&t - t.transpose()).norm() < 1e-8);
        let im = t.map(|z| z.im);
        assert!(im.symmetric_eigen().eigenvalues.iter().all(|&l| l > 0.0));
        let orth = cd.ortho.transpose() * &cd.gram * cd.ortho.map(|z| z.conj());
        assert!((orth - DMatrix::<Complex64>::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn density_errors() {
        let cd = compute_periods(&square()).unwrap();
        assert_eq!(canonical_density(&cd, cd.roots[0], 0), Err(PeriodError::AtBranchPoint));
        assert_eq!(canonical_density(&cd, c(0.1, 0.1), 2), Err(PeriodError::BadSheet));
        let a = canonical_density(&cd, c(0.1, 0.2), 0).unwrap();
        assert_eq!(a, canonical_density(&cd, c(0.1, 0.2), 1).unwrap());
        assert!(a > 0.0);
    }
}
