//! Genus one in closed form: the first Jacobi theta function, periods of a
//! four-point branch set by the arithmetic–geometric mean, and the canonical
//! Green's function of a flat torus `C/(Z + τZ)`.
//!
//! The additive constant of the torus Green's function is obtained by
//! quadrature of the mean-zero condition, not from the Dedekind eta
//! function; [`log_abs_eta`] is kept only as an independent check.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::branch::{BranchError, BranchSet, MobiusMap, SpherePoint};
use crate::quad::gauss_legendre;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("modulus must have positive imaginary part, got {0}")]
    BadModulus(Complex64),
    #[error("the Green's function is singular at the lattice origin")]
    OriginSingularity,
    #[error("branch set does not define a genus-one curve")]
    NotGenusOne,
    #[error("mean-zero quadrature did not converge (last change {0:e})")]
    QuadratureFailure(f64),
    #[error(transparent)]
    Branch(#[from] BranchError),
}

const THETA_EPS: f64 = 1e-17;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `θ₁(z | τ) = 2 Σ (-1)ⁿ q^{(n+½)²} sin((2n+1)πz)`, `q = e^{iπτ}`.
pub fn theta1(z: Complex64, tau: Complex64) -> Result<Complex64, EllipticError> {
    if tau.im <= 0.0 {
        return Err(EllipticError::BadModulus(tau));
    }
    Ok(theta1_derivs(z, tau).0)
}

/// θ₁ and its first two z-derivatives by termwise differentiation.
fn theta1_derivs(z: Complex64, tau: Complex64) -> (Complex64, Complex64, Complex64) {
    let ipt = c(0.0, PI) * tau;
    let mut s0 = c(0.0, 0.0);
    let mut s1 = c(0.0, 0.0);
    let mut s2 = c(0.0, 0.0);
    let mut n = 0usize;
    loop {
        let k = (2 * n + 1) as f64;
        let e = n as f64 + 0.5;
        let qpow = (ipt * (e * e)).exp();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let arg = z * (k * PI);
        let t0 = qpow * arg.sin() * sign;
        let t1 = qpow * arg.cos() * (sign * k * PI);
        let t2 = -t0 * (k * PI) * (k * PI);
        s0 += t0;
        s1 += t1;
        s2 += t2;
        let bound = qpow.norm() * (k * PI * z.im.abs()).exp() * (1.0 + k * PI).powi(2);
        let scale = s0.norm() + s1.norm() + s2.norm();
        if n >= 1 && bound < THETA_EPS * scale {
            break;
        }
        n += 1;
        if n > 400 {
            break;
        }
    }
    (s0 * 2.0, s1 * 2.0, s2 * 2.0)
}

/// Theta constants `(θ₂, θ₃, θ₄)` at `z = 0`.
pub fn theta_constants(tau: Complex64) -> Result<(Complex64, Complex64, Complex64), EllipticError> {
    if tau.im <= 0.0 {
        return Err(EllipticError::BadModulus(tau));
    }
    let ipt = c(0.0, PI) * tau;
    let mut t2 = c(0.0, 0.0);
    let mut t3 = c(1.0, 0.0);
    let mut t4 = c(1.0, 0.0);
    for n in 0..400usize {
        let e = n as f64 + 0.5;
        let a = (ipt * (e * e)).exp() * 2.0;
        t2 += a;
        let m = (n + 1) as f64;
        let b = (ipt * (m * m)).exp() * 2.0;
        t3 += b;
        t4 += if n % 2 == 0 { -b } else { b };
        if a.norm() < 1e-18 && b.norm() < 1e-18 {
            break;
        }
    }
    Ok((t2, t3, t4))
}

/// `log|η(τ)|` from the product `q^{1/12} ∏(1 - q^{2n})`.
pub fn log_abs_eta(tau: Complex64) -> f64 {
    let mut acc = -PI * tau.im / 12.0;
    for n in 1..2000 {
        let qn = (c(0.0, 2.0 * PI * n as f64) * tau).exp();
        acc += (c(1.0, 0.0) - qn).norm().ln();
        if qn.norm() < 1e-18 {
            break;
        }
    }
    acc
}

/// Arithmetic–geometric mean with the branch of the square root closest
/// to the previous arithmetic mean.
pub fn agm(a0: Complex64, b0: Complex64) -> Complex64 {
    let (mut a, mut b) = (a0, b0);
    for _ in 0..100 {
        let an = (a + b) * 0.5;
        let mut bn = (a * b).sqrt();
        if (an - bn).norm() > (an + bn).norm() {
            bn = -bn;
        }
        let done = (an - a).norm() <= 1e-15 * an.norm();
        a = an;
        b = bn;
        if done {
            break;
        }
    }
    a
}

/// Moves `τ` into the standard fundamental domain of `SL₂(Z)`.
pub fn reduce_modulus(tau: Complex64) -> Complex64 {
    let mut t = tau;
    for _ in 0..200 {
        t.re -= t.re.round();
        if t.norm_sqr() < 1.0 - 1e-14 {
            t = -t.inv();
        } else {
            break;
        }
    }
    t
}

/// A flat torus `C/(Z + τZ)` with the canonical (unit-mass flat) metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    tau: Complex64,
    mean_constant: f64,
}

/// A point of a torus, stored with `0 ≤ Re z < 1`, `0 ≤ Im z < Im τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    z: Complex64,
}

impl TorusPoint {
    pub fn new(z: Complex64, torus: &Torus) -> Self {
        let t = torus.tau;
        let k = (z.im / t.im).floor();
        let mut w = z - t * k;
        w.re -= w.re.floor();
        if w.im >= t.im {
            w -= t;
        }
        if w.im < 0.0 {
            w.im = 0.0;
        }
        TorusPoint { z: w }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }
}

impl Torus {
    pub fn new(tau: Complex64) -> Result<Self, EllipticError> {
        if tau.im <= 0.0 || !tau.im.is_finite() {
            return Err(EllipticError::BadModulus(tau));
        }
        let mean = mean_of_log_theta(tau)?;
        Ok(Torus {
            tau,
            mean_constant: -mean,
        })
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// The constant `C(τ)` making `∫ g μ = 0`.
    pub fn mean_constant(&self) -> f64 {
        self.mean_constant
    }

    /// Representative of `z` with lattice coordinates in `[-½, ½)`.
    pub fn centered(&self, z: Complex64) -> Complex64 {
        let t = self.tau;
        let v = z.im / t.im;
        let kv = v.round();
        let mut w = z - t * kv;
        w.re -= w.re.round();
        w
    }

    /// `log|θ₁(z)| - π Im(z)²/Im τ`, the lattice-periodic part of `g`.
    fn periodic_part(&self, z: Complex64) -> f64 {
        let w = self.centered(z);
        let th = theta1_derivs(w, self.tau).0;
        th.norm().ln() - PI * w.im * w.im / self.tau.im
    }

    /// Canonical Green's function `g_μ(z, 0)`.
    pub fn green(&self, p: TorusPoint) -> Result<f64, EllipticError> {
        self.green_at(p.z)
    }

    pub fn green_at(&self, z: Complex64) -> Result<f64, EllipticError> {
        let w = self.centered(z);
        if w.norm() == 0.0 {
            return Err(EllipticError::OriginSingularity);
        }
        Ok(self.periodic_part(w) + self.mean_constant)
    }

    /// `g_μ(z, w)` by translation invariance.
    pub fn green_pair(&self, z: Complex64, w: Complex64) -> Result<f64, EllipticError> {
        self.green_at(z - w)
    }

    /// `Σ g_μ(x, o)` over the `N² - 1` non-trivial `N`-torsion points.
    pub fn torsion_energy(&self, n: usize) -> Result<f64, EllipticError> {
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                if a == 0 && b == 0 {
                    continue;
                }
                let z = (c(a as f64, 0.0) + self.tau * b as f64) / n as f64;
                acc += self.green_at(z)?;
            }
        }
        Ok(acc)
    }

    /// The three non-trivial half periods `½, τ/2, (1+τ)/2`.
    pub fn half_periods(&self) -> [Complex64; 3] {
        [c(0.5, 0.0), self.tau * 0.5, (self.tau + 1.0) * 0.5]
    }

    /// `℘(ω) + const` at each half period, via `-(log θ₁)''`.
    pub fn weierstrass_values(&self) -> [Complex64; 3] {
        self.half_periods().map(|w| {
            let (t0, t1, t2) = theta1_derivs(w, self.tau);
            -(t2 / t0 - (t1 / t0) * (t1 / t0))
        })
    }
}

fn smooth_step(x: f64) -> f64 {
    // C^∞ transition from 1 at x ≤ 0 to 0 at x ≥ 1
    if x <= 0.0 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let a = f(1.0 - x);
    a / (a + f(x))
}

/// Mean of `log|θ₁| - π y²/Im τ` over the torus.
///
/// The logarithmic singularity is removed by subtracting a smoothly cut-off
/// `log|z|` around every lattice point; what remains is smooth and periodic,
/// so the offset trapezoid rule converges spectrally. The subtracted piece
/// is integrated in polar coordinates.
fn mean_of_log_theta(tau: Complex64) -> Result<f64, EllipticError> {
    let mut min_len = f64::INFINITY;
    for m in -2i32..=2 {
        for k in -2i32..=2 {
            if m == 0 && k == 0 {
                continue;
            }
            min_len = min_len.min((c(m as f64, 0.0) + tau * k as f64).norm());
        }
    }
    let outer = 0.45 * min_len;
    let inner = outer / 3.0;
    let chi = |r: f64| smooth_step((r - inner) / (outer - inner));

    // ∫ χ(r) log r dA over the plane
    let mut cut_integral = 2.0 * PI * inner * inner / 2.0 * (inner.ln() - 0.5);
    let (nodes, weights) = gauss_legendre(64);
    let half = 0.5 * (outer - inner);
    let mid = 0.5 * (outer + inner);
    for (x, w) in nodes.iter().zip(weights.iter()) {
        let r = mid + half * x;
        cut_integral += w * half * 2.0 * PI * r * r.ln() * chi(r);
    }
    let cut_mean = cut_integral / tau.im;

    let torus = Torus {
        tau,
        mean_constant: 0.0,
    };
    let mut prev = f64::NAN;
    let mut n = 16usize;
    let mut last_change = f64::INFINITY;
    while n <= 2048 {
        let mut acc = 0.0;
        for a in 0..n {
            let u = (a as f64 + 0.5) / n as f64;
            for b in 0..n {
                let v = (b as f64 + 0.5) / n as f64;
                let z = c(u, 0.0) + tau * v;
                let mut s = 0.0;
                for m in -1i32..=2 {
                    for k in -1i32..=2 {
                        let r = (z - c(m as f64, 0.0) - tau * k as f64).norm();
                        if r < outer {
                            s += chi(r) * r.ln();
                        }
                    }
                }
                acc += torus.periodic_part(z) - s;
            }
        }
        let mean = acc / (n * n) as f64 + cut_mean;
        if prev.is_finite() {
            last_change = (mean - prev).abs();
            if last_change < 1e-12 {
                return Ok(mean);
            }
        }
        prev = mean;
        n *= 2;
    }
    if last_change < 1e-9 {
        Ok(prev)
    } else {
        Err(EllipticError::QuadratureFailure(last_change))
    }
}

/// The six anharmonic images of `λ`.
fn anharmonic(l: Complex64) -> [Complex64; 6] {
    let one = c(1.0, 0.0);
    [l, one - l, one / l, one / (one - l), l / (l - one), (l - one) / l]
}

/// Modulus of the torus covering a four-point branch set.
#[derive(Debug, Clone)]
pub struct EllipticModel {
    pub torus: Torus,
    /// Legendre parameter `(α₃-α₁)/(α₂-α₁)` of the finite triple.
    pub lambda: Complex64,
    /// Branch index lying over the lattice origin (the point `o`).
    pub origin_index: usize,
    /// Branch index → torus point (`0` for `origin_index`, a half period otherwise).
    pub points: [Complex64; 4],
    /// Möbius map applied to put `origin_index` at infinity.
    pub map: MobiusMap,
}

/// Computes `τ` for the double cover branched at `bs` by the AGM, reduced to
/// the standard fundamental domain, and matches branch points to half periods.
pub fn tau_from_branch(bs: &BranchSet) -> Result<EllipticModel, EllipticError> {
    if bs.genus() != 1 {
        return Err(EllipticError::NotGenusOne);
    }
    let (origin_index, map) = match bs.infinity_index() {
        Some(k) => (k, MobiusMap::identity()),
        None => {
            let a = bs.point(3).as_finite().expect("finite");
            (
                3,
                MobiusMap::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), -a)?,
            )
        }
    };
    let moved = bs.apply_mobius(&map);
    let finite: Vec<usize> = (0..4).filter(|&k| k != origin_index).collect();
    let al: Vec<Complex64> = finite
        .iter()
        .map(|&k| moved.point(k).as_finite().ok_or(EllipticError::NotGenusOne))
        .collect::<Result<_, _>>()?;
    let lambda = (al[2] - al[0]) / (al[1] - al[0]);
    if !lambda.is_finite() || lambda.norm() < 1e-14 || (lambda - 1.0).norm() < 1e-14 {
        return Err(EllipticError::NotGenusOne);
    }
    let rep = anharmonic(lambda)
        .into_iter()
        .min_by(|a, b| {
            let fa = a.norm().max((c(1.0, 0.0) - a).norm());
            let fb = b.norm().max((c(1.0, 0.0) - b).norm());
            fa.partial_cmp(&fb).unwrap()
        })
        .unwrap();
    let k = rep.sqrt();
    let kp = (c(1.0, 0.0) - rep).sqrt();
    let tau0 = c(0.0, 1.0) * agm(c(1.0, 0.0), kp) / agm(c(1.0, 0.0), k);
    if tau0.im <= 0.0 || !tau0.is_finite() {
        return Err(EllipticError::NotGenusOne);
    }
    let tau = reduce_modulus(tau0);
    let torus = Torus::new(tau)?;
    let e = torus.weierstrass_values();
    let half = torus.half_periods();
    // The finite triple is affinely equivalent to (℘(ω_σ1), ℘(ω_σ2), ℘(ω_σ3)).
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let best = perms
        .iter()
        .map(|p| {
            let l = (e[p[2]] - e[p[0]]) / (e[p[1]] - e[p[0]]);
            ((l - lambda).norm(), *p)
        })
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();
    if best.0 > 1e-6 * (1.0 + lambda.norm()) {
        return Err(EllipticError::NotGenusOne);
    }
    let mut points = [c(0.0, 0.0); 4];
    for (slot, &k) in finite.iter().enumerate() {
        points[k] = half[best.1[slot]];
    }
    Ok(EllipticModel {
        torus,
        lambda,
        origin_index,
        points,
        map,
    })
}

/// `g_μ(w_i, w_j)` on a genus-one curve computed from the theta oracle and
/// from the closed form.
#[derive(Debug, Clone, Copy)]
pub struct WeierstrassGreen {
    pub theta_value: f64,
    pub closed_form: f64,
    pub residual: f64,
}

/// Closed form `⅓ log 2 + (1/12) log|δ_ij|`; with `∞` present and both
/// indices finite this is the familiar
/// `⅓ log 2 + (1/12) log(|α_i-α_j|² / (|α_i-α_k||α_j-α_k|))`.
pub fn closed_form_weierstrass_green(bs: &BranchSet, i: usize, j: usize) -> Result<f64, EllipticError> {
    if bs.genus() != 1 {
        return Err(EllipticError::NotGenusOne);
    }
    let log_delta = bs.log_abs_delta(i, j)?;
    let ln2 = std::f64::consts::LN_2;
    if let (Some(inf), SpherePoint::Finite(ai), SpherePoint::Finite(aj)) =
        (bs.infinity_index(), bs.point(i), bs.point(j))
    {
        let k = (0..4).find(|&k| k != i && k != j && k != inf).expect("third finite point");
        let ak = bs.point(k).as_finite().expect("finite");
        let ratio = (ai - aj).norm_sqr() / ((ai - ak).norm() * (aj - ak).norm());
        return Ok(ln2 / 3.0 + ratio.ln() / 12.0);
    }
    Ok(ln2 / 3.0 + log_delta / 12.0)
}

pub fn elliptic_weierstrass_green(
    bs: &BranchSet,
    i: usize,
    j: usize,
) -> Result<WeierstrassGreen, EllipticError> {
    let model = tau_from_branch(bs)?;
    elliptic_weierstrass_green_with(&model, bs, i, j)
}

pub fn elliptic_weierstrass_green_with(
    model: &EllipticModel,
    bs: &BranchSet,
    i: usize,
    j: usize,
) -> Result<WeierstrassGreen, EllipticError> {
    let closed_form = closed_form_weierstrass_green(bs, i, j)?;
    let theta_value = model.torus.green_pair(model.points[i], model.points[j])?;
    Ok(WeierstrassGreen {
        theta_value,
        closed_form,
        residual: (theta_value - closed_form).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn theta_is_odd_and_antiperiodic() {
        let tau = c(0.3, 1.1);
        assert_eq!(theta1(c(0.0, 0.0), tau).unwrap(), c(0.0, 0.0));
        let z = c(0.21, 0.17);
        let a = theta1(z, tau).unwrap();
        assert!((theta1(-z, tau).unwrap() + a).norm() < 1e-14);
        assert!((theta1(z + 1.0, tau).unwrap() + a).norm() < 1e-13);
        assert!(theta1(z, c(0.0, -1.0)).is_err());
    }

    #[test]
    fn quadrature_constant_matches_eta() {
        for tau in [c(0.0, 1.0), c(0.31, 0.9), c(-0.45, 1.7)] {
            let t = Torus::new(tau).unwrap();
            assert!((t.mean_constant() + log_abs_eta(tau)).abs() < 1e-10, "{tau}");
        }
    }

    #[test]
    fn green_is_even_and_periodic() {
        let t = Torus::new(c(0.2, 1.3)).unwrap();
        let z = c(0.37, 0.41);
        let g = t.green_at(z).unwrap();
        assert!((t.green_at(-z).unwrap() - g).abs() < 1e-12);
        assert!((t.green_at(z + 1.0).unwrap() - g).abs() < 1e-10);
        assert!((t.green_at(z + t.tau()).unwrap() - g).abs() < 1e-10);
        assert_eq!(t.green_at(c(0.0, 0.0)), Err(EllipticError::OriginSingularity));
        assert_eq!(t.green_at(c(1.0, 0.0)), Err(EllipticError::OriginSingularity));
    }

    #[test]
    fn green_has_unit_log_singularity() {
        let t = Torus::new(c(0.0, 1.0)).unwrap();
        for r in [1e-6, 1e-4, 1e-2] {
            let v = t.green_at(c(r * 0.6, r * 0.8)).unwrap() - r.ln();
            assert!(v.abs() < 10.0);
        }
    }

    #[test]
    fn torsion_points_and_log_n() {
        let t = Torus::new(c(0.0, 1.0)).unwrap();
        assert_eq!(t.torsion_energy(1).unwrap(), 0.0);
        assert!((t.torsion_energy(2).unwrap() - LN_2).abs() < 1e-9);
        assert!((t.torsion_energy(3).unwrap() - 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn torus_point_reduction() {
        let t = Torus::new(c(0.4, 0.9)).unwrap();
        let p = TorusPoint::new(c(3.7, -2.5), &t);
        assert!(p.z().re >= 0.0 && p.z().re < 1.0);
        assert!(p.z().im >= 0.0 && p.z().im < 0.9);
        let g1 = t.green(p).unwrap();
        let g2 = t.green_at(c(3.7, -2.5)).unwrap();
        assert!((g1 - g2).abs() < 1e-10);
    }

    #[test]
    fn square_lattice_from_half() {
        let bs = BranchSet::new(
            vec![
                SpherePoint::finite(0.0, 0.0),
                SpherePoint::finite(1.0, 0.0),
                SpherePoint::finite(0.5, 0.0),
                SpherePoint::Infinity,
            ],
            1,
        )
        .unwrap();
        let m = tau_from_branch(&bs).unwrap();
        assert!((m.torus.tau() - c(0.0, 1.0)).norm() < 1e-10);
        let (t2, t3, _) = theta_constants(c(0.0, 1.0)).unwrap();
        assert!((t2.powi(4) / t3.powi(4) - 0.5).norm() < 1e-12);
    }

    #[test]
    fn agm_elliptic_k() {
        // K(1/√2) = Γ(1/4)² / (4√π)
        let k = PI / (2.0 * agm(c(1.0, 0.0), c(0.5f64.sqrt(), 0.0)).re);
        assert!((k - 1.854_074_677_301_372).abs() < 1e-13);
    }

    #[test]
    fn rejects_higher_genus() {
        let bs = BranchSet::from_finite(&[
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(2.0, 0.0),
            c(3.0, 0.0),
            c(4.0, 0.0),
            c(5.0, 0.0),
        ])
        .unwrap();
        assert!(matches!(tau_from_branch(&bs), Err(EllipticError::NotGenusOne)));
    }

    #[test]
    fn weierstrass_green_agrees_with_closed_form() {
        let bs = BranchSet::new(
            vec![
                SpherePoint::finite(0.1, 0.2),
                SpherePoint::finite(1.3, -0.4),
                SpherePoint::finite(-0.7, 0.9),
                SpherePoint::Infinity,
            ],
            1,
        )
        .unwrap();
        let m = tau_from_branch(&bs).unwrap();
        let mut sum_o = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let w = elliptic_weierstrass_green_with(&m, &bs, i, j).unwrap();
                    assert!(w.residual < 1e-9, "{i} {j} {w:?}");
                    if j == 3 {
                        sum_o += w.theta_value;
                    }
                }
            }
        }
        assert!((sum_o - LN_2).abs() < 1e-9);
    }
}
