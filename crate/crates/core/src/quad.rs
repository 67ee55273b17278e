//! Quadrature rules shared by the mesh and solver code.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    x.iter().zip(&w).map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
}

/// Degree-5 seven-point rule on a triangle: barycentric coordinates and
/// weights summing to one.
pub const DUNAVANT7: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_770;
    const B1: f64 = 0.470_142_064_105_115;
    const A2: f64 = 0.797_426_985_353_087;
    const B2: f64 = 0.101_286_507_323_456;
    const W1: f64 = 0.132_394_152_788_506;
    const W2: f64 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Collapsed (Duffy) rule on a triangle with a singular first vertex:
/// barycentric coordinates and weights (summing to one) that integrate
/// `1/r` and `log r` singularities at that vertex accurately. The radial
/// variable is stretched as `u = s³` to flatten logarithms.
pub fn duffy_rule(n: usize) -> Vec<([f64; 3], f64)> {
    let g = gauss_legendre_unit(n);
    let mut out = Vec::with_capacity(n * n);
    for &(s, ws) in &g {
        let u = s * s * s;
        let du = 3.0 * s * s;
        for &(v, wv) in &g {
            // area element of the unit-area reference triangle is 2u du dv
            out.push(([1.0 - u, u * (1.0 - v), u * v], 2.0 * u * du * ws * wv));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dunavant_integrates_quintics() {
        let total: f64 = DUNAVANT7.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
        // ∫ λ₀⁵ over the unit-area simplex = 2·5!/7! = 1/21
        let v: f64 = DUNAVANT7.iter().map(|(b, w)| w * b[0].powi(5)).sum();
        assert!((v - 1.0 / 21.0).abs() < 1e-12);
    }

    #[test]
    fn duffy_handles_inverse_distance() {
        // triangle (0,0),(1,0),(0,1): ∫ 1/r dA = ∫_0^{π/2} dθ/(cosθ+sinθ) = √2·atanh(1/√2)
        let exact = 2f64.sqrt() * (1.0 / 2f64.sqrt()).atanh();
        let rule = duffy_rule(16);
        let area = 0.5;
        let v: f64 = rule
            .iter()
            .map(|(b, w)| {
                let (x, y) = (b[1], b[2]);
                w * area / (x * x + y * y).sqrt()
            })
            .sum();
        assert!((v - exact).abs() < 1e-10, "{v} {exact}");
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
