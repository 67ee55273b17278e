use std::f64::consts::PI;

use super::*;
use crate::branch::BranchSet;
use crate::periods::compute_periods;

fn genus_one() -> CurveData {
    let bs = BranchSet::new(
        vec![
            SpherePoint::finite(0.0, 0.0),
            SpherePoint::finite(1.0, 0.0),
            SpherePoint::finite(0.3, 0.8),
            SpherePoint::Infinity,
        ],
        1,
    )
    .unwrap();
    compute_periods(&bs).unwrap()
}

fn quintic() -> CurveData {
    let mut pts: Vec<SpherePoint> = (0..5)
        .map(|k| SpherePoint::Finite(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 5.0)))
        .collect();
    pts.push(SpherePoint::Infinity);
    compute_periods(&BranchSet::new(pts, 2).unwrap()).unwrap()
}

fn check(cd: &CurveData, chi: i64) {
    let mesh = build_mesh(cd, 24).unwrap();
    assert_eq!(mesh.euler_characteristic(), chi);
    assert!((mesh.raw_mass - 1.0).abs() < 1e-6, "mass {}", mesh.raw_mass);
    let h = cd.genus();
    let mut g = vec![c(0.0, 0.0); h * h];
    for w in &mesh.gram_weights {
        for (a, b) in g.iter_mut().zip(w) {
            *a += b;
        }
    }
    for a in 0..h {
        for b in 0..h {
            let exact = cd.gram[(a, b)];
            let scale = (cd.gram[(a, a)].re * cd.gram[(b, b)].re).sqrt();
            assert!((g[a * h + b] - exact).norm() < 1e-6 * scale, "{a}{b}: {} vs {exact}", g[a * h + b]);
        }
    }
    for v in 0..mesh.num_vertices() {
        let u = mesh.involution(v);
        assert_eq!(mesh.involution(u), v);
        assert!((mesh.mu_weights[v] - mesh.mu_weights[u]).abs() < 1e-15);
    }
    let one: f64 = mesh.integrate(|_| 1.0, &[]).unwrap();
    assert!((one - 1.0).abs() < 1e-12);
}

#[test]
fn genus_one_mesh() {
    check(&genus_one(), 0);
}

#[test]
fn genus_two_mesh() {
    check(&quintic(), -2);
}

#[test]
fn low_resolution_rejected() {
    assert_eq!(build_mesh(&genus_one(), 4).unwrap_err(), MeshError::ResolutionTooLow(4));
}

#[test]
fn singular_integral_at_branch_points() {
    let cd = genus_one();
    let (a0, a1) = (cd.roots[0], cd.roots[1]);
    let f = |p: &SurfacePoint| match p.x {
        SpherePoint::Finite(x) => ((x - a0) / (x - a1)).norm().ln(),
        SpherePoint::Infinity => 0.0,
    };
    let m1 = build_mesh(&cd, 24).unwrap();
    assert_eq!(m1.integrate(f, &[]).unwrap_err(), MeshError::SingularValue(m1.marked[0]));
    let v1: f64 = m1.integrate(f, &[m1.marked[0], m1.marked[1]]).unwrap();
    let m2 = build_mesh(&cd, 48).unwrap();
    let v2: f64 = m2.integrate(f, &[m2.marked[0], m2.marked[1]]).unwrap();
    assert!((v1 - v2).abs() < 2e-3, "{v1} {v2}");
}
