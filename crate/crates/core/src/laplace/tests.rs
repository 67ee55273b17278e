use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::branch::{BranchSet, MobiusMap, SpherePoint};
use crate::elliptic::{closed_form_weierstrass_green, tau_from_branch};
use crate::mesh::{build_mesh, Chart, SurfaceMesh};
use crate::periods::compute_periods;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn genus_one() -> BranchSet {
    BranchSet::new(
        vec![SpherePoint::finite(0.0, 0.0), SpherePoint::finite(1.0, 0.0), SpherePoint::finite(0.3, 0.8), SpherePoint::Infinity],
        1,
    )
    .unwrap()
}

/// `y² = x³ - x`, the square torus.
fn square_torus() -> BranchSet {
    BranchSet::new(
        vec![SpherePoint::finite(0.0, 0.0), SpherePoint::finite(1.0, 0.0), SpherePoint::finite(-1.0, 0.0), SpherePoint::Infinity],
        1,
    )
    .unwrap()
}

fn quintic() -> BranchSet {
    let mut pts: Vec<SpherePoint> = (0..5)
        .map(|k| SpherePoint::Finite(Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 5.0)))
        .collect();
    pts.push(SpherePoint::Infinity);
    BranchSet::new(pts, 2).unwrap()
}

fn setup(bs: &BranchSet, r: usize) -> (SurfaceMesh, LaplaceOperator) {
    let mesh = build_mesh(&compute_periods(bs).unwrap(), r).unwrap();
    let op = assemble_laplacian(&mesh).unwrap();
    (mesh, op)
}

#[test]
fn constants_pin_the_convention() {
    assert!((constants::STIFFNESS_SCALE * 2.0 * std::f64::consts::PI - 1.0).abs() < 1e-15);
    let ev = flat_torus_eigenvalues(c(0.0, 1.0), 5);
    for v in &ev[..4] {
        assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }
    assert!(ev[4] > 2.0 * std::f64::consts::PI + 1.0);
}

#[test]
fn stiffness_annihilates_constants() {
    let (_, op) = setup(&quintic(), 16);
    let scale = op.stiffness.iter().map(|t| t.val.abs()).fold(0.0_f64, f64::max);
    let s1 = op.apply(&vec![1.0; op.n]);
    assert!(s1.iter().all(|v| v.abs() < 1e-12 * scale));
    assert!((op.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn square_torus_spectrum() {
    let bs = square_torus();
    let tau = tau_from_branch(&bs).unwrap().torus.tau();
    let (_, op) = setup(&bs, 32);
    let spec = eigenpairs(&op, 12).unwrap();
    assert!(spec.eigenvalues[0].abs() < 1e-10);
    assert!(spec.eigenvalues.iter().all(|&l| l >= -1e-10));
    assert!(spec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    assert!(spec.orthonormality_defect < 1e-8);
    assert!(spec.eigenfunctions[0].iter().all(|v| (v - 1.0).abs() < 1e-8));
    let exact = flat_torus_eigenvalues(tau, 8);
    for l in 1..=4 {
        assert!((spec.eigenvalues[l] / exact[l - 1] - 1.0).abs() < 0.02, "λ_{l} = {}", spec.eigenvalues[l]);
    }
    // the next group sits at twice the first
    assert!(spec.eigenvalues[5] > 1.5 * spec.eigenvalues[4]);
}

#[test]
fn phi_vanishes_in_genus_one() {
    let (mesh, op) = setup(&genus_one(), 24);
    assert!(phi_direct(&mesh, &op).unwrap().abs() < 1e-10);
    let spec = eigenpairs(&op, 40).unwrap();
    let phi = kawazumi_zhang_phi(&mesh, &spec, None).unwrap();
    assert!(phi.value.abs() < 1e-10);
    assert!(phi.constant_mode_defect < 1e-6);
}

#[test]
fn phi_is_independent_of_the_orthonormal_basis() {
    let cd = compute_periods(&quintic()).unwrap();
    let (s, t) = (0.6_f64, 0.8_f64);
    let u = DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, t), c(0.0, t), c(s, 0.0)]) * Complex64::from_polar(1.0, 0.4);
    let mut values = Vec::new();
    for data in [cd.clone(), cd.with_rotated_basis(&u)] {
        let mesh = build_mesh(&data, 20).unwrap();
        let op = assemble_laplacian(&mesh).unwrap();
        values.push(phi_direct(&mesh, &op).unwrap());
    }
    assert!(values[0] > 0.3);
    assert!((values[0] - values[1]).abs() < 1e-10 * values[0]);
}

#[test]
fn green_matrix_of_a_torus() {
    let bs = genus_one();
    let (mesh, op) = setup(&bs, 32);
    let gm = GreenMatrix::compute(&mesh, &op).unwrap();
    assert!(gm.means.iter().all(|m| m.abs() < 1e-7));
    assert!(gm.asymmetry < 3e-3);
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                let exact = closed_form_weierstrass_green(&bs, i, j).unwrap();
                assert!((gm.raw[(i, j)] - exact).abs() < 3e-3);
            }
        }
    }
}

#[test]
fn difference_oracle_identities() {
    let bs = quintic();
    let (mesh, _) = setup(&bs, 24);
    let h = 2.0;
    for (i, j, k) in [(0, 1, 2), (3, 5, 0), (5, 2, 4)] {
        let a = DifferenceOracle::new(&mesh, i, j).unwrap();
        let b = DifferenceOracle::new(&mesh, j, i).unwrap();
        for v in [mesh.marked[k], 17, 400] {
            assert_eq!(a.at_vertex(&mesh, v).unwrap(), -b.at_vertex(&mesh, v).unwrap());
        }
        let eta = bs.eta(i, j, k).unwrap().norm().ln() / (4.0 * h * (2.0 * h + 1.0));
        assert!((a.at_vertex(&mesh, mesh.marked[k]).unwrap() - eta).abs() < 2e-3);
        assert!(matches!(a.at_vertex(&mesh, mesh.marked[i]), Err(LaplaceError::EvaluationAtPole)));
    }
}

#[test]
fn plane_source_inverts_the_laplacian() {
    let (mesh, op) = setup(&genus_one(), 64);
    // a plane vertex well away from the branch disks and the seam
    let v = (0..mesh.num_vertices())
        .filter(|&v| mesh.vertices[v].chart == Chart::Plane)
        .max_by(|&a, &b| {
            let room = |v: usize| {
                let x = mesh.vertices[v].x.as_finite().unwrap();
                mesh.disks.iter().map(|d| (x - d.center).norm() - d.radius).fold(1.0 - x.norm(), f64::min)
            };
            room(a).partial_cmp(&room(b)).unwrap()
        })
        .unwrap();
    let g = green_function(&mesh, &op, &SourceRegion::plane(&mesh, v).unwrap()).unwrap();
    assert!(g.mean.abs() < 1e-7);
    let spec = eigenpairs(&op, 6).unwrap();
    for l in 1..=6 {
        let f = &spec.eigenfunctions[l];
        // f(v) = -∫ g(v, ·) Δf μ + ∫ f μ with Δf = λ f and ∫ f μ = 0
        let integral: f64 = (0..op.n).filter(|&w| w != v).map(|w| g.values[w] * f[w] * op.mass[w]).sum();
        let scale = f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!((f[v] + spec.eigenvalues[l] * integral).abs() < 5e-3 * scale, "ℓ = {l}");
    }
    assert!(SourceRegion::plane(&mesh, mesh.marked[0]).is_err());
}

#[test]
fn eigen_expansion_approaches_the_green_matrix() {
    let (mesh, op) = setup(&genus_one(), 24);
    let gm = GreenMatrix::compute(&mesh, &op).unwrap();
    let spec = eigenpairs(&op, 200).unwrap();
    let w = &mesh.marked;
    let mut errors = Vec::new();
    for l in [50, 100, 200] {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    let sum: f64 = (1..=l).map(|k| spec.eigenfunctions[k][w[i]] * spec.eigenfunctions[k][w[j]] / spec.eigenvalues[k]).sum();
                    // g ~ +log r makes the kernel the negative of the sum
                    worst = worst.max((gm.symmetric[(i, j)] + sum).abs());
                }
            }
        }
        errors.push(worst);
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn theorem_a_spread_and_negative_control() {
    let bs = quintic();
    let (mesh, op) = setup(&bs, 24);
    let gm = GreenMatrix::compute(&mesh, &op).unwrap();
    let psi = weierstrass_energy_psi(&gm);
    let (spread, common) = theorem_a_spread(&gm, &log_delta_matrix(&bs), 2);
    assert!(spread < 1e-2);
    assert!((common - psi / 5.0).abs() < 5e-3);
    let res = theorem_a_residuals(&gm, &log_delta_matrix(&bs), psi, 2);
    assert!(res.iter().all(|r| r.abs() < 5e-3));
    // δ of a different curve leaves a visible spread
    let mut pts = bs.points().to_vec();
    pts[1] = SpherePoint::finite(0.2, 0.5);
    let other = BranchSet::new(pts, 2).unwrap();
    let (bad, _) = theorem_a_spread(&gm, &log_delta_matrix(&other), 2);
    assert!(bad > 5e-2, "{bad}");
}

#[test]
fn psi_is_mobius_invariant() {
    let bs = quintic();
    let m = MobiusMap::new(c(1.0, 0.5), c(-0.3, 0.0), c(0.4, -0.2), c(1.0, 0.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let shuffled = {
        let mut pts = bs.apply_mobius(&m).points().to_vec();
        for a in (1..pts.len()).rev() {
            pts.swap(a, rng.gen_range(0..=a));
        }
        BranchSet::new(pts, 2).unwrap()
    };
    let psi: Vec<f64> = [bs, shuffled]
        .iter()
        .map(|b| {
            let (mesh, op) = setup(b, 24);
            weierstrass_energy_psi(&GreenMatrix::compute(&mesh, &op).unwrap())
        })
        .collect();
    assert!((psi[0] - psi[1]).abs() < 5e-3, "{psi:?}");
}
