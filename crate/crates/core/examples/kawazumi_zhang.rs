//! φ from the eigen-expansion and from direct solves, and the identity
//! ψ = φ/(2h) + log 2 on y² = x⁵ - 1.

use canonical_green::branch::{BranchSet, SpherePoint};
use canonical_green::laplace::{
    assemble_laplacian, eigenpairs, kawazumi_zhang_phi, phi_direct, theorem_b_residual, weierstrass_energy_psi, GreenMatrix,
};
use canonical_green::mesh::build_mesh;
use canonical_green::periods::compute_periods;
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() {
    let mut pts: Vec<SpherePoint> = (0..5).map(|k| SpherePoint::Finite(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 5.0))).collect();
    pts.push(SpherePoint::Infinity);
    let bs = BranchSet::new(pts, 2).unwrap();
    let cd = compute_periods(&bs).unwrap();
    let mesh = build_mesh(&cd, 48).unwrap();
    let op = assemble_laplacian(&mesh).unwrap();
    let psi = weierstrass_energy_psi(&GreenMatrix::compute(&mesh, &op).unwrap());
    let direct = phi_direct(&mesh, &op).unwrap();
    let spec = eigenpairs(&op, 200).unwrap();
    let est = kawazumi_zhang_phi(&mesh, &spec, None).unwrap();
    for l in [25, 50, 100, 200] {
        let partial: f64 = est.terms[..l].iter().sum();
        println!("L {l:3}: phi {partial:.8}");
    }
    println!("tail estimate {:.1e}  direct {direct:.8}", est.tail_estimate);
    println!("psi {psi:.8}  psi - phi/4 - log 2 = {:+.2e}", theorem_b_residual(psi, est.value, 2));
}
