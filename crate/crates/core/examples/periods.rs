//! Periods of y² = x⁵ - 1: the Riemann matrix, the Gram matrix of the
//! naive differentials and an orthonormal basis.

use canonical_green::branch::{BranchSet, SpherePoint};
use canonical_green::periods::{compute_periods, hermitian_eigenvalues};
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() {
    let mut pts: Vec<SpherePoint> = (0..5).map(|k| SpherePoint::Finite(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 5.0))).collect();
    pts.push(SpherePoint::Infinity);
    let bs = BranchSet::new(pts, 2).unwrap();
    let cd = compute_periods(&bs).unwrap();

    let tau = cd.riemann_matrix();
    println!("Riemann matrix:{tau:.8}");
    println!("asymmetry {:.1e}", (&tau - tau.transpose()).norm());
    println!("eigenvalues of Im tau: {:?}", tau.map(|z| z.im).symmetric_eigenvalues().as_slice());
    println!("Gram eigenvalues: {:?}", hermitian_eigenvalues(&cd.gram));
    let c = &cd.ortho;
    let id = c.transpose() * &cd.gram * c.map(|z| z.conj());
    println!("orthonormal basis Gram:{id:.3e}");
    println!("quadrature nodes {} period error {:.1e}", cd.quadrature_nodes, cd.period_error);
}
