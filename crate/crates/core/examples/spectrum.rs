//! Low spectrum of the canonical Laplacian. On the square torus the first
//! nonzero eigenvalue is 2π with multiplicity four.

use canonical_green::branch::{BranchSet, SpherePoint};
use canonical_green::elliptic::tau_from_branch;
use canonical_green::laplace::{assemble_laplacian, eigenpairs, flat_torus_eigenvalues};
use canonical_green::mesh::build_mesh;
use canonical_green::periods::compute_periods;

fn main() {
    // x(x-1)(x+1) has a square period lattice
    let bs = BranchSet::new(
        vec![SpherePoint::finite(0.0, 0.0), SpherePoint::finite(1.0, 0.0), SpherePoint::finite(-1.0, 0.0), SpherePoint::Infinity],
        1,
    )
    .unwrap();
    let tau = tau_from_branch(&bs).unwrap().torus.tau();
    let exact = flat_torus_eigenvalues(tau, 12);
    let cd = compute_periods(&bs).unwrap();
    let mesh = build_mesh(&cd, 48).unwrap();
    let op = assemble_laplacian(&mesh).unwrap();
    let spec = eigenpairs(&op, 12).unwrap();
    println!("tau {tau:.6}  Krylov dimension {}  orthonormality defect {:.1e}", spec.krylov_dimension, spec.orthonormality_defect);
    println!("lambda_0 {:.2e}", spec.eigenvalues[0]);
    for (k, (l, e)) in spec.eigenvalues[1..].iter().zip(&exact).enumerate() {
        println!("lambda_{:<2} {l:10.6}  flat torus {e:10.6}  rel {:+.2e}", k + 1, l / e - 1.0);
    }
}
