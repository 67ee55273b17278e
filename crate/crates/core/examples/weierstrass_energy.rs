//! The energy ψ of the Weierstrass points and the pair formula relating
//! g_μ(w_i, w_j) to log|δ_ij|.

use canonical_green::branch::{BranchSet, SpherePoint};
use canonical_green::laplace::{
    assemble_laplacian, log_delta_matrix, theorem_a_residuals, theorem_a_spread, weierstrass_energy_psi, GreenMatrix,
};
use canonical_green::mesh::build_mesh;
use canonical_green::periods::compute_periods;
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() {
    let mut pts: Vec<SpherePoint> = (0..5).map(|k| SpherePoint::Finite(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 5.0))).collect();
    pts.push(SpherePoint::finite(0.2, -0.3));
    let bs = BranchSet::new(pts, 2).unwrap();
    let cd = compute_periods(&bs).unwrap();
    let ld = log_delta_matrix(&bs);
    for r in [32, 64] {
        let mesh = build_mesh(&cd, r).unwrap();
        let op = assemble_laplacian(&mesh).unwrap();
        let gm = GreenMatrix::compute(&mesh, &op).unwrap();
        let psi = weierstrass_energy_psi(&gm);
        let (spread, common) = theorem_a_spread(&gm, &ld, 2);
        let res = theorem_a_residuals(&gm, &ld, psi, 2);
        println!(
            "R {r}: psi {psi:.6}  spread {spread:.2e}  common {common:.6} vs psi/5 {:.6}  max residual {:.2e}  asymmetry {:.1e}",
            psi / 5.0,
            res.abs().max(),
            gm.asymmetry
        );
    }
}
