//! Genus one in closed form: the theta-function Green's function, torsion
//! sums and the Weierstrass-pair values.

use canonical_green::branch::{BranchSet, SpherePoint};
use canonical_green::elliptic::{closed_form_weierstrass_green, tau_from_branch, Torus};
use num_complex::Complex64;

fn main() {
    let torus = Torus::new(Complex64::new(0.2, 1.3)).unwrap();
    for n in 2..=5 {
        let e = torus.torsion_energy(n).unwrap();
        println!("N = {n}: sum over torsion points {e:.12}  log N {:.12}", (n as f64).ln());
    }
    println!("g near the origin minus log|z|: {:.9}", torus.green_at(Complex64::new(1e-6, 0.0)).unwrap() - (1e-6f64).ln());

    let bs = BranchSet::new(
        vec![SpherePoint::finite(0.0, 0.0), SpherePoint::finite(1.0, 0.0), SpherePoint::finite(0.3, 0.8), SpherePoint::Infinity],
        1,
    )
    .unwrap();
    let model = tau_from_branch(&bs).unwrap();
    println!("tau = {:.10}", model.torus.tau());
    for (i, j) in [(0, 1), (0, 2), (1, 2), (0, 3)] {
        let theta = model.torus.green_pair(model.points[i], model.points[j]).unwrap();
        let closed = closed_form_weierstrass_green(&bs, i, j).unwrap();
        println!("g(w{}, w{}) theta {theta:.12} closed form {closed:.12}", i + 1, j + 1);
    }
    let o = model.origin_index;
    let sum: f64 = (0..4).filter(|&i| i != o).map(|i| model.torus.green_pair(model.points[i], model.points[o]).unwrap()).sum();
    println!("sum over half periods {sum:.12}  log 2 {:.12}", std::f64::consts::LN_2);
}
