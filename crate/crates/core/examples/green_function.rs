//! Green's function with a pole at a Weierstrass point, checked against the
//! algebraic difference identity and, in genus one, the theta oracle.

use canonical_green::branch::{BranchSet, SpherePoint};
use canonical_green::elliptic::tau_from_branch;
use canonical_green::laplace::{assemble_laplacian, green_difference_oracle, green_function, SourceRegion};
use canonical_green::mesh::build_mesh;
use canonical_green::periods::compute_periods;

fn main() {
    let bs = BranchSet::new(
        vec![SpherePoint::finite(0.0, 0.0), SpherePoint::finite(1.0, 0.0), SpherePoint::finite(0.3, 0.8), SpherePoint::Infinity],
        1,
    )
    .unwrap();
    let cd = compute_periods(&bs).unwrap();
    let model = tau_from_branch(&bs).unwrap();
    for r in [32, 64, 128] {
        let mesh = build_mesh(&cd, r).unwrap();
        let op = assemble_laplacian(&mesh).unwrap();
        let g0 = green_function(&mesh, &op, &SourceRegion::branch(&mesh, 0).unwrap()).unwrap();
        let g1 = green_function(&mesh, &op, &SourceRegion::branch(&mesh, 1).unwrap()).unwrap();
        let mut worst = 0.0_f64;
        for j in 1..4 {
            let exact = model.torus.green_pair(model.points[0], model.points[j]).unwrap();
            worst = worst.max((g0.values[mesh.marked[j]] - exact).abs());
        }
        let mut oracle = 0.0_f64;
        for v in (0..mesh.num_vertices()).step_by(mesh.num_vertices() / 20) {
            if v == mesh.marked[0] || v == mesh.marked[1] {
                continue;
            }
            let d = green_difference_oracle(&mesh, 0, 1, v).unwrap();
            oracle = oracle.max((g0.values[v] - g1.values[v] - d).abs());
        }
        println!("R {r:3}: |g - theta| at Weierstrass points {worst:.2e}   |(g0 - g1) - oracle| {oracle:.2e}   mean {:.1e}", g0.mean);
    }
}
