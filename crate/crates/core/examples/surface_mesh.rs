//! Build the two-sheeted triangulation of a genus-2 curve and inspect it.

use canonical_green::branch::{BranchSet, SpherePoint};
use canonical_green::mesh::{build_mesh, Chart};
use canonical_green::periods::compute_periods;

fn main() {
    let bs = BranchSet::new(
        vec![
            SpherePoint::finite(0.0, 0.0),
            SpherePoint::finite(1.0, 0.2),
            SpherePoint::finite(-0.4, 1.1),
            SpherePoint::finite(-1.3, -0.5),
            SpherePoint::finite(0.6, -0.9),
            SpherePoint::Infinity,
        ],
        2,
    )
    .unwrap();
    let cd = compute_periods(&bs).unwrap();
    for r in [16, 32, 64] {
        let mesh = build_mesh(&cd, r).unwrap();
        let branch = mesh.triangle_charts.iter().filter(|c| matches!(c, Chart::Branch(_))).count();
        let inf = mesh.triangle_charts.iter().filter(|c| **c == Chart::Infinity).count();
        println!(
            "R {r:3}: V {:6} E {:6} F {:6} chi {:3}  branch-chart triangles {branch:5}  w-chart {inf:5}  mass before normalizing {:.8}",
            mesh.num_vertices(),
            mesh.num_edges(),
            mesh.triangles.len(),
            mesh.euler_characteristic(),
            mesh.raw_mass
        );
    }
    let mesh = build_mesh(&cd, 16).unwrap();
    let one: f64 = mesh.integrate(|_| 1.0, &[]).unwrap();
    println!("integral of mu: {one:.12}");
    let dump = mesh.dump();
    println!("{}", dump.lines().take(4).collect::<Vec<_>>().join("\n"));
}
