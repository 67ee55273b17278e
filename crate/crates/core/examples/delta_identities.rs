//! The pair invariant δ_ij: product over a row, Möbius invariance and the
//! cross-ratio relation, on a random genus-3 branch set.

use canonical_green::branch::{BranchSet, MobiusMap, SpherePoint};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 3;
    let mut pts: Vec<SpherePoint> = (0..2 * h + 1)
        .map(|_| SpherePoint::finite(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect();
    pts.push(SpherePoint::Infinity);
    let bs = BranchSet::new(pts, h).unwrap();
    let n = bs.len();

    for i in 0..n {
        let log_prod: Complex64 = (0..n).filter(|&j| j != i).map(|j| bs.log_delta(i, j).unwrap()).sum();
        println!("row {}: |prod_j delta_ij| - 1 = {:+.2e}", i + 1, log_prod.exp().norm() - 1.0);
    }

    let m = MobiusMap::new(
        Complex64::new(0.3, 1.0),
        Complex64::new(-1.0, 0.2),
        Complex64::new(0.5, -0.4),
        Complex64::new(2.0, 0.1),
    )
    .unwrap();
    let moved = bs.apply_mobius(&m);
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let (a, b) = (bs.delta_invariant(i, j).unwrap(), moved.delta_invariant(i, j).unwrap());
                worst = worst.max((a - b).norm() / a.norm());
            }
        }
    }
    println!("Mobius invariance: max relative change {worst:.2e}");

    let (i, j, k, r) = (0, 1, 2, 7);
    let power = (2 * h * (2 * h + 1)) as f64;
    let lhs = bs.cross_ratio(i, j, k, r).unwrap().ln() * power;
    let rhs = bs.log_delta(i, k).unwrap() - bs.log_delta(j, k).unwrap() + bs.log_delta(j, r).unwrap()
        - bs.log_delta(i, r).unwrap();
    let gap = (lhs - rhs).exp() - 1.0;
    println!("cross ratio^{power} vs delta quotient: |ratio - 1| = {:.2e}", gap.norm());
}
