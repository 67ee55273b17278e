//! Three branch points collapsing together: ψ and φ/(2h) diverge at the
//! same rate while their difference stays at log 2.

use canonical_green::branch::SpherePoint;
use canonical_green::curve::DegenerationFamily;
use canonical_green::pipeline::{run_degeneration, sweep_csv, AnalysisOptions};
use num_complex::Complex64;

fn main() {
    let base = vec![
        SpherePoint::Finite(Complex64::from_polar(1.0, 0.1)),
        SpherePoint::Finite(Complex64::from_polar(1.1, 2.2)),
        SpherePoint::Finite(Complex64::from_polar(0.9, 4.3)),
        SpherePoint::finite(2.0, 0.3),
        SpherePoint::finite(-1.0, 1.7),
        SpherePoint::Infinity,
    ];
    let ts = vec![1e-1, 10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5), 1e-3];
    let family = DegenerationFamily::new(2, base, vec![0, 1, 2], vec![3, 4, 5], Complex64::new(0.0, 0.0), ts).unwrap();
    let opts = AnalysisOptions { resolution: 40, eigs: 120, ..AnalysisOptions::default() };
    let fit = run_degeneration(&family, &opts).unwrap();
    print!("{}", sweep_csv(&fit.rows));
    println!(
        "slope psi {:.5}  slope phi/4 {:.5}  gap {:.1e}  (coefficient of log|tau| is {})",
        fit.slope_psi, fit.slope_phi, fit.slope_gap, fit.reference_slope
    );
    println!("largest |psi - phi/4 - log 2| along the family {:.2e}", fit.max_thm_b_deviation);
}
