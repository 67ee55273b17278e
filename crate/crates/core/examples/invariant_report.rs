//! Full report for a curve file, as written by the `invariants` command.
//!
//! cargo run --release --example invariant_report -- curve.json

use canonical_green::curve::CurveSpec;
use canonical_green::pipeline::{analyze_curve, AnalysisOptions};

const QUINTIC: &str = r#"{ "genus": 2, "branch_points": [
    [1, 0], [0.30901699437494745, 0.9510565162951535], [-0.8090169943749475, 0.5877852522924731],
    [-0.8090169943749475, -0.5877852522924731], [0.30901699437494745, -0.9510565162951535], "inf"] }"#;

fn main() {
    let spec = match std::env::args().nth(1) {
        Some(path) => CurveSpec::read(path).unwrap(),
        None => CurveSpec::from_json(QUINTIC).unwrap(),
    };
    let report = analyze_curve(&spec.branch_set().unwrap(), &AnalysisOptions::default()).unwrap();
    println!("{}", report.to_json());
    for g in &report.gates {
        eprintln!("{:16} {:+.3e}  {}", g.name, g.value, if g.passed { "ok" } else { "FAILED" });
    }
}
