use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const GENUS_ONE: &str = r#"{ "genus": 1, "branch_points": [[0, 0], [1, 0], [0.3, 0.8], "inf"] }"#;
const QUINTIC: &str = r#"{ "genus": 2, "branch_points":
    [[1, 0], [0.30901699437494745, 0.9510565162951535], [-0.8090169943749473, 0.5877852522924732],
     [-0.8090169943749476, -0.587785252292473], [0.30901699437494723, -0.9510565162951536], "inf"] }"#;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canonical-green")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn genus_one_report_passes_its_gates() {
    let dir = TempDir::new().unwrap();
    let curve = write(&dir, "g1.json", GENUS_ONE);
    let out = dir.path().join("report.json");
    let o = cli(&["invariants", "--curve", s(&curve), "--resolution", "32", "--eigs", "40", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["index_base"], 1);
    assert_eq!(report["parameters"]["resolution"], 32);
    assert!(report["elliptic"]["mesh_vs_theta"].as_f64().unwrap() < 1e-3);
    assert!(report["gates"].as_array().unwrap().iter().all(|g| g["passed"] == true));
}

#[test]
fn failed_gate_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let curve = write(&dir, "q.json", QUINTIC);
    let o = cli(&["invariants", "--curve", s(&curve), "--resolution", "16", "--eigs", "30", "--tol-thmA", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gate failed: thm_a"));
    // the report is still written
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["genus"], 2);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "broken.json", r#"{ "genus": 1, "branch_points": [[0, 0], [1, 0]"#);
    let short = write(&dir, "short.json", r#"{ "genus": 2, "branch_points": [[0, 0], [1, 0], [2, 0], "inf"] }"#);
    let doubled = write(&dir, "doubled.json", r#"{ "genus": 1, "branch_points": [[0, 0], [1, 0], [1, 0], "inf"] }"#);
    let missing = dir.path().join("missing.json");
    for p in [&broken, &short, &doubled, &missing] {
        let o = cli(&["invariants", "--curve", s(p), "--resolution", "16", "--eigs", "20"]);
        assert_eq!(o.status.code(), Some(2), "{}", p.display());
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    let o = cli(&["elliptic-check", "--tau", "0.2,-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn elliptic_check_by_modulus_and_by_curve() {
    let o = cli(&["elliptic-check", "--tau", "-0.3,1.1", "--max-n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["checks"]["torsion"].as_array().unwrap().len(), 3);

    let dir = TempDir::new().unwrap();
    let curve = write(&dir, "g1.json", GENUS_ONE);
    let o = cli(&["elliptic-check", "--curve", s(&curve)]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["checks"]["half_period_sum_residual"].as_f64().unwrap().abs() < 1e-7);
}

#[test]
fn mesh_dump_layout() {
    let dir = TempDir::new().unwrap();
    let curve = write(&dir, "q.json", QUINTIC);
    let out = dir.path().join("mesh.txt");
    let o = cli(&["mesh-dump", "--curve", s(&curve), "--resolution", "12", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# genus 2 resolution 12"));
    let nv: usize = lines.next().unwrap().strip_prefix("vertices ").unwrap().parse().unwrap();
    for (k, line) in lines.by_ref().take(nv).enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(f.len(), 6);
        assert_eq!(f[0].parse::<usize>().unwrap(), k);
    }
    let nt: usize = lines.next().unwrap().strip_prefix("triangles ").unwrap().parse().unwrap();
    for line in lines.by_ref().take(nt) {
        let f: Vec<&str> = line.split_whitespace().collect();
        assert!(f[..3].iter().all(|v| v.parse::<usize>().unwrap() < nv));
    }
    assert_eq!(lines.next(), Some("marked 6"));
    assert_eq!(lines.clone().count(), 6);
    // Euler characteristic of a genus-2 surface
    let edges = {
        let mut e = std::collections::HashSet::new();
        let body: Vec<&str> = text.lines().skip(3 + nv).take(nt).collect();
        for line in body {
            let v: Vec<usize> = line.split_whitespace().take(3).map(|x| x.parse().unwrap()).collect();
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                e.insert((a.min(b), a.max(b)));
            }
        }
        e.len()
    };
    assert_eq!(nv as i64 - edges as i64 + nt as i64, -2);
}

#[test]
fn degenerate_writes_csv_and_fit() {
    let dir = TempDir::new().unwrap();
    let family = write(
        &dir,
        "fam.json",
        r#"{ "genus": 2,
             "branch_points": [[1, 0], [-0.5, 0.8], [-0.4, -0.9], [2, 0.3], [-1, 1.7], "inf"],
             "left_cluster": [1, 2, 3], "right_cluster": [4, 5, 6],
             "t_values": [0.1, 0.05, 0.02, 0.01] }"#,
    );
    let out = dir.path().join("sweep.csv");
    let o = cli(&["degenerate", "--family", s(&family), "--resolution", "20", "--eigs", "80", "--out", s(&out)]);
    assert_ne!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("t,log_t,psi,phi"));
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.fit.json")).unwrap()).unwrap();
    assert!(fit["slope_gap"].is_number());

    let bad = write(&dir, "bad.json", &std::fs::read_to_string(&family).unwrap().replace("[0.1, 0.05", "[0.05, 0.1"));
    assert_eq!(cli(&["degenerate", "--family", s(&bad)]).status.code(), Some(2));
}

#[test]
fn reports_are_bit_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let curve = write(&dir, "q.json", QUINTIC);
    let run = || cli(&["invariants", "--curve", s(&curve), "--resolution", "20", "--eigs", "40"]).stdout;
    let first = run();
    assert!(!first.is_empty());
    assert_eq!(first, run());
}
