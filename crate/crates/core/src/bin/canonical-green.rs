use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use canonical_green::curve::{CurveSpec, DegenerationFamily};
use canonical_green::elliptic::Torus;
use canonical_green::mesh::build_mesh;
use canonical_green::periods::compute_periods;
use canonical_green::pipeline::{
    analyze_curve, run_sweep, sweep_csv, torsion_checks, weierstrass_checks, AnalysisOptions, DegenerationFit, Gate,
};

/// Canonical Green's functions and invariants of hyperelliptic curves.
///
/// Exit status: 0 when every gate passes, 1 when a gate fails, 2 on bad
/// input or a numerical failure.
#[derive(Parser)]
#[command(name = "canonical-green", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Numerics {
    /// Mesh resolution.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Number of nonzero eigenpairs in the spectral sum.
    #[arg(long, default_value_t = 200)]
    eigs: usize,
    /// Gate on the largest Weierstrass-pair residual.
    #[arg(long = "tol-thmA", default_value_t = 5e-3)]
    tol_thm_a: f64,
    /// Gate on |ψ - φ/2h - log 2|.
    #[arg(long = "tol-thmB", default_value_t = 2e-2)]
    tol_thm_b: f64,
}

impl Numerics {
    fn options(self) -> AnalysisOptions {
        AnalysisOptions { resolution: self.resolution, eigs: self.eigs, tol_thm_a: self.tol_thm_a, tol_thm_b: self.tol_thm_b }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full report for one curve.
    Invariants {
        #[arg(long)]
        curve: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
        /// Report path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep a degenerating family and fit ψ and φ/2h against log t.
    Degenerate {
        #[arg(long)]
        family: PathBuf,
        #[command(flatten)]
        numerics: Numerics,
        /// Gate on the difference of the two fitted slopes.
        #[arg(long = "tol-slope", default_value_t = 0.02)]
        tol_slope: f64,
        /// CSV path (stdout when absent). The fit summary goes next to it
        /// with extension `.fit.json`, or to stderr.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form genus-one checks.
    EllipticCheck {
        /// Modulus as `RE,IM`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex, required_unless_present = "curve")]
        tau: Option<Complex64>,
        /// Largest torsion order checked.
        #[arg(long = "max-n", default_value_t = 5)]
        max_n: usize,
        /// Genus-one curve file.
        #[arg(long, conflicts_with = "tau")]
        curve: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the surface mesh as text.
    MeshDump {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok(Complex64::new(p(re)?, p(im)?))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(format!("cannot write to stdout: {e}")),
            _ => Ok(()),
        },
    }
}

fn judge(gates: &[Gate]) -> ExitCode {
    let mut ok = true;
    for g in gates.iter().filter(|g| !g.passed) {
        eprintln!("gate failed: {} = {:e} (need {}, limit {:e})", g.name, g.value, g.condition, g.limit);
        ok = false;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    match cli.command {
        Command::Invariants { curve, numerics, out } => {
            let bs = CurveSpec::read(&curve).and_then(|s| s.branch_set()).map_err(|e| err(&e))?;
            let report = analyze_curve(&bs, &numerics.options()).map_err(|e| err(&e))?;
            emit(out.as_ref(), &(report.to_json() + "\n"))?;
            Ok(judge(&report.gates))
        }
        Command::Degenerate { family, numerics, tol_slope, out } => {
            let fam = DegenerationFamily::read(&family).map_err(|e| err(&e))?;
            let rows = run_sweep(&fam, &numerics.options()).map_err(|e| err(&e))?;
            emit(out.as_ref(), &sweep_csv(&rows))?;
            let fit = DegenerationFit::from_rows(&fam, rows).map_err(|e| err(&e))?;
            let summary = fit.to_json() + "\n";
            match &out {
                Some(p) => emit(Some(&p.with_extension("fit.json")), &summary)?,
                None => eprint!("{summary}"),
            }
            Ok(judge(&fit.gates(tol_slope, numerics.tol_thm_b)))
        }
        Command::EllipticCheck { tau, max_n, curve, out } => {
            let (value, gates) = if let Some(path) = curve {
                let bs = CurveSpec::read(&path).and_then(|s| s.branch_set()).map_err(|e| err(&e))?;
                let w = weierstrass_checks(&bs).map_err(|e| err(&e))?;
                let gates = vec![
                    Gate::below("closed_form", w.closed_form_residual, 1e-7),
                    Gate::below("half_period_sum", w.half_period_sum_residual, 1e-7),
                ];
                (serde_json::to_value(&w).expect("serializes"), gates)
            } else {
                let tau = tau.expect("clap enforces --tau or --curve");
                let torus = Torus::new(tau).map_err(|e| err(&e))?;
                let checks = torsion_checks(&torus, max_n).map_err(|e| err(&e))?;
                let gates: Vec<Gate> =
                    checks.iter().map(|c| Gate::below(&format!("torsion_{}", c.n), c.residual, 1e-7)).collect();
                let t = torus.tau();
                (serde_json::json!({ "tau": [t.re, t.im], "torsion": checks }), gates)
            };
            let doc = serde_json::json!({ "checks": value, "gates": gates });
            emit(out.as_ref(), &(serde_json::to_string_pretty(&doc).expect("serializes") + "\n"))?;
            Ok(judge(&gates))
        }
        Command::MeshDump { curve, resolution, out } => {
            let bs = CurveSpec::read(&curve).and_then(|s| s.branch_set()).map_err(|e| err(&e))?;
            let cd = compute_periods(&bs).map_err(|e| err(&e))?;
            let mesh = build_mesh(&cd, resolution).map_err(|e| err(&e))?;
            emit(out.as_ref(), &mesh.dump())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
