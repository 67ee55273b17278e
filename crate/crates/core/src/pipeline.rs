//! End-to-end runs: one curve to an [`InvariantReport`], genus-one closed
//! form checks, and the degeneration sweep.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::branch::{BranchError, BranchSet, SpherePoint};
use crate::curve::{DegenerationFamily, InputError};
use crate::elliptic::{elliptic_weierstrass_green_with, tau_from_branch, EllipticError, Torus};
use crate::laplace::{
    assemble_laplacian, eigenpairs, kawazumi_zhang_phi, log_delta_matrix, phi_direct, theorem_a_residuals,
    theorem_a_spread, theorem_b_residual, weierstrass_energy_psi, GreenMatrix, LaplaceError,
};
use crate::mesh::{build_mesh, MeshError};
use crate::periods::{compute_periods, PeriodError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Laplace(#[from] LaplaceError),
    #[error("a slope fit needs at least 4 t-values, got {0}")]
    TooFewPoints(usize),
    #[error("linear fit of {quantity} against log t is unstable (R² = {r_squared:.4})")]
    FitUnstable { quantity: &'static str, r_squared: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub resolution: usize,
    pub eigs: usize,
    /// Gate on `max |g(w_i,w_j) - log|δ_ij|/(4h(2h+1)) - ψ/(2h+1)|`.
    pub tol_thm_a: f64,
    /// Gate on `|ψ - φ/(2h) - log 2|`. Half of it bounds the spectral tail.
    pub tol_thm_b: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { resolution: 64, eigs: 200, tol_thm_a: 5e-3, tol_thm_b: 2e-2 }
    }
}

/// A pass/fail check that decides the exit code.
#[derive(Debug, Clone, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    /// `"|value| < limit"` or `"value > limit"`.
    pub condition: &'static str,
    pub passed: bool,
}

impl Gate {
    pub fn below(name: &str, value: f64, limit: f64) -> Gate {
        Gate { name: name.into(), value, limit, condition: "|value| < limit", passed: value.abs() < limit }
    }

    pub fn above(name: &str, value: f64, limit: f64) -> Gate {
        Gate { name: name.into(), value, limit, condition: "value > limit", passed: value > limit }
    }
}

/// Where a reported number came from and how far off it may be.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub quantity: &'static str,
    pub module: &'static str,
    pub error_estimate: f64,
    pub estimate_kind: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportParameters {
    pub resolution: usize,
    pub eigenpairs: usize,
    pub vertices: usize,
    pub triangles: usize,
    pub raw_mass: f64,
    pub period_quadrature_nodes: usize,
    pub tol_thm_a: f64,
    pub tol_thm_b: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiSummary {
    pub value: f64,
    pub tail_estimate: f64,
    /// The same quadratic form by direct Poisson solves (no truncation).
    pub direct: f64,
    pub constant_mode_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub lambda_0: f64,
    pub lambda_1: f64,
    pub lambda_max: f64,
    pub min_eigenvalue: f64,
    pub orthonormality_defect: f64,
    pub krylov_dimension: usize,
}

/// One unordered pair of Weierstrass points, 1-based.
#[derive(Debug, Clone, Serialize)]
pub struct PairEntry {
    pub i: usize,
    pub j: usize,
    pub green: f64,
    pub log_abs_delta: f64,
    pub thm_a_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionCheck {
    pub n: usize,
    pub energy: f64,
    pub residual: f64,
}

/// Closed-form genus-one data for a four-point branch set.
#[derive(Debug, Clone, Serialize)]
pub struct WeierstrassChecks {
    pub tau: [f64; 2],
    /// Largest `|theta oracle - closed form|` over pairs.
    pub closed_form_residual: f64,
    /// `Σ g_μ(w, o)` over the three Weierstrass points `w ≠ o`.
    pub half_period_sum: f64,
    pub half_period_sum_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticChecks {
    #[serde(flatten)]
    pub weierstrass: WeierstrassChecks,
    pub torsion: Vec<TorsionCheck>,
    /// Largest `|mesh g - theta g|` at the Weierstrass pairs.
    pub mesh_vs_theta: f64,
}

/// Everything computed for one curve. Matrices are indexed in branch-point
/// order; pair labels are 1-based.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub genus: usize,
    pub index_base: usize,
    pub branch_points: Vec<SpherePoint>,
    /// `[re, im]` entries, row-major.
    pub riemann_matrix: Vec<Vec<[f64; 2]>>,
    pub psi: f64,
    pub phi: PhiSummary,
    pub thm_a_common_value: f64,
    pub thm_a_spread: f64,
    pub max_thm_a_residual: f64,
    pub thm_b_residual: f64,
    pub pairs: Vec<PairEntry>,
    pub green_matrix: Vec<Vec<f64>>,
    pub green_asymmetry: f64,
    pub green_means: Vec<f64>,
    pub spectrum: SpectrumSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elliptic: Option<EllipticChecks>,
    pub gates: Vec<Gate>,
    pub provenance: Vec<Provenance>,
    pub parameters: ReportParameters,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn failed_gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| !g.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

const CLOSED_FORM_TOL: f64 = 1e-7;
const MESH_VS_THETA_TOL: f64 = 1e-3;
const GENUS_ONE_PHI_TOL: f64 = 5e-3;

pub fn torsion_checks(torus: &Torus, max_n: usize) -> Result<Vec<TorsionCheck>, EllipticError> {
    (2..=max_n)
        .map(|n| {
            let energy = torus.torsion_energy(n)?;
            Ok(TorsionCheck { n, energy, residual: energy - (n as f64).ln() })
        })
        .collect()
}

pub fn weierstrass_checks(bs: &BranchSet) -> Result<WeierstrassChecks, EllipticError> {
    let model = tau_from_branch(bs)?;
    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                worst = worst.max(elliptic_weierstrass_green_with(&model, bs, i, j)?.residual);
            }
        }
    }
    let o = model.origin_index;
    let mut sum = 0.0;
    for i in (0..4).filter(|&i| i != o) {
        sum += model.torus.green_pair(model.points[i], model.points[o])?;
    }
    let tau = model.torus.tau();
    Ok(WeierstrassChecks {
        tau: [tau.re, tau.im],
        closed_form_residual: worst,
        half_period_sum: sum,
        half_period_sum_residual: sum - LN_2,
    })
}

/// Branch set → periods → mesh → Green's functions and spectrum → report.
pub fn analyze_curve(bs: &BranchSet, opts: &AnalysisOptions) -> Result<InvariantReport, PipelineError> {
    let h = bs.genus();
    let cd = compute_periods(bs)?;
    let mesh = build_mesh(&cd, opts.resolution)?;
    let op = assemble_laplacian(&mesh)?;

    let green = GreenMatrix::compute(&mesh, &op)?;
    let psi = weierstrass_energy_psi(&green);
    let log_delta = log_delta_matrix(bs);
    let residuals = theorem_a_residuals(&green, &log_delta, psi, h);
    let (spread, common) = theorem_a_spread(&green, &log_delta, h);
    let max_a = residuals.abs().max();

    let spec = eigenpairs(&op, opts.eigs)?;
    let est = kawazumi_zhang_phi(&mesh, &spec, Some(0.5 * opts.tol_thm_b))?;
    let direct = phi_direct(&mesh, &op)?;
    let thm_b = theorem_b_residual(psi, est.value, h);

    let nb = bs.len();
    let mut pairs = Vec::new();
    for i in 0..nb {
        for j in i + 1..nb {
            pairs.push(PairEntry {
                i: i + 1,
                j: j + 1,
                green: green.symmetric[(i, j)],
                log_abs_delta: log_delta[(i, j)],
                thm_a_residual: residuals[(i, j)],
            });
        }
    }

    let mut gates = vec![Gate::below("thm_a", max_a, opts.tol_thm_a), Gate::below("thm_b", thm_b, opts.tol_thm_b)];
    let elliptic = if h == 1 {
        let weierstrass = weierstrass_checks(bs)?;
        let torus = Torus::new(Complex64::new(weierstrass.tau[0], weierstrass.tau[1]))?;
        let torsion = torsion_checks(&torus, 5)?;
        let model = tau_from_branch(bs)?;
        let mut mesh_vs_theta = 0.0_f64;
        for i in 0..nb {
            for j in 0..nb {
                if i != j {
                    let exact = model.torus.green_pair(model.points[i], model.points[j])?;
                    mesh_vs_theta = mesh_vs_theta.max((green.raw[(i, j)] - exact).abs());
                }
            }
        }
        gates.push(Gate::below("phi_vanishes", est.value, GENUS_ONE_PHI_TOL));
        gates.push(Gate::below("closed_form", weierstrass.closed_form_residual, CLOSED_FORM_TOL));
        gates.push(Gate::below("half_period_sum", weierstrass.half_period_sum_residual, CLOSED_FORM_TOL));
        for t in &torsion {
            gates.push(Gate::below(&format!("torsion_{}", t.n), t.residual, CLOSED_FORM_TOL));
        }
        gates.push(Gate::below("mesh_vs_theta", mesh_vs_theta, MESH_VS_THETA_TOL));
        Some(EllipticChecks { weierstrass, torsion, mesh_vs_theta })
    } else {
        gates.push(Gate::above("psi_minus_log2", psi - LN_2, 0.0));
        None
    };

    let tau = cd.riemann_matrix();
    let riemann_matrix = (0..h).map(|i| (0..h).map(|j| [tau[(i, j)].re, tau[(i, j)].im]).collect()).collect();
    let matrix_rows = |m: &nalgebra::DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    let phi_error = (est.value - direct).abs() + est.tail_estimate;
    let provenance = vec![
        Provenance {
            quantity: "riemann_matrix",
            module: "periods",
            error_estimate: cd.period_error,
            estimate_kind: "relative change under quadrature refinement",
        },
        Provenance {
            quantity: "green_matrix",
            module: "laplace",
            error_estimate: green.asymmetry,
            estimate_kind: "asymmetry of the discrete Green matrix",
        },
        Provenance { quantity: "psi", module: "laplace", error_estimate: green.asymmetry, estimate_kind: "asymmetry of the discrete Green matrix" },
        Provenance {
            quantity: "phi",
            module: "laplace",
            error_estimate: phi_error,
            estimate_kind: "spectral tail plus disagreement with the direct solve",
        },
        Provenance {
            quantity: "thm_b_residual",
            module: "laplace",
            error_estimate: green.asymmetry + phi_error / (2 * h) as f64,
            estimate_kind: "propagated from psi and phi",
        },
    ];

    Ok(InvariantReport {
        genus: h,
        index_base: 1,
        branch_points: bs.points().to_vec(),
        riemann_matrix,
        psi,
        phi: PhiSummary { value: est.value, tail_estimate: est.tail_estimate, direct, constant_mode_defect: est.constant_mode_defect },
        thm_a_common_value: common,
        thm_a_spread: spread,
        max_thm_a_residual: max_a,
        thm_b_residual: thm_b,
        pairs,
        green_matrix: matrix_rows(&green.symmetric),
        green_asymmetry: green.asymmetry,
        green_means: green.means.clone(),
        spectrum: SpectrumSummary {
            lambda_0: spec.eigenvalues[0],
            lambda_1: spec.eigenvalues[1],
            lambda_max: *spec.eigenvalues.last().expect("nonempty"),
            min_eigenvalue: spec.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
            orthonormality_defect: spec.orthonormality_defect,
            krylov_dimension: spec.krylov_dimension,
        },
        elliptic,
        gates,
        provenance,
        parameters: ReportParameters {
            resolution: opts.resolution,
            eigenpairs: opts.eigs,
            vertices: mesh.num_vertices(),
            triangles: mesh.triangles.len(),
            raw_mass: mesh.raw_mass,
            period_quadrature_nodes: cd.quadrature_nodes,
            tol_thm_a: opts.tol_thm_a,
            tol_thm_b: opts.tol_thm_b,
        },
    })
}

/// One row of the sweep CSV.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub log_t: f64,
    pub psi: f64,
    pub phi: f64,
    pub phi_tail_est: f64,
    #[serde(rename = "thmB_residual")]
    pub thm_b_residual: f64,
    #[serde(rename = "max_thmA_residual")]
    pub max_thm_a_residual: f64,
}

pub const SWEEP_CSV_HEADER: &str = "t,log_t,psi,phi,phi_tail_est,thmB_residual,max_thmA_residual";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.t, r.log_t, r.psi, r.phi, r.phi_tail_est, r.thm_b_residual, r.max_thm_a_residual
        ));
    }
    out
}

/// Runs the pipeline for every `t` of the family. Members are independent
/// and run in parallel; rows come back in the order of `t_values`.
pub fn run_sweep(family: &DegenerationFamily, opts: &AnalysisOptions) -> Result<Vec<SweepRow>, PipelineError> {
    family
        .t_values
        .par_iter()
        .map(|&t| {
            let bs = family.member(t)?;
            let rep = analyze_curve(&bs, opts)?;
            Ok(SweepRow {
                t,
                log_t: t.ln(),
                psi: rep.psi,
                phi: rep.phi.value,
                phi_tail_est: rep.phi.tail_estimate,
                thm_b_residual: rep.thm_b_residual,
                max_thm_a_residual: rep.max_thm_a_residual,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares `y ≈ slope · x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    LineFit { slope, intercept, r_squared }
}

/// Fits below this coefficient of determination are rejected.
pub const MIN_R_SQUARED: f64 = 0.95;

#[derive(Debug, Clone, Serialize)]
pub struct DegenerationFit {
    pub genus: usize,
    pub h1: usize,
    pub h2: usize,
    /// `ψ(M_t)` against `log t`.
    pub slope_psi: f64,
    /// `φ(M_t)/(2h)` against `log t`.
    pub slope_phi: f64,
    pub intercept_psi: f64,
    pub intercept_phi: f64,
    pub r_squared_psi: f64,
    pub r_squared_phi: f64,
    pub slope_gap: f64,
    /// `-h₁h₂/h²`, the coefficient of `log|τ|`. Not comparable to the fitted
    /// slopes without the reparametrization from `t` to `τ`.
    pub reference_slope: f64,
    /// `ψ(M_t) - φ(M_t)/(2h)` per `t`.
    pub thm_b_track: Vec<f64>,
    pub max_thm_b_deviation: f64,
    /// Whether `ψ(M_t)` increases as `t` decreases.
    pub psi_increasing: bool,
    pub rows: Vec<SweepRow>,
}

impl DegenerationFit {
    pub fn from_rows(family: &DegenerationFamily, rows: Vec<SweepRow>) -> Result<DegenerationFit, PipelineError> {
        if rows.len() < 4 {
            return Err(PipelineError::TooFewPoints(rows.len()));
        }
        let h = family.genus as f64;
        let x: Vec<f64> = rows.iter().map(|r| r.log_t).collect();
        let psi: Vec<f64> = rows.iter().map(|r| r.psi).collect();
        let phi: Vec<f64> = rows.iter().map(|r| r.phi / (2.0 * h)).collect();
        let fp = fit_line(&x, &psi);
        let ff = fit_line(&x, &phi);
        if !(fp.r_squared >= MIN_R_SQUARED) {
            return Err(PipelineError::FitUnstable { quantity: "psi", r_squared: fp.r_squared });
        }
        if !(ff.r_squared >= MIN_R_SQUARED) {
            return Err(PipelineError::FitUnstable { quantity: "phi", r_squared: ff.r_squared });
        }
        let thm_b_track: Vec<f64> = psi.iter().zip(&phi).map(|(a, b)| a - b).collect();
        let max_thm_b_deviation = thm_b_track.iter().map(|v| (v - LN_2).abs()).fold(0.0, f64::max);
        // rows follow t_values, which decrease
        let psi_increasing = psi.windows(2).all(|w| w[1] > w[0]);
        Ok(DegenerationFit {
            genus: family.genus,
            h1: family.h1,
            h2: family.h2,
            slope_psi: fp.slope,
            slope_phi: ff.slope,
            intercept_psi: fp.intercept,
            intercept_phi: ff.intercept,
            r_squared_psi: fp.r_squared,
            r_squared_phi: ff.r_squared,
            slope_gap: (fp.slope - ff.slope).abs(),
            reference_slope: -((family.h1 * family.h2) as f64) / (h * h),
            thm_b_track,
            max_thm_b_deviation,
            psi_increasing,
            rows,
        })
    }

    pub fn gates(&self, slope_tol: f64, tol_thm_b: f64) -> Vec<Gate> {
        vec![
            Gate::below("slope_gap", self.slope_gap, slope_tol),
            Gate::below("thm_b_track", self.max_thm_b_deviation, tol_thm_b),
        ]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }
}

/// Sweep, then fit.
pub fn run_degeneration(family: &DegenerationFamily, opts: &AnalysisOptions) -> Result<DegenerationFit, PipelineError> {
    let rows = run_sweep(family, opts)?;
    DegenerationFit::from_rows(family, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [-1.0, -2.0, -3.0, -4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.25 * v + 1.5).collect();
        let f = fit_line(&x, &y);
        assert!((f.slope - 0.25).abs() < 1e-14 && (f.intercept - 1.5).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn csv_has_the_sweep_columns() {
        let row = SweepRow {
            t: 0.1,
            log_t: 0.1f64.ln(),
            psi: 0.9,
            phi: 0.8,
            phi_tail_est: 1e-9,
            thm_b_residual: -4e-4,
            max_thm_a_residual: 1e-3,
        };
        let csv = sweep_csv(&[row]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SWEEP_CSV_HEADER));
        assert_eq!(lines.next().unwrap().split(',').count(), 7);
    }

    #[test]
    fn gates_compare_as_documented() {
        assert!(Gate::below("x", -1e-3, 2e-3).passed);
        assert!(!Gate::below("x", 3e-3, 2e-3).passed);
        assert!(Gate::above("x", 1e-9, 0.0).passed);
        assert!(!Gate::above("x", f64::NAN, 0.0).passed);
    }
}
