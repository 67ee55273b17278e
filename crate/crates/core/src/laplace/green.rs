use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;

use super::{LaplaceError, LaplaceOperator};
use crate::branch::SpherePoint;
use crate::mesh::{Chart, SurfaceMesh, SurfacePoint};
use crate::quad::{duffy_rule, DUNAVANT7};

/// `C³` step from 1 at `x ≤ 0` to 0 at `x ≥ 1`, with two derivatives.
fn step(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let (x2, x3) = (x * x, x * x * x);
    let p = x3 * x * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x3);
    let dp = 140.0 * x3 * (1.0 - x).powi(3);
    let ddp = 420.0 * x2 * (1.0 - x).powi(2) * (1.0 - 2.0 * x);
    (1.0 - p, -dp, -ddp)
}

/// Neighbourhood of a source vertex where the logarithm is split off.
///
/// The singular part is `c χ(d) log d` on the region's triangles, with
/// `d = |x - x_s|` on the base, `c = ½` at a branch point and `1` elsewhere,
/// so that it is `log r` in the source chart. `Δχ` must vanish on triangles
/// straddling a chart boundary, whose images do not tile exactly.
#[derive(Debug, Clone)]
pub struct SourceRegion {
    pub vertex: usize,
    /// Chart in which the Robin constant is measured.
    pub chart: Chart,
    /// `x` of the source.
    pub center: Complex64,
    pub coefficient: f64,
    /// `χ` falls from 1 at `d = inner` to 0 at `d = radius`.
    pub inner: f64,
    pub radius: f64,
    /// Triangles meeting the support.
    pub triangles: Vec<usize>,
}

fn diameter(z: &[Complex64; 3]) -> f64 {
    (z[0] - z[1]).norm().max((z[1] - z[2]).norm()).max((z[2] - z[0]).norm())
}

fn vertex_x(mesh: &SurfaceMesh, v: usize) -> Option<Complex64> {
    match mesh.vertices[v].x {
        SpherePoint::Finite(x) => Some(x),
        SpherePoint::Infinity => None,
    }
}

/// Triangles outside the infinity chart with a vertex within `radius + diam`
/// of `center`, and a lower bound for the distance to the infinity chart.
fn triangles_near(mesh: &SurfaceMesh, center: Complex64, radius: f64) -> (Vec<usize>, f64) {
    let mut out = Vec::new();
    let mut infinity_margin = f64::INFINITY;
    for (k, t) in mesh.triangles.iter().enumerate() {
        let xs: Vec<Complex64> = t.iter().filter_map(|&v| vertex_x(mesh, v)).collect();
        let dist = xs.iter().map(|x| (x - center).norm()).fold(f64::INFINITY, f64::min);
        let diam = xs.iter().flat_map(|p| xs.iter().map(move |q| (p - q).norm())).fold(0.0_f64, f64::max);
        if mesh.triangle_charts[k] == Chart::Infinity {
            // straight in w = 1/x, so |x| ≥ 1/max|w| on the whole triangle
            let wmax = mesh.chart_coords[k].iter().map(|w| w.norm()).fold(0.0_f64, f64::max);
            infinity_margin = infinity_margin.min(1.0 / wmax - center.norm());
        } else if dist < radius + diam {
            out.push(k);
        }
    }
    (out, infinity_margin)
}

impl SourceRegion {
    /// Cut off inside the `t`-disk around the `i`-th Weierstrass point.
    pub fn branch(mesh: &SurfaceMesh, i: usize) -> Result<SourceRegion, LaplaceError> {
        let vertex = *mesh.marked.get(i).ok_or(LaplaceError::BadSource(usize::MAX))?;
        let a = mesh.curve.roots[i];
        let disk = mesh.disks[i];
        let radius = disk.radius * (1.0 - 1.5 / disk.rings as f64).powi(2);
        let (triangles, margin) = triangles_near(mesh, a, radius);
        if margin <= radius {
            return Err(LaplaceError::BadSource(vertex));
        }
        Ok(SourceRegion { vertex, chart: Chart::Branch(i), center: a, coefficient: 0.5, inner: 0.0, radius, triangles })
    }

    /// A disk in `x` around a vertex of the plane chart, on that vertex's sheet.
    pub fn plane(mesh: &SurfaceMesh, v: usize) -> Result<SourceRegion, LaplaceError> {
        let vert = mesh.vertices.get(v).ok_or(LaplaceError::BadSource(v))?;
        let (SpherePoint::Finite(xs), Chart::Plane) = (vert.x, vert.chart) else {
            return Err(LaplaceError::BadSource(v));
        };
        let mut room = 1.0 - xs.norm();
        for d in &mesh.disks {
            room = room.min((xs - d.center).norm() - d.radius);
        }
        let radius = 0.5 * room;
        // triangles around v, grown across edges while they can meet the disk
        let mut incident: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (k, t) in mesh.triangles.iter().enumerate() {
            for a in 0..3 {
                let (p, q) = (t[a], t[(a + 1) % 3]);
                incident.entry((p.min(q), p.max(q))).or_default().push(k);
            }
        }
        let near = |k: usize| -> bool {
            let z = mesh.chart_coords[k];
            z.iter().map(|p| (p - xs).norm()).fold(f64::INFINITY, f64::min) < radius + diameter(&z)
        };
        let mut seen = HashSet::new();
        let mut queue: VecDeque<usize> = (0..mesh.triangles.len()).filter(|&k| mesh.triangles[k].contains(&v)).collect();
        seen.extend(queue.iter().copied());
        let mut triangles = Vec::new();
        while let Some(k) = queue.pop_front() {
            if mesh.triangle_charts[k] != Chart::Plane {
                return Err(LaplaceError::BadSource(v));
            }
            triangles.push(k);
            let t = mesh.triangles[k];
            for a in 0..3 {
                let (p, q) = (t[a], t[(a + 1) % 3]);
                for &nb in &incident[&(p.min(q), p.max(q))] {
                    if !seen.contains(&nb) && near(nb) {
                        seen.insert(nb);
                        queue.push_back(nb);
                    }
                }
            }
        }
        let spacing = triangles.iter().map(|&k| diameter(&mesh.chart_coords[k])).fold(0.0_f64, f64::max);
        if radius < 2.5 * spacing {
            return Err(LaplaceError::BadSource(v));
        }
        triangles.sort();
        Ok(SourceRegion { vertex: v, chart: Chart::Plane, center: xs, coefficient: 1.0, inner: 0.0, radius, triangles })
    }

    /// `χ` and its first two `d`-derivatives. The step runs in `d^e`,
    /// `e = c`, which is `|t|` in the chart of a branch point.
    fn cutoff(&self, d: f64) -> (f64, f64, f64) {
        let e = self.coefficient;
        let (a, b) = (self.inner.powf(e), self.radius.powf(e));
        let (s, ds, dds) = step((d.powf(e) - a) / (b - a));
        let q1 = e * d.powf(e - 1.0) / (b - a);
        let q2 = e * (e - 1.0) * d.powf(e - 2.0) / (b - a);
        (s, ds * q1, dds * q1 * q1 + ds * q2)
    }

    /// The split-off singular part at base point `x`.
    pub fn singular_part(&self, x: Complex64) -> f64 {
        self.singular_at((x - self.center).norm())
    }

    fn singular_at(&self, d: f64) -> f64 {
        self.coefficient * self.cutoff(d).0 * d.ln()
    }

    /// `d` at chart point `z`, and `|dx/dz|²`. In the source's own chart
    /// `d = |t|²` is taken directly, since `α + t²` loses it near the pole.
    fn locate(&self, mesh: &SurfaceMesh, chart: Chart, z: Complex64) -> (f64, f64) {
        match (chart, mesh.chart_to_x(chart, z)) {
            (Chart::Branch(_), _) if chart == self.chart => (z.norm_sqr(), 4.0 * z.norm_sqr()),
            (Chart::Branch(_), SpherePoint::Finite(x)) => ((x - self.center).norm(), 4.0 * z.norm_sqr()),
            (_, SpherePoint::Finite(x)) => ((x - self.center).norm(), 1.0),
            (_, SpherePoint::Infinity) => unreachable!("source regions avoid the infinity chart"),
        }
    }

    /// `Δ_x` of the singular part away from the pole.
    fn flat_laplacian(&self, d: f64) -> f64 {
        if d >= self.radius || d <= self.inner || d == 0.0 {
            return 0.0;
        }
        let (_, d1, d2) = self.cutoff(d);
        self.coefficient * (d.ln() * (d2 + d1 / d) + 2.0 * d1 / d)
    }
}

/// Values of `g_μ(source, ·)` at the mesh vertices.
#[derive(Debug, Clone)]
pub struct GreenField {
    pub source: usize,
    /// `-∞` at the source itself.
    pub values: Vec<f64>,
    /// Limit of `g - log r` at the source, `r` measured in the source chart.
    pub robin: f64,
    /// `∫ g μ` after the constant was fixed.
    pub mean: f64,
    pub constant_fixed: bool,
}

fn subdivided_rule(level: u32) -> Vec<([f64; 3], f64)> {
    let mut tris = vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
    for _ in 0..level {
        let mut next = Vec::with_capacity(tris.len() * 4);
        for s in tris {
            let mid = |i: usize, j: usize| [0, 1, 2].map(|k| 0.5 * (s[i][k] + s[j][k]));
            let (m01, m12, m20) = (mid(0, 1), mid(1, 2), mid(2, 0));
            next.push([s[0], m01, m20]);
            next.push([m01, s[1], m12]);
            next.push([m20, m12, s[2]]);
            next.push([m01, m12, m20]);
        }
        tris = next;
    }
    let scale = 1.0 / tris.len() as f64;
    let mut out = Vec::new();
    for s in &tris {
        for (b, w) in DUNAVANT7 {
            out.push(([0, 1, 2].map(|k| b[0] * s[0][k] + b[1] * s[1][k] + b[2] * s[2][k]), w * scale));
        }
    }
    out
}

fn area(z: &[Complex64; 3]) -> f64 {
    0.5 * ((z[1] - z[0]).conj() * (z[2] - z[0])).im.abs()
}

/// Solve for `g_μ(source, ·)` with the singular part split off in `region`.
pub fn green_function(
    mesh: &SurfaceMesh,
    op: &LaplaceOperator,
    region: &SourceRegion,
) -> Result<GreenField, LaplaceError> {
    let n = mesh.num_vertices();
    let mut load: Vec<f64> = op.mass.clone();
    let mut singular = vec![0.0; n];
    let rule = subdivided_rule(2);
    let duffy = duffy_rule(12);
    let mut s_mass = 0.0;
    for &k in &region.triangles {
        let chart = mesh.triangle_charts[k];
        let z = mesh.chart_coords[k];
        let t = mesh.triangles[k];
        let a = area(&z);
        for c in 0..3 {
            if t[c] != region.vertex {
                singular[t[c]] = region.singular_at(region.locate(mesh, chart, z[c]).0);
            }
        }
        // (1/2π) ∫ Δ(s) φ_c dA, with Δ_z = |dx/dz|² Δ_x
        for (b, w) in &rule {
            let (d, jac) = region.locate(mesh, chart, z[0] * b[0] + z[1] * b[1] + z[2] * b[2]);
            let lap = region.flat_laplacian(d) * jac;
            if lap != 0.0 {
                for c in 0..3 {
                    load[t[c]] += lap * b[c] * w * a / (2.0 * PI);
                }
            }
        }
        // ∫ s μ
        if let Some(c0) = (0..3).find(|&c| t[c] == region.vertex) {
            let zz = [z[c0], z[(c0 + 1) % 3], z[(c0 + 2) % 3]];
            for (b, w) in &duffy {
                let p = zz[0] * b[0] + zz[1] * b[1] + zz[2] * b[2];
                s_mass += region.singular_at(region.locate(mesh, chart, p).0) * mesh.density_in_chart(chart, p) * w * a;
            }
        } else {
            for (b, w) in &rule {
                let p = z[0] * b[0] + z[1] * b[1] + z[2] * b[2];
                s_mass += region.singular_at(region.locate(mesh, chart, p).0) * mesh.density_in_chart(chart, p) * w * a;
            }
        }
    }
    op.project_load(&mut load);
    let u = op.solve_mean_zero(&load)?;
    // u has zero mean, so the constant only has to cancel ∫ s μ
    let shift = -s_mass;
    let mut values: Vec<f64> = (0..n).map(|v| u[v] + singular[v] + shift).collect();
    values[region.vertex] = f64::NEG_INFINITY;
    let robin = u[region.vertex] + shift;
    let mean = s_mass + u.iter().zip(&op.mass).map(|(a, m)| a * m).sum::<f64>() + shift;
    Ok(GreenField { source: region.vertex, values, robin, mean, constant_fixed: true })
}

/// `½ log|f_ij(z)| - ½ ∫ log|f_ij| μ` with `f_ij = (x - α_i)/(x - α_j)`,
/// which equals `g_μ(w_i, z) - g_μ(w_j, z)`. The integral is computed once,
/// for the ordered pair, so swapping `i` and `j` flips the sign exactly.
#[derive(Debug, Clone, Copy)]
pub struct DifferenceOracle {
    pub i: usize,
    pub j: usize,
    lo: Complex64,
    hi: Complex64,
    sign: f64,
    mean: f64,
}

impl DifferenceOracle {
    pub fn new(mesh: &SurfaceMesh, i: usize, j: usize) -> Result<Self, LaplaceError> {
        let roots = &mesh.curve.roots;
        if i >= roots.len() || j >= roots.len() || i == j {
            return Err(LaplaceError::BadSource(usize::MAX));
        }
        let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let (lo, hi) = (roots[a], roots[b]);
        let mean = mesh.integrate(|p: &SurfacePoint| log_ratio(lo, hi, p.x), &[mesh.marked[a], mesh.marked[b]])?;
        Ok(DifferenceOracle { i, j, lo, hi, sign, mean })
    }

    /// `½ ∫ log|f_ij| μ`.
    pub fn mean(&self) -> f64 {
        0.5 * self.sign * self.mean
    }

    /// Value at a point of the base sphere (either sheet).
    pub fn at(&self, x: SpherePoint) -> Result<f64, LaplaceError> {
        let f = log_ratio(self.lo, self.hi, x);
        if !f.is_finite() {
            return Err(LaplaceError::EvaluationAtPole);
        }
        Ok(self.sign * 0.5 * (f - self.mean))
    }

    pub fn at_vertex(&self, mesh: &SurfaceMesh, v: usize) -> Result<f64, LaplaceError> {
        self.at(mesh.vertices.get(v).ok_or(LaplaceError::EvaluationAtPole)?.x)
    }
}

fn log_ratio(ai: Complex64, aj: Complex64, x: SpherePoint) -> f64 {
    match x {
        SpherePoint::Finite(x) => ((x - ai) / (x - aj)).norm().ln(),
        SpherePoint::Infinity => 0.0,
    }
}

/// One-shot [`DifferenceOracle`] evaluation at vertex `z`.
pub fn green_difference_oracle(mesh: &SurfaceMesh, i: usize, j: usize, z: usize) -> Result<f64, LaplaceError> {
    DifferenceOracle::new(mesh, i, j)?.at_vertex(mesh, z)
}
