//! Two-sheeted triangulation of the curve `y² = ∏(x - α_r)` in working
//! coordinates.
//!
//! A Delaunay triangulation of the base sphere is lifted to both sheets by
//! continuing `y` across each triangle. Every surface triangle carries a
//! conformal chart used for the stiffness matrix: `x` itself, `w = 1/x`
//! near infinity, or `t` with `t² = x - α_i` near a branch point. Mass
//! integrals of the canonical density are done exactly in `x` with
//! singular quadrature at the branch points and polar quadrature on the
//! triangles incident to infinity.

mod points;

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use spade::{DelaunayTriangulation, Point2, Triangulation};
use thiserror::Error;

use crate::branch::SpherePoint;
use crate::periods::CurveData;
use crate::quad::{duffy_rule, gauss_legendre_unit, DUNAVANT7};

pub use points::BranchDisk;
use points::{place_points, Sizing};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("resolution {0} is too low to separate the branch points")]
    ResolutionTooLow(usize),
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("integrand is not finite at surface vertex {0}")]
    SingularValue(usize),
    #[error("singular vertex {0} is not supported by the quadrature")]
    UnsupportedSingularity(usize),
}

/// Coordinate in which a triangle or vertex is treated as flat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Chart {
    Plane,
    Infinity,
    Branch(usize),
}

impl std::fmt::Display for Chart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Chart::Plane => write!(f, "plane"),
            Chart::Infinity => write!(f, "inf"),
            Chart::Branch(i) => write!(f, "branch{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SurfaceVertex {
    pub x: SpherePoint,
    /// `y` at a finite vertex; at infinity the leading coefficient `y·w^{h+1}`.
    pub y: Complex64,
    pub sheet: u8,
    pub chart: Chart,
    /// Index of the vertex of the base triangulation below this one.
    pub base: usize,
}

/// A point of the surface handed to integrands.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub x: SpherePoint,
    /// As in [`SurfaceVertex::y`].
    pub y: Complex64,
    pub vertex: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub curve: CurveData,
    pub resolution: usize,
    pub vertices: Vec<SurfaceVertex>,
    pub triangles: Vec<[usize; 3]>,
    pub triangle_charts: Vec<Chart>,
    /// Vertex coordinates of each triangle in its chart.
    pub chart_coords: Vec<[Complex64; 3]>,
    /// `cot` of the angle at each corner, measured in the chart.
    pub cotangents: Vec<[f64; 3]>,
    /// `μ`-mass of each vertex (sums to one).
    pub mu_weights: Vec<f64>,
    /// Total mass before normalization.
    pub raw_mass: f64,
    /// Per vertex, `h × h` row-major weights with
    /// `Σ_v f(v) N_v[a][b] ≈ ∫ f ν_a ∧ conj(ν_b) · (i/2)`.
    pub gram_weights: Vec<Vec<Complex64>>,
    /// Surface vertex sitting over each branch point.
    pub marked: Vec<usize>,
    pub disks: Vec<BranchDisk>,
    base: BaseData,
}

#[derive(Debug, Clone)]
struct BaseData {
    /// Finite base points; index `points.len()` is infinity.
    points: Vec<Complex64>,
    triangles: Vec<[usize; 3]>,
    /// `y` at the centroid of each base triangle on lift 0.
    centroid_y: Vec<Complex64>,
    /// Mass of each corner of each base triangle (unnormalized).
    corner_mass: Vec<[f64; 3]>,
    /// Surface vertex indices for each base vertex on sheets 0 and 1.
    lifts: Vec<[usize; 2]>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn principal_y(roots: &[Complex64], x: Complex64) -> Complex64 {
    roots.iter().map(|&a| (x - a).sqrt()).product()
}

/// `y` continued from `yc` at `from` to `to` along a path avoiding the roots.
fn continue_y(roots: &[Complex64], yc: Complex64, from: Complex64, to: Complex64) -> Complex64 {
    yc * roots.iter().map(|&a| ((to - a) / (from - a)).sqrt()).product::<Complex64>()
}

/// `Y = y w^{h+1}` continued in `w`.
fn continue_big_y(roots: &[Complex64], yc: Complex64, from: Complex64, to: Complex64) -> Complex64 {
    yc * roots
        .iter()
        .map(|&a| ((c(1.0, 0.0) - a * to) / (c(1.0, 0.0) - a * from)).sqrt())
        .product::<Complex64>()
}

fn signed_area(p: [Complex64; 3]) -> f64 {
    0.5 * ((p[1] - p[0]).conj() * (p[2] - p[0])).im
}

fn cotangents(p: [Complex64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    let twice = 2.0 * signed_area(p).abs();
    for a in 0..3 {
        let u = p[(a + 1) % 3] - p[a];
        let v = p[(a + 2) % 3] - p[a];
        out[a] = (u.conj() * v).re / twice;
    }
    out
}

impl SurfaceMesh {
    pub fn genus(&self) -> usize {
        self.curve.genus()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for a in 0..3 {
                let (u, v) = (t[a], t[(a + 1) % 3]);
                edges.insert((u.min(v), u.max(v)));
            }
        }
        edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.triangles.len() as i64
    }

    /// Base triangle under surface triangle `k`, and the lift index.
    pub fn base_of_triangle(&self, k: usize) -> (usize, u8) {
        (k / 2, (k % 2) as u8)
    }

    /// The sheet-exchange involution on vertices.
    pub fn involution(&self, v: usize) -> usize {
        let vert = &self.vertices[v];
        let l = self.base.lifts[vert.base];
        l[1 - vert.sheet as usize]
    }

    /// Density of `μ` with respect to the flat area of `chart` at `z`.
    pub fn density_in_chart(&self, chart: Chart, z: Complex64) -> f64 {
        let roots = &self.curve.roots;
        match chart {
            Chart::Plane => density_x(&self.curve, z),
            Chart::Infinity => {
                let d: f64 = roots.iter().map(|&a| (c(1.0, 0.0) - a * z).norm()).product();
                self.curve.density_numerator_at_infinity(z) / d
            }
            Chart::Branch(i) => {
                let x = roots[i] + z * z;
                let d: f64 = roots
                    .iter()
                    .enumerate()
                    .filter(|&(r, _)| r != i)
                    .map(|(_, &a)| (x - a).norm())
                    .product();
                4.0 * self.curve.density_numerator(x) / d
            }
        }
    }

    /// `x` of a point given in `chart` coordinates.
    pub fn chart_to_x(&self, chart: Chart, z: Complex64) -> SpherePoint {
        match chart {
            Chart::Plane => SpherePoint::Finite(z),
            Chart::Infinity => {
                if z == c(0.0, 0.0) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(1.0 / z)
                }
            }
            Chart::Branch(i) => SpherePoint::Finite(self.curve.roots[i] + z * z),
        }
    }

    /// `μ`-integral of `f`. Triangles touching a vertex in `singular` are
    /// integrated with a rule collapsed at that vertex, so `f` may have a
    /// logarithmic singularity there; elsewhere `f` is sampled at vertices.
    pub fn integrate<V, F>(&self, f: F, singular: &[usize]) -> Result<V, MeshError>
    where
        V: Copy + Default + std::ops::Add<Output = V> + std::ops::Mul<f64, Output = V>,
        F: Fn(&SurfacePoint) -> V,
        V: FiniteCheck,
    {
        let mut cache: Vec<Option<V>> = vec![None; self.vertices.len()];
        let mut eval_vertex = |v: usize| -> Result<V, MeshError> {
            if let Some(val) = cache[v] {
                return Ok(val);
            }
            let vert = &self.vertices[v];
            let val = f(&SurfacePoint { x: vert.x, y: vert.y, vertex: Some(v) });
            if !val.is_finite_value() {
                return Err(MeshError::SingularValue(v));
            }
            cache[v] = Some(val);
            Ok(val)
        };
        let scale = 1.0 / self.raw_mass;
        let duffy = duffy_rule(14);
        let mut acc = V::default();
        for (k, tri) in self.triangles.iter().enumerate() {
            let (bt, lift) = self.base_of_triangle(k);
            let hit = (0..3).find(|&a| singular.contains(&tri[a]));
            match hit {
                None => {
                    for a in 0..3 {
                        acc = acc + eval_vertex(tri[a])? * (self.base.corner_mass[bt][a] * scale);
                    }
                }
                Some(a0) => {
                    let btri = self.base.triangles[bt];
                    let inf = self.base.points.len();
                    if btri.contains(&inf) {
                        return Err(MeshError::UnsupportedSingularity(tri[a0]));
                    }
                    let p = [0, 1, 2].map(|a| self.base.points[btri[(a0 + a) % 3]]);
                    let area = signed_area(p).abs();
                    let cen = (p[0] + p[1] + p[2]) / 3.0;
                    let sign = if lift == 0 { 1.0 } else { -1.0 };
                    let yc = self.base.centroid_y[bt] * sign;
                    for (b, w) in &duffy {
                        let x = p[0] * b[0] + p[1] * b[1] + p[2] * b[2];
                        let y = continue_y(&self.curve.roots, yc, cen, x);
                        let val = f(&SurfacePoint { x: SpherePoint::Finite(x), y, vertex: None });
                        if !val.is_finite_value() {
                            return Err(MeshError::SingularValue(tri[a0]));
                        }
                        acc = acc + val * (w * area * density_x(&self.curve, x) * scale);
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Plain-text dump: vertices, triangles and marked points.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# genus {} resolution {}", self.genus(), self.resolution);
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            let (re, im) = match v.x {
                SpherePoint::Finite(z) => (format!("{:.12e}", z.re), format!("{:.12e}", z.im)),
                SpherePoint::Infinity => ("inf".to_string(), "inf".to_string()),
            };
            let _ = writeln!(s, "{i} {re} {im} {} {} {:.12e}", v.sheet, v.chart, self.mu_weights[i]);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for (t, ch) in self.triangles.iter().zip(&self.triangle_charts) {
            let _ = writeln!(s, "{} {} {} {ch}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "marked {}", self.marked.len());
        for (i, v) in self.marked.iter().enumerate() {
            let _ = writeln!(s, "{} {v}", i + 1);
        }
        s
    }
}

/// Values that can report whether they are finite.
pub trait FiniteCheck {
    fn is_finite_value(&self) -> bool;
}

impl FiniteCheck for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl FiniteCheck for Complex64 {
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// `ρ` against `dA_x`, switching to the `w` form far out.
fn density_x(cd: &CurveData, x: Complex64) -> f64 {
    if x.norm() <= 1.0 {
        cd.density_numerator(x) / cd.abs_y_sqr(x)
    } else {
        let w = 1.0 / x;
        let d: f64 = cd.roots.iter().map(|&a| (c(1.0, 0.0) - a * w).norm()).product();
        w.norm_sqr().powi(2) * cd.density_numerator_at_infinity(w) / d
    }
}

/// `x^{a-1} conj(x^{b-1}) / |y|²` against `dA_x`, row-major `h × h`.
fn naive_kernel(cd: &CurveData, x: Complex64, out: &mut [Complex64]) {
    let h = cd.genus();
    let (nu, scale) = if x.norm() <= 1.0 {
        (cd.naive_numerators(x), 1.0 / cd.abs_y_sqr(x))
    } else {
        let w = 1.0 / x;
        let mut v = cd.naive_numerators(w);
        v.reverse();
        let d: f64 = cd.roots.iter().map(|&a| (c(1.0, 0.0) - a * w).norm()).product();
        (v, w.norm_sqr().powi(2) / d)
    };
    for a in 0..h {
        for b in 0..h {
            out[a * h + b] = nu[a] * nu[b].conj() * scale;
        }
    }
}

/// Quadrature points `(x, barycentric, weight·dA)` for a finite base triangle.
fn finite_rule(p: [Complex64; 3], roots: &[Complex64], branch_corner: Option<usize>) -> Vec<(Complex64, [f64; 3], f64)> {
    let area = signed_area(p).abs();
    let mut out = Vec::new();
    if let Some(a0) = branch_corner {
        for (b, w) in duffy_rule(10) {
            let mut bary = [0.0; 3];
            for a in 0..3 {
                bary[(a0 + a) % 3] = b[a];
            }
            let x = p[0] * bary[0] + p[1] * bary[1] + p[2] * bary[2];
            out.push((x, bary, w * area));
        }
        return out;
    }
    // subdivide until small relative to the distance to the nearest root
    let mut stack = vec![([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], 0usize)];
    while let Some((sub, depth)) = stack.pop() {
        let pts = sub.map(|b| p[0] * b[0] + p[1] * b[1] + p[2] * b[2]);
        let cen = (pts[0] + pts[1] + pts[2]) / 3.0;
        let diam = (pts[0] - pts[1]).norm().max((pts[1] - pts[2]).norm()).max((pts[2] - pts[0]).norm());
        let dist = roots.iter().map(|&a| (cen - a).norm()).fold(f64::INFINITY, f64::min);
        if diam > 0.25 * dist && depth < 6 {
            let mid = |i: usize, j: usize| [0, 1, 2].map(|k| 0.5 * (sub[i][k] + sub[j][k]));
            let (m01, m12, m20) = (mid(0, 1), mid(1, 2), mid(2, 0));
            stack.push(([sub[0], m01, m20], depth + 1));
            stack.push(([m01, sub[1], m12], depth + 1));
            stack.push(([m20, m12, sub[2]], depth + 1));
            stack.push(([m01, m12, m20], depth + 1));
            continue;
        }
        let sub_area = area / 4f64.powi(depth as i32);
        for (b, w) in DUNAVANT7 {
            let bary = [0, 1, 2].map(|k| b[0] * sub[0][k] + b[1] * sub[1][k] + b[2] * sub[2][k]);
            let x = p[0] * bary[0] + p[1] * bary[1] + p[2] * bary[2];
            out.push((x, bary, w * sub_area));
        }
    }
    out
}

/// Quadrature over the unbounded region beyond the hull edge `p q`, swept
/// by rays from the origin and parametrized by the angle fraction `u` and
/// `s = r_edge/r`. Corner weights `(s(1-u), s u, 1-s)` form a nonnegative
/// partition of unity.
fn infinity_rule(p: Complex64, q: Complex64) -> Vec<(Complex64, [f64; 3], f64)> {
    let g = gauss_legendre_unit(12);
    let dtheta = (q / p).arg();
    let th0 = p.arg();
    let mut out = Vec::with_capacity(g.len() * g.len());
    for &(u, wu) in &g {
        let e = Complex64::from_polar(1.0, th0 + u * dtheta);
        let lam = -(e.conj() * p).im / (e.conj() * (q - p)).im;
        let rseg = (e.conj() * (p + (q - p) * lam)).re;
        for &(s, ws) in &g {
            let x = e * (rseg / s);
            let bary = [s * (1.0 - u), s * u, 1.0 - s];
            out.push((x, bary, wu * ws * dtheta.abs() * rseg * rseg / (s * s * s)));
        }
    }
    out
}

/// Build the surface mesh at the given resolution (roughly `R²` triangles
/// per sheet).
pub fn build_mesh(curve: &CurveData, resolution: usize) -> Result<SurfaceMesh, MeshError> {
    if resolution < 8 {
        return Err(MeshError::ResolutionTooLow(resolution));
    }
    let h = curve.genus();
    let roots = curve.roots.clone();
    let nb = roots.len();
    let sizing = Sizing::for_resolution(resolution);
    let cloud = place_points(&roots, &sizing);
    let disks = cloud.disks.clone();
    let pts = cloud.points;
    let inf = pts.len();

    let input: Vec<Point2<f64>> = pts.iter().map(|z| Point2::new(z.re, z.im)).collect();
    let dt = DelaunayTriangulation::<Point2<f64>>::bulk_load_stable(input)
        .map_err(|e| MeshError::Triangulation(format!("{e:?}")))?;
    if dt.num_vertices() != pts.len() {
        return Err(MeshError::Triangulation("duplicate points".into()));
    }

    let mut base_tris: Vec<[usize; 3]> = Vec::new();
    let mut directed: HashMap<(usize, usize), ()> = HashMap::new();
    for f in dt.inner_faces() {
        let v = f.vertices().map(|v| v.fix().index());
        base_tris.push(v);
        for a in 0..3 {
            directed.insert((v[a], v[(a + 1) % 3]), ());
        }
    }
    let mut hull = Vec::new();
    for &(a, b) in directed.keys() {
        if !directed.contains_key(&(b, a)) {
            hull.push([b, a, inf]);
        }
    }
    hull.sort();
    base_tris.extend(hull);

    let sheet_y0: Vec<Complex64> = pts.iter().map(|&x| principal_y(&roots, x)).collect();
    let big_y0 = |v: usize| -> Complex64 {
        if v == inf {
            c(1.0, 0.0)
        } else {
            sheet_y0[v] * (1.0 / pts[v]).powu(h as u32 + 1)
        }
    };
    let base_x = |v: usize| if v == inf { SpherePoint::Infinity } else { SpherePoint::Finite(pts[v]) };
    let vertex_chart = |v: usize| -> Chart {
        if v == inf || pts[v].norm() > 1.0 + 1e-12 {
            return Chart::Infinity;
        }
        for (i, d) in disks.iter().enumerate() {
            if d.contains(pts[v]) {
                return Chart::Branch(i);
            }
        }
        Chart::Plane
    };

    // surface vertices
    let mut vertices = Vec::new();
    let mut lifts = vec![[0usize; 2]; inf + 1];
    for v in 0..=inf {
        let chart = vertex_chart(v);
        let y0 = if v == inf { c(1.0, 0.0) } else { sheet_y0[v] };
        if v < nb {
            lifts[v] = [vertices.len(); 2];
            vertices.push(SurfaceVertex { x: base_x(v), y: y0, sheet: 0, chart, base: v });
        } else {
            lifts[v] = [vertices.len(), vertices.len() + 1];
            vertices.push(SurfaceVertex { x: base_x(v), y: y0, sheet: 0, chart, base: v });
            vertices.push(SurfaceVertex { x: base_x(v), y: -y0, sheet: 1, chart, base: v });
        }
    }
    let marked: Vec<usize> = (0..nb).map(|i| lifts[i][0]).collect();

    let mut charts = Vec::with_capacity(base_tris.len());
    let mut centroid_y = Vec::with_capacity(base_tris.len());
    let mut corner_sheet = Vec::with_capacity(base_tris.len());
    for tri in &base_tris {
        let nbranch = tri.iter().filter(|&&v| v < nb).count();
        if nbranch > 1 {
            return Err(MeshError::ResolutionTooLow(resolution));
        }
        let chart = if tri.iter().any(|&v| vertex_chart(v) == Chart::Infinity) {
            Chart::Infinity
        } else if let Some(i) = (0..nb).find(|&i| tri.iter().all(|&v| disks[i].contains(pts[v]))) {
            Chart::Branch(i)
        } else {
            Chart::Plane
        };
        if nbranch == 1 && !matches!(chart, Chart::Branch(_)) {
            return Err(MeshError::ResolutionTooLow(resolution));
        }
        let mut sheets = [0u8; 3];
        let yc;
        if chart == Chart::Infinity {
            let ws = tri.map(|v| if v == inf { c(0.0, 0.0) } else { 1.0 / pts[v] });
            let cw = (ws[0] + ws[1] + ws[2]) / 3.0;
            let big = roots.iter().map(|&a| (c(1.0, 0.0) - a * cw).sqrt()).product::<Complex64>();
            for a in 0..3 {
                let yv = continue_big_y(&roots, big, cw, ws[a]);
                let y0 = big_y0(tri[a]);
                sheets[a] = pick_sheet(yv, y0)?;
            }
            // x-centroid value of y on lift 0, aligned through the first corner
            yc = if tri.contains(&inf) {
                c(f64::NAN, 0.0)
            } else {
                let cx = (pts[tri[0]] + pts[tri[1]] + pts[tri[2]]) / 3.0;
                let y = principal_y(&roots, cx);
                let yv = continue_y(&roots, y, cx, pts[tri[0]]);
                let target = if sheets[0] == 0 { sheet_y0[tri[0]] } else { -sheet_y0[tri[0]] };
                if (yv - target).norm() < (yv + target).norm() {
                    y
                } else {
                    -y
                }
            };
        } else {
            let px = tri.map(|v| pts[v]);
            let cen = (px[0] + px[1] + px[2]) / 3.0;
            yc = principal_y(&roots, cen);
            for a in 0..3 {
                if tri[a] < nb {
                    continue;
                }
                let yv = continue_y(&roots, yc, cen, px[a]);
                sheets[a] = pick_sheet(yv, sheet_y0[tri[a]])?;
            }
        }
        charts.push(chart);
        centroid_y.push(yc);
        corner_sheet.push(sheets);
    }

    // surface triangles and chart geometry
    let tfac: Vec<Complex64> = (0..nb).map(|i| {
        roots.iter().enumerate().filter(|&(r, _)| r != i).map(|(_, &a)| (roots[i] - a).sqrt()).product()
    }).collect();
    let branch_f = |i: usize, x: Complex64| -> Complex64 {
        tfac[i] * roots.iter().enumerate().filter(|&(r, _)| r != i)
            .map(|(_, &a)| ((x - a) / (roots[i] - a)).sqrt()).product::<Complex64>()
    };
    let mut triangles = Vec::with_capacity(2 * base_tris.len());
    let mut triangle_charts = Vec::with_capacity(2 * base_tris.len());
    let mut chart_coords = Vec::with_capacity(2 * base_tris.len());
    let mut cots = Vec::with_capacity(2 * base_tris.len());
    for (k, tri) in base_tris.iter().enumerate() {
        for lift in 0..2u8 {
            let sv = [0, 1, 2].map(|a| lifts[tri[a]][(corner_sheet[k][a] ^ lift) as usize]);
            let coords = match charts[k] {
                Chart::Plane => tri.map(|v| pts[v]),
                Chart::Infinity => tri.map(|v| if v == inf { c(0.0, 0.0) } else { 1.0 / pts[v] }),
                Chart::Branch(i) => sv.map(|s| {
                    let vert = &vertices[s];
                    if vert.base < nb {
                        c(0.0, 0.0)
                    } else {
                        let x = pts[vert.base];
                        vert.y / branch_f(i, x)
                    }
                }),
            };
            let area = signed_area(coords);
            if !(area > 0.0) {
                return Err(MeshError::Triangulation(format!(
                    "triangle {k} lift {lift} has non-positive area {area:e} in chart {}",
                    charts[k]
                )));
            }
            triangles.push(sv);
            triangle_charts.push(charts[k]);
            chart_coords.push(coords);
            cots.push(cotangents(coords));
        }
    }

    // mass and naive Gram moments per corner
    let hh = h * h;
    let mut corner_mass = Vec::with_capacity(base_tris.len());
    let mut gram_weights = vec![vec![c(0.0, 0.0); hh]; vertices.len()];
    let mut kern = vec![c(0.0, 0.0); hh];
    let ortho = &curve.ortho;
    for (k, tri) in base_tris.iter().enumerate() {
        let rule = if tri[2] == inf {
            infinity_rule(pts[tri[0]], pts[tri[1]])
        } else {
            let px = tri.map(|v| pts[v]);
            finite_rule(px, &roots, (0..3).find(|&a| tri[a] < nb))
        };
        let mut moments = [vec![c(0.0, 0.0); hh], vec![c(0.0, 0.0); hh], vec![c(0.0, 0.0); hh]];
        for (x, bary, w) in rule {
            naive_kernel(curve, x, &mut kern);
            for a in 0..3 {
                let f = bary[a] * w;
                for (m, kv) in moments[a].iter_mut().zip(&kern) {
                    *m += kv * f;
                }
            }
        }
        let mut mass = [0.0; 3];
        for a in 0..3 {
            let n = DMatrix::from_row_slice(h, h, &moments[a]);
            // (1/h) tr(Cᵀ N C̄)
            let t = ortho.transpose() * n * ortho.map(|z| z.conj());
            mass[a] = t.trace().re / h as f64;
            for lift in 0..2u8 {
                let s = lifts[tri[a]][(corner_sheet[k][a] ^ lift) as usize];
                for (g, m) in gram_weights[s].iter_mut().zip(&moments[a]) {
                    *g += m;
                }
            }
        }
        corner_mass.push(mass);
    }
    let mut mu_raw = vec![0.0; vertices.len()];
    for (k, tri) in base_tris.iter().enumerate() {
        for a in 0..3 {
            for lift in 0..2u8 {
                let s = lifts[tri[a]][(corner_sheet[k][a] ^ lift) as usize];
                mu_raw[s] += corner_mass[k][a];
            }
        }
    }
    let raw_mass: f64 = mu_raw.iter().sum();
    let mu_weights = mu_raw.iter().map(|m| m / raw_mass).collect();

    Ok(SurfaceMesh {
        curve: curve.clone(),
        resolution,
        vertices,
        triangles,
        triangle_charts,
        chart_coords,
        cotangents: cots,
        mu_weights,
        raw_mass,
        gram_weights,
        marked,
        disks,
        base: BaseData {
            points: pts,
            triangles: base_tris,
            centroid_y,
            corner_mass,
            lifts,
        },
    })
}

fn pick_sheet(y: Complex64, y0: Complex64) -> Result<u8, MeshError> {
    let (d0, d1) = ((y - y0).norm(), (y + y0).norm());
    if d0.min(d1) > 0.5 * d0.max(d1) {
        return Err(MeshError::Triangulation("ambiguous sheet continuation".into()));
    }
    Ok(if d0 <= d1 { 0 } else { 1 })
}

#[cfg(test)]
mod tests;
