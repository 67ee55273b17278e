//! Vertex placement on the base sphere.

use std::f64::consts::PI;

use num_complex::Complex64;

/// A disk around a branch point meshed in the local coordinate `t = √(x-α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDisk {
    pub center: Complex64,
    /// Radius in `x`.
    pub radius: f64,
    /// Number of rings of constant `|t|`.
    pub rings: usize,
}

impl BranchDisk {
    pub fn t_radius(&self) -> f64 {
        self.radius.sqrt()
    }

    pub fn contains(&self, x: Complex64) -> bool {
        (x - self.center).norm() <= self.radius * (1.0 + 1e-9)
    }
}

/// Finite base points in `x` and the branch disks. The first entries are the
/// branch points themselves, in branch order.
pub struct PointCloud {
    pub points: Vec<Complex64>,
    pub disks: Vec<BranchDisk>,
}

pub struct Sizing {
    /// Spacing away from the branch points.
    pub h0: f64,
    /// Spacing grows like `kappa · distance` near the branch points.
    pub kappa: f64,
}

impl Sizing {
    pub fn for_resolution(resolution: usize) -> Sizing {
        let r = resolution as f64;
        Sizing { h0: (4.0 * PI).sqrt() / r, kappa: (5.0 / r).min(0.3) }
    }

    fn at(&self, d: f64) -> f64 {
        self.h0.min(self.kappa * d)
    }
}

fn nearest(roots: &[Complex64], x: Complex64) -> f64 {
    roots.iter().map(|&a| (x - a).norm()).fold(f64::INFINITY, f64::min)
}

pub fn branch_disks(roots: &[Complex64], sizing: &Sizing) -> Vec<BranchDisk> {
    roots
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let sep = roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &b)| (a - b).norm())
                .fold(f64::INFINITY, f64::min);
            let radius = (sep / 3.0).min(0.6 * (1.0 - a.norm()));
            let rings = ((2.0 * radius / sizing.at(radius)).ceil() as usize).max(6);
            BranchDisk { center: a, radius, rings }
        })
        .collect()
}

fn quadtree(
    half: f64,
    sizing: impl Fn(Complex64, f64) -> Option<f64>,
    accept: &mut impl FnMut(Complex64),
) {
    let mut stack = vec![(Complex64::new(0.0, 0.0), half, 0usize)];
    while let Some((c, s, depth)) = stack.pop() {
        let Some(h) = sizing(c, s) else { continue };
        if 2.0 * s > h * (1.0 + 1e-9) && depth < 30 {
            let q = 0.5 * s;
            for (dx, dy) in [(-q, -q), (q, -q), (-q, q), (q, q)] {
                stack.push((c + Complex64::new(dx, dy), q, depth + 1));
            }
        } else {
            accept(c);
        }
    }
}

/// Root half-width so that uniform leaves have side exactly `h0`.
fn root_half(h0: f64) -> f64 {
    let levels = (2.0 / h0).log2().ceil().max(0.0) as i32;
    0.5 * h0 * 2f64.powi(levels)
}

pub fn place_points(roots: &[Complex64], sizing: &Sizing) -> PointCloud {
    let disks = branch_disks(roots, sizing);
    let h0 = sizing.h0;
    let mut points: Vec<Complex64> = roots.to_vec();

    for d in &disks {
        let tr = d.t_radius();
        for k in 1..=d.rings {
            let t = tr * k as f64 / d.rings as f64;
            let m = ((PI * k as f64).round() as usize).max(3);
            let offset = if k % 2 == 1 { 0.0 } else { PI / m as f64 };
            for j in 0..m {
                let theta = offset + 2.0 * PI * j as f64 / m as f64;
                points.push(d.center + Complex64::from_polar(t * t, theta));
            }
        }
    }

    // inside the unit circle of x
    let half = root_half(h0);
    let cell_sizing = |c: Complex64, s: f64| -> Option<f64> {
        let diag = s * 2f64.sqrt();
        if c.norm() - diag > 1.0 {
            return None;
        }
        for d in &disks {
            if (c - d.center).norm() + diag < d.radius {
                return None;
            }
        }
        let dist = (nearest(roots, c) - diag).max(0.0);
        Some(sizing.at(dist))
    };
    let mut accept_inner = |c: Complex64| {
        let h = sizing.at(nearest(roots, c));
        if c.norm() > 1.0 - 0.5 * h0 {
            return;
        }
        for d in &disks {
            if (c - d.center).norm() < d.radius + 0.5 * h {
                return;
            }
        }
        points.push(c);
    };
    quadtree(half, cell_sizing, &mut accept_inner);

    // seam on the unit circle
    let ns = ((2.0 * PI / h0).ceil() as usize).max(8);
    for j in 0..ns {
        points.push(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / ns as f64));
    }

    // inside the unit circle of w = 1/x, excluding w = 0 (the vertex at infinity)
    let outer_sizing = |c: Complex64, s: f64| -> Option<f64> {
        if c.norm() - s * 2f64.sqrt() > 1.0 {
            None
        } else {
            Some(h0)
        }
    };
    let mut accept_outer = |w: Complex64| {
        let r = w.norm();
        if r > 1.0 - 0.5 * h0 || r < 0.5 * h0 {
            return;
        }
        points.push(1.0 / w);
    };
    quadtree(half, outer_sizing, &mut accept_outer);

    PointCloud { points, disks }
}
