//! Curve and degeneration-family files.
//!
//! A curve file is JSON:
//!
//! ```json
//! { "genus": 2, "branch_points": [[1.0, 0.0], [0.309, 0.951], "inf", ...] }
//! ```
//!
//! A family file adds `t_values` and the two clusters as 1-based index
//! lists into `branch_points`. The points of `left_cluster` are scaled by
//! `t` around `center` (default `[0, 0]`); the rest stay put.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branch::{BranchError, BranchSet, SpherePoint, NEAR_COINCIDENT_REL};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Branch(#[from] BranchError),
}

fn read_text(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io { path: path.display().to_string(), source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub genus: usize,
    pub branch_points: Vec<SpherePoint>,
}

impl CurveSpec {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, InputError> {
        Self::from_json(&read_text(path.as_ref())?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve spec serializes")
    }

    pub fn branch_set(&self) -> Result<BranchSet, InputError> {
        Ok(BranchSet::new(self.branch_points.clone(), self.genus)?)
    }
}

impl From<&BranchSet> for CurveSpec {
    fn from(bs: &BranchSet) -> Self {
        CurveSpec { genus: bs.genus(), branch_points: bs.points().to_vec() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    genus: usize,
    branch_points: Vec<SpherePoint>,
    t_values: Vec<f64>,
    left_cluster: Vec<usize>,
    right_cluster: Vec<usize>,
    #[serde(default)]
    center: Option<[f64; 2]>,
}

/// Branch sets `M_t` collapsing onto a stable curve with components of genus
/// `h1` and `h2`. Indices are 0-based here.
#[derive(Debug, Clone)]
pub struct DegenerationFamily {
    pub genus: usize,
    pub base_points: Vec<SpherePoint>,
    pub left_cluster: Vec<usize>,
    pub right_cluster: Vec<usize>,
    pub center: Complex64,
    pub t_values: Vec<f64>,
    pub h1: usize,
    pub h2: usize,
}

impl DegenerationFamily {
    pub fn new(
        genus: usize,
        base_points: Vec<SpherePoint>,
        left_cluster: Vec<usize>,
        right_cluster: Vec<usize>,
        center: Complex64,
        t_values: Vec<f64>,
    ) -> Result<Self, InputError> {
        let n = base_points.len();
        if n != 2 * genus + 2 {
            return Err(InputError::Invalid(format!("genus {genus} needs {} branch points, got {n}", 2 * genus + 2)));
        }
        let mut seen = vec![false; n];
        for &i in left_cluster.iter().chain(&right_cluster) {
            if i >= n || seen[i] {
                return Err(InputError::Invalid("clusters must partition the branch points".into()));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(InputError::Invalid("clusters must partition the branch points".into()));
        }
        let (l, r) = (left_cluster.len(), right_cluster.len());
        if l % 2 == 0 || r % 2 == 0 || l < 3 || r < 3 {
            return Err(InputError::Invalid(format!("cluster sizes must be 2h₁+1 and 2h₂+1 with h₁, h₂ ≥ 1, got {l} and {r}")));
        }
        if left_cluster.iter().any(|&i| base_points[i].is_infinite()) {
            return Err(InputError::Invalid("the scaled cluster cannot contain ∞".into()));
        }
        if t_values.is_empty() {
            return Err(InputError::Invalid("t_values is empty".into()));
        }
        if t_values.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(InputError::Invalid("t_values must be strictly decreasing".into()));
        }
        if t_values.iter().any(|&t| !(t.is_finite() && t > NEAR_COINCIDENT_REL)) {
            return Err(InputError::Invalid("t_values must be finite and above the near-coincidence threshold".into()));
        }
        let family = DegenerationFamily {
            genus,
            base_points,
            left_cluster,
            right_cluster,
            center,
            t_values,
            h1: (l - 1) / 2,
            h2: (r - 1) / 2,
        };
        for &t in &family.t_values {
            family.member(t)?;
        }
        Ok(family)
    }

    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let f: FamilyFile = serde_json::from_str(text)?;
        let zero_based = |v: Vec<usize>| -> Result<Vec<usize>, InputError> {
            v.into_iter()
                .map(|i| i.checked_sub(1).ok_or_else(|| InputError::Invalid("cluster indices are 1-based".into())))
                .collect()
        };
        let center = f.center.map_or(Complex64::new(0.0, 0.0), |[re, im]| Complex64::new(re, im));
        Self::new(f.genus, f.branch_points, zero_based(f.left_cluster)?, zero_based(f.right_cluster)?, center, f.t_values)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, InputError> {
        Self::from_json(&read_text(path.as_ref())?)
    }

    /// The branch set at parameter `t`.
    pub fn member(&self, t: f64) -> Result<BranchSet, InputError> {
        let mut pts = self.base_points.clone();
        for &i in &self.left_cluster {
            if let SpherePoint::Finite(z) = pts[i] {
                pts[i] = SpherePoint::Finite(self.center + (z - self.center) * t);
            }
        }
        Ok(BranchSet::new(pts, self.genus)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_round_trip() {
        let text = r#"{ "genus": 1, "branch_points": [[0, 0], [1, 0], [0.5, 2], "inf"] }"#;
        let spec = CurveSpec::from_json(text).unwrap();
        assert_eq!(spec.branch_points[3], SpherePoint::Infinity);
        assert_eq!(spec.branch_points[2], SpherePoint::finite(0.5, 2.0));
        let again = CurveSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, again);
        spec.branch_set().unwrap();
    }

    #[test]
    fn malformed_curves_rejected() {
        assert!(matches!(CurveSpec::from_json("{ \"genus\": 1 }"), Err(InputError::Parse(_))));
        assert!(CurveSpec::from_json(r#"{ "genus": 1, "branch_points": [[0, 0], "nowhere"] }"#).is_err());
        let short = CurveSpec::from_json(r#"{ "genus": 2, "branch_points": [[0, 0], [1, 0], [2, 0], "inf"] }"#).unwrap();
        assert!(matches!(short.branch_set(), Err(InputError::Branch(_))));
    }

    #[test]
    fn family_members_scale_the_left_cluster() {
        let text = r#"{
            "genus": 2,
            "branch_points": [[1, 0], [-0.5, 0.8], [-0.4, -0.9], [2, 0.3], [-1, 1.7], "inf"],
            "left_cluster": [1, 2, 3],
            "right_cluster": [4, 5, 6],
            "t_values": [0.1, 0.01]
        }"#;
        let fam = DegenerationFamily::from_json(text).unwrap();
        assert_eq!((fam.h1, fam.h2), (1, 1));
        let m = fam.member(0.01).unwrap();
        assert_eq!(m.point(0), SpherePoint::finite(0.01, 0.0));
        assert_eq!(m.point(3), SpherePoint::finite(2.0, 0.3));
        let bad = text.replace("[0.1, 0.01]", "[0.01, 0.1]");
        assert!(DegenerationFamily::from_json(&bad).is_err());
        let overlap = text.replace("[4, 5, 6]", "[3, 5, 6]");
        assert!(DegenerationFamily::from_json(&overlap).is_err());
    }
}
