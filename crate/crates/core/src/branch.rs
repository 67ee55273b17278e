//! Branch configurations on the Riemann sphere and their Möbius-invariant
//! algebra: the pair discriminant `δ_ij`, its ratios `η_ijk`, cross-ratios
//! and the pair normalization that realizes `δ_ij` as a discriminant.
//!
//! Indices are 0-based throughout the library. Reports and the CLI print
//! them 1-based.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative separation below which two branch points count as coincident.
pub const NEAR_COINCIDENT_REL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchError {
    #[error("branch points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("branch points {0} and {1} are closer than the coincidence threshold")]
    NearCoincident(usize, usize),
    #[error("expected {expected} branch points for genus {genus}, got {got}")]
    WrongCount {
        genus: usize,
        expected: usize,
        got: usize,
    },
    #[error("more than one branch point at infinity")]
    MultipleInfinities,
    #[error("genus must be at least 1")]
    ZeroGenus,
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("indices must differ")]
    EqualIndices,
    #[error("indices must be pairwise distinct")]
    RepeatedIndices,
    #[error("degenerate Möbius map (ad - bc = 0)")]
    DegenerateMap,
}

/// A point of the Riemann sphere. Serialized as `[re, im]` or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SpherePointRepr {
    Finite([f64; 2]),
    Tag(String),
}

impl Serialize for SpherePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            SpherePoint::Finite(z) => SpherePointRepr::Finite([z.re, z.im]),
            SpherePoint::Infinity => SpherePointRepr::Tag("inf".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match SpherePointRepr::deserialize(d)? {
            SpherePointRepr::Finite([re, im]) if re.is_finite() && im.is_finite() => Ok(SpherePoint::finite(re, im)),
            SpherePointRepr::Finite(_) => Err(serde::de::Error::custom("branch point coordinates must be finite")),
            SpherePointRepr::Tag(t) if t == "inf" || t == "infinity" => Ok(SpherePoint::Infinity),
            SpherePointRepr::Tag(t) => Err(serde::de::Error::custom(format!("unknown point `{t}`, expected [re, im] or \"inf\""))),
        }
    }
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::Finite(z)
    }
}

/// The `2h+2` branch points of a hyperelliptic curve `y² = ∏(x - α_r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSet {
    points: Vec<SpherePoint>,
    genus: usize,
}

impl BranchSet {
    /// Checks count, distinctness and separation of the points.
    pub fn new(points: Vec<SpherePoint>, genus: usize) -> Result<Self, BranchError> {
        if genus == 0 {
            return Err(BranchError::ZeroGenus);
        }
        let expected = 2 * genus + 2;
        if points.len() != expected {
            return Err(BranchError::WrongCount {
                genus,
                expected,
                got: points.len(),
            });
        }
        if points.iter().filter(|p| p.is_infinite()).count() > 1 {
            return Err(BranchError::MultipleInfinities);
        }
        let scale = points
            .iter()
            .filter_map(|p| p.as_finite())
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        for r in 0..points.len() {
            for s in r + 1..points.len() {
                if let (Some(a), Some(b)) = (points[r].as_finite(), points[s].as_finite()) {
                    if a == b {
                        return Err(BranchError::DuplicatePoint(r, s));
                    }
                    if (a - b).norm() < NEAR_COINCIDENT_REL * scale {
                        return Err(BranchError::NearCoincident(r, s));
                    }
                }
            }
        }
        Ok(BranchSet { points, genus })
    }

    /// Convenience constructor from finite points; the genus is inferred.
    pub fn from_finite(points: &[Complex64]) -> Result<Self, BranchError> {
        let n = points.len();
        if n < 4 || n % 2 != 0 {
            return Err(BranchError::WrongCount {
                genus: n.saturating_sub(2) / 2,
                expected: 2 * (n.saturating_sub(2) / 2).max(1) + 2,
                got: n,
            });
        }
        Self::new(points.iter().map(|&z| z.into()).collect(), (n - 2) / 2)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> SpherePoint {
        self.points[i]
    }

    pub fn infinity_index(&self) -> Option<usize> {
        self.points.iter().position(|p| p.is_infinite())
    }

    /// All points as finite complex numbers, or `None` if one is infinite.
    pub fn finite_points(&self) -> Option<Vec<Complex64>> {
        self.points.iter().map(|p| p.as_finite()).collect()
    }

    fn check(&self, idx: &[usize]) -> Result<(), BranchError> {
        for &i in idx {
            if i >= self.len() {
                return Err(BranchError::IndexOutOfRange(i));
            }
        }
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                if idx[a] == idx[b] {
                    return Err(if idx.len() == 2 {
                        BranchError::EqualIndices
                    } else {
                        BranchError::RepeatedIndices
                    });
                }
            }
        }
        Ok(())
    }

    /// `log δ_ij` as a complex logarithm (imaginary part only meaningful mod 2π).
    ///
    /// Every factor is accumulated as a logarithm so large exponents and
    /// widely spread points do not overflow. Differences involving the
    /// point at infinity are dropped.
    pub fn log_delta(&self, i: usize, j: usize) -> Result<Complex64, BranchError> {
        self.check(&[i, j])?;
        let h = self.genus as f64;
        let lead = 2.0 * h * (2.0 * h + 1.0);
        let side = 2.0 * h + 1.0;
        let diff = |r: usize, s: usize| -> Option<Complex64> {
            match (self.points[r], self.points[s]) {
                (SpherePoint::Finite(a), SpherePoint::Finite(b)) => Some((a - b).ln()),
                _ => None,
            }
        };
        let mut acc = Complex64::new(0.0, 0.0);
        if let Some(l) = diff(i, j) {
            acc += lead * l;
        }
        let n = self.len();
        for r in 0..n {
            for s in 0..n {
                if r != s {
                    if let Some(l) = diff(r, s) {
                        acc += l;
                    }
                }
            }
        }
        for r in 0..n {
            if r != i {
                if let Some(l) = diff(i, r) {
                    acc -= side * l;
                }
            }
            if r != j {
                if let Some(l) = diff(j, r) {
                    acc -= side * l;
                }
            }
        }
        Ok(acc)
    }

    pub fn delta(&self, i: usize, j: usize) -> Result<Complex64, BranchError> {
        Ok(self.log_delta(i, j)?.exp())
    }

    /// `δ_ij` as the limit of the all-finite formula when a point tends to
    /// infinity. The ordered product then contributes `(-1)^{2h+1}` that the
    /// rule of dropping infinite differences loses, so this is `-δ_ij` when
    /// infinity is a branch point other than `α_i`, `α_j`, and `δ_ij`
    /// otherwise. Unlike [`delta`](Self::delta) it is exactly invariant
    /// under every Möbius map.
    pub fn delta_invariant(&self, i: usize, j: usize) -> Result<Complex64, BranchError> {
        let d = self.delta(i, j)?;
        let flip = self
            .points
            .iter()
            .enumerate()
            .any(|(r, p)| p.is_infinite() && r != i && r != j);
        Ok(if flip { -d } else { d })
    }

    pub fn log_abs_delta(&self, i: usize, j: usize) -> Result<f64, BranchError> {
        Ok(self.log_delta(i, j)?.re)
    }

    /// `η_ijk = δ_ik / δ_jk`.
    pub fn eta(&self, i: usize, j: usize, k: usize) -> Result<Complex64, BranchError> {
        self.check(&[i, j, k])?;
        Ok((self.log_delta(i, k)? - self.log_delta(j, k)?).exp())
    }

    /// Cross ratio `(α_i-α_k)(α_j-α_r) / ((α_j-α_k)(α_i-α_r))`.
    ///
    /// Each point occurs once upstairs and once downstairs, so the two
    /// factors containing an infinite point cancel to 1.
    pub fn cross_ratio(
        &self,
        i: usize,
        j: usize,
        k: usize,
        r: usize,
    ) -> Result<Complex64, BranchError> {
        self.check(&[i, j, k, r])?;
        let p = &self.points;
        let term = |a: usize, b: usize| -> Complex64 {
            match (p[a], p[b]) {
                (SpherePoint::Finite(x), SpherePoint::Finite(y)) => x - y,
                _ => Complex64::new(1.0, 0.0),
            }
        };
        Ok(term(i, k) * term(j, r) / (term(j, k) * term(i, r)))
    }

    pub fn apply_mobius(&self, m: &MobiusMap) -> BranchSet {
        let points = self.points.iter().map(|&p| m.apply(p)).collect();
        // Möbius maps are bijections of the sphere, so the invariants persist.
        BranchSet {
            points,
            genus: self.genus,
        }
    }

    /// Möbius-equivalent set with `α_i = 0`, `α_j = ∞` and the remaining
    /// `2h` points of product one.
    pub fn normalize_pair(&self, i: usize, j: usize) -> Result<PairNormalization, BranchError> {
        self.check(&[i, j])?;
        let send = match (self.points[i], self.points[j]) {
            (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
                MobiusMap::new(Complex64::new(1.0, 0.0), -a, Complex64::new(1.0, 0.0), -b)?
            }
            (SpherePoint::Finite(a), SpherePoint::Infinity) => MobiusMap::new(
                Complex64::new(1.0, 0.0),
                -a,
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            )?,
            (SpherePoint::Infinity, SpherePoint::Finite(b)) => MobiusMap::new(
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                -b,
            )?,
            (SpherePoint::Infinity, SpherePoint::Infinity) => unreachable!(),
        };
        let moved = self.apply_mobius(&send);
        let log_prod: Complex64 = (0..self.len())
            .filter(|&r| r != i && r != j)
            .map(|r| moved.points[r].as_finite().expect("only α_j is infinite").ln())
            .sum();
        let scale = (-log_prod / (2.0 * self.genus as f64)).exp();
        let scaling = MobiusMap::new(
            scale,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )?;
        let map = scaling.compose(&send);
        let mut normalized = moved.apply_mobius(&scaling);
        normalized.points[i] = SpherePoint::Finite(Complex64::new(0.0, 0.0));
        normalized.points[j] = SpherePoint::Infinity;
        let rest: Vec<Complex64> = (0..self.len())
            .filter(|&r| r != i && r != j)
            .map(|r| normalized.points[r].as_finite().expect("finite"))
            .collect();
        let product: Complex64 = rest.iter().product();
        let mut log_disc = Complex64::new(0.0, 0.0);
        for (a, &za) in rest.iter().enumerate() {
            for (b, &zb) in rest.iter().enumerate() {
                if a != b {
                    log_disc += (za - zb).ln();
                }
            }
        }
        let log_delta = self.log_delta(i, j)?;
        Ok(PairNormalization {
            set: normalized,
            map,
            remaining_product: product,
            discriminant: log_disc.exp(),
            discriminant_over_delta: (log_disc - log_delta).exp(),
        })
    }
}

/// Result of [`BranchSet::normalize_pair`].
#[derive(Debug, Clone)]
pub struct PairNormalization {
    pub set: BranchSet,
    pub map: MobiusMap,
    /// Product of the `2h` points other than `α_i, α_j` (equal to 1).
    pub remaining_product: Complex64,
    /// Ordered-pair discriminant `∏_{r≠s}(β_r - β_s)` of those points.
    pub discriminant: Complex64,
    /// Observed ratio of the discriminant to `δ_ij`.
    pub discriminant_over_delta: Complex64,
}

/// A fractional linear map `z ↦ (az + b)/(cz + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self, BranchError> {
        let det = a * d - b * c;
        let size = a.norm() * d.norm() + b.norm() * c.norm();
        if det.norm() <= 1e-300 || det.norm() <= 1e-14 * size {
            return Err(BranchError::DegenerateMap);
        }
        Ok(MobiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        MobiusMap {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Infinity => {
                if self.c == Complex64::new(0.0, 0.0) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a / self.c)
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den == Complex64::new(0.0, 0.0) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        MobiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basic() -> BranchSet {
        BranchSet::new(
            vec![
                SpherePoint::finite(0.0, 0.0),
                SpherePoint::finite(1.0, 0.0),
                SpherePoint::finite(2.0, 0.0),
                SpherePoint::Infinity,
            ],
            1,
        )
        .unwrap()
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            BranchSet::new(
                vec![
                    SpherePoint::finite(0.0, 0.0),
                    SpherePoint::finite(1.0, 0.0),
                    SpherePoint::finite(1.0, 0.0),
                    SpherePoint::Infinity
                ],
                1
            ),
            Err(BranchError::DuplicatePoint(1, 2))
        ));
        assert!(matches!(
            BranchSet::new(
                vec![
                    SpherePoint::finite(0.0, 0.0),
                    SpherePoint::finite(1.0, 0.0),
                    SpherePoint::Infinity
                ],
                1
            ),
            Err(BranchError::WrongCount { got: 3, .. })
        ));
        assert!(matches!(
            BranchSet::new(
                vec![
                    SpherePoint::finite(0.0, 0.0),
                    SpherePoint::Infinity,
                    SpherePoint::finite(1.0, 0.0),
                    SpherePoint::Infinity
                ],
                1
            ),
            Err(BranchError::MultipleInfinities)
        ));
        assert!(matches!(
            BranchSet::from_finite(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0 + 1e-15, 0.0), c(3.0, 0.0)]),
            Err(BranchError::NearCoincident(1, 2))
        ));
        assert!(basic().delta(0, 0).is_err());
        assert!(matches!(basic().delta(0, 7), Err(BranchError::IndexOutOfRange(7))));
        assert!(matches!(basic().eta(0, 1, 1), Err(BranchError::RepeatedIndices)));
    }

    #[test]
    fn delta_of_basic_set_is_one_half() {
        let d = basic().delta(0, 1).unwrap();
        assert!((d - c(0.5, 0.0)).norm() < 1e-14, "{d}");
    }

    #[test]
    fn cross_ratio_with_infinity() {
        let bs = basic();
        let cr = bs.cross_ratio(0, 1, 2, 3).unwrap();
        assert!((cr - c(2.0, 0.0)).norm() < 1e-15);
        // brute-force limit with a large finite stand-in for ∞
        for big in [1e6, 1e8] {
            let approx = BranchSet::from_finite(&[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(big, 0.0)])
                .unwrap()
                .cross_ratio(0, 1, 2, 3)
                .unwrap();
            assert!((approx - cr).norm() < 10.0 / big);
        }
    }

    #[test]
    fn invariant_delta_is_the_finite_limit() {
        let bs = basic();
        for big in [1e5, 1e7] {
            let approx = BranchSet::from_finite(&[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(big, 0.0)]).unwrap();
            for (i, j) in [(0, 1), (0, 3), (2, 3), (1, 2)] {
                let want = bs.delta_invariant(i, j).unwrap();
                assert!((approx.delta(i, j).unwrap() - want).norm() < 100.0 / big);
            }
        }
        assert!((bs.delta_invariant(0, 1).unwrap() + 0.5).norm() < 1e-15);
        assert!((bs.delta_invariant(0, 3).unwrap() - bs.delta(0, 3).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn eta_definition() {
        let bs = basic();
        let e = bs.eta(0, 1, 2).unwrap();
        let expect = bs.delta(0, 2).unwrap() / bs.delta(1, 2).unwrap();
        assert!((e - expect).norm() < 1e-14);
        assert!((e * bs.eta(1, 0, 2).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn mobius_examples() {
        let bs = basic();
        assert_eq!(bs.apply_mobius(&MobiusMap::identity()), bs);
        let inv = MobiusMap::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let got = bs.apply_mobius(&inv);
        assert_eq!(
            got.points(),
            &[
                SpherePoint::Infinity,
                SpherePoint::finite(1.0, 0.0),
                SpherePoint::finite(0.5, 0.0),
                SpherePoint::finite(0.0, 0.0)
            ]
        );
        let shift = MobiusMap::new(c(1.0, 0.0), c(5.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(
            bs.apply_mobius(&shift).points(),
            &[
                SpherePoint::finite(5.0, 0.0),
                SpherePoint::finite(6.0, 0.0),
                SpherePoint::finite(7.0, 0.0),
                SpherePoint::Infinity
            ]
        );
        assert!(MobiusMap::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)).is_err());
    }

    #[test]
    fn normalize_pair_realizes_delta() {
        let bs = BranchSet::from_finite(&[
            c(0.3, 0.1),
            c(-1.0, 0.4),
            c(2.0, -0.7),
            c(0.5, 1.5),
            c(-0.2, -1.1),
            c(1.3, 0.9),
        ])
        .unwrap();
        let n = bs.normalize_pair(1, 4).unwrap();
        assert_eq!(n.set.point(1), SpherePoint::finite(0.0, 0.0));
        assert_eq!(n.set.point(4), SpherePoint::Infinity);
        assert!((n.remaining_product - 1.0).norm() < 1e-12);
        let d0 = bs.delta(1, 4).unwrap();
        let d1 = n.set.delta(1, 4).unwrap();
        assert!((d1 / d0 - 1.0).norm() < 1e-10);
        assert!((n.discriminant_over_delta - 1.0).norm() < 1e-10);
    }

    fn point_strategy() -> impl Strategy<Value = (f64, f64)> {
        (-3.0..3.0f64, -3.0..3.0f64)
    }

    fn separated(pts: &[(f64, f64)]) -> bool {
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let d = ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
                if d < 0.05 {
                    return false;
                }
            }
        }
        true
    }

    proptest! {
        #[test]
        fn delta_unity_product(h in 1usize..5, raw in prop::collection::vec(point_strategy(), 10), inf in any::<bool>()) {
            let n = 2 * h + 2;
            let pts = &raw[..n];
            prop_assume!(separated(pts));
            let mut sp: Vec<SpherePoint> = pts.iter().map(|&(a, b)| SpherePoint::finite(a, b)).collect();
            if inf { sp[n - 1] = SpherePoint::Infinity; }
            let bs = BranchSet::new(sp, h).unwrap();
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n { if j != i { acc += bs.log_delta(i, j).unwrap(); } }
                prop_assert!((acc.exp() - 1.0).norm() < 1e-10);
            }
        }

        #[test]
        fn invariant_delta_under_mobius(
            h in 1usize..5,
            raw in prop::collection::vec(point_strategy(), 10),
            coeffs in prop::collection::vec(point_strategy(), 4),
            inf in any::<bool>(),
        ) {
            let n = 2 * h + 2;
            let pts = &raw[..n];
            prop_assume!(separated(pts));
            let mut sp: Vec<SpherePoint> = pts.iter().map(|&(a, b)| SpherePoint::finite(a, b)).collect();
            if inf { sp[n - 1] = SpherePoint::Infinity; }
            let bs = BranchSet::new(sp, h).unwrap();
            let [a, b, cc, d] = [0, 1, 2, 3].map(|k| c(coeffs[k].0, coeffs[k].1));
            prop_assume!((a * d - b * cc).norm() > 0.1);
            let m = MobiusMap::new(a, b, cc, d).unwrap();
            let moved = bs.apply_mobius(&m);
            prop_assume!(BranchSet::new(moved.points().to_vec(), h).is_ok());
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let ratio = moved.delta_invariant(i, j).unwrap() / bs.delta_invariant(i, j).unwrap();
                        prop_assert!((ratio - 1.0).norm() < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn cross_ratio_power_identity(raw in prop::collection::vec(point_strategy(), 6)) {
            prop_assume!(separated(&raw));
            let bs = BranchSet::from_finite(&raw.iter().map(|&(a, b)| c(a, b)).collect::<Vec<_>>()).unwrap();
            let h = 2.0;
            let p = 2.0 * h * (2.0 * h + 1.0);
            let (i, j, k, r) = (0, 3, 1, 5);
            let lhs = bs.cross_ratio(i, j, k, r).unwrap().ln() * p;
            let rhs = bs.log_delta(i, k).unwrap() - bs.log_delta(j, k).unwrap()
                + bs.log_delta(j, r).unwrap() - bs.log_delta(i, r).unwrap();
            prop_assert!(((lhs - rhs).exp() - 1.0).norm() < 1e-9);
        }
    }
}
