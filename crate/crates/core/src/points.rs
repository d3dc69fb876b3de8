//! Unit vectors in R³ and ordered point systems on S².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm tolerance for a valid [`SpherePoint`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// A unit vector in R³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct SpherePoint([f64; 3]);

impl SpherePoint {
    /// Accepts a vector whose norm is within [`UNIT_TOLERANCE`] of one, unchanged.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let n = norm(v);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Validation(format!(
                "point {v:?} has norm {n}, expected 1"
            )));
        }
        Ok(Self(v))
    }

    /// Scales a nonzero finite vector onto the sphere.
    pub fn normalize(v: [f64; 3]) -> Result<Self> {
        let n = norm(v);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::domain(format!("cannot normalize {v:?}")));
        }
        Ok(Self([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub(crate) fn from_raw_unchecked(v: [f64; 3]) -> Self {
        Self(v)
    }

    #[inline]
    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    #[inline]
    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot(self.0, other.0)
    }

    /// Euclidean (chordal) distance, computed from the coordinate difference.
    #[inline]
    pub fn chord(&self, other: &SpherePoint) -> f64 {
        chord(self.0, other.0)
    }

    pub fn antipode(&self) -> SpherePoint {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl From<SpherePoint> for [f64; 3] {
    fn from(p: SpherePoint) -> Self {
        p.0
    }
}

impl TryFrom<[f64; 3]> for SpherePoint {
    type Error = Error;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        SpherePoint::new(v)
    }
}

#[inline]
pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(v: [f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

#[inline]
pub(crate) fn chord(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    norm(d).min(2.0)
}

/// An ordered, non-empty configuration of points on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<SpherePoint>,
    seed: Option<u64>,
    provenance: Option<String>,
}

impl PointSet {
    pub fn new(points: Vec<SpherePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Validation("a point set needs at least one point".into()));
        }
        Ok(Self {
            points,
            seed: None,
            provenance: None,
        })
    }

    /// Validates raw coordinates; see [`SpherePoint::new`].
    pub fn from_coords(coords: &[[f64; 3]]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| SpherePoint::new(c)).collect::<Result<_>>()?)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_provenance(mut self, tag: impl Into<String>) -> Self {
        self.provenance = Some(tag.into());
        self
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn get(&self, i: usize) -> Option<&SpherePoint> {
        self.points.get(i)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SpherePoint> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<SpherePoint> {
        self.points
    }

    /// The first `n` points, keeping seed and provenance.
    pub fn prefix(&self, n: usize) -> Result<PointSet> {
        if n == 0 || n > self.len() {
            return Err(Error::domain(format!(
                "prefix length {n} outside 1..={}",
                self.len()
            )));
        }
        Ok(Self {
            points: self.points[..n].to_vec(),
            seed: self.seed,
            provenance: self.provenance.clone(),
        })
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a SpherePoint;
    type IntoIter = std::slice::Iter<'a, SpherePoint>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// The four vertices of a regular tetrahedron inscribed in S².
pub fn tetrahedron() -> PointSet {
    let s = 1.0 / 3f64.sqrt();
    PointSet::from_coords(&[[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]])
        .expect("tetrahedron vertices are unit vectors")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unit_vectors() {
        assert!(SpherePoint::new([1.0, 0.0, 0.0]).is_ok());
        assert!(SpherePoint::new([1.0 + 1e-9, 0.0, 0.0]).is_err());
        assert!(SpherePoint::new([f64::NAN, 0.0, 0.0]).is_err());
        assert!(SpherePoint::normalize([0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn empty_point_set_is_invalid() {
        assert!(PointSet::new(vec![]).is_err());
    }

    #[test]
    fn tetrahedron_geometry() {
        let t = tetrahedron();
        for i in 0..4 {
            for j in 0..4 {
                let d = t.points()[i].dot(&t.points()[j]);
                let want = if i == j { 1.0 } else { -1.0 / 3.0 };
                assert!((d - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn chord_is_clamped_to_diameter() {
        let p = SpherePoint::new([0.0, 0.0, 1.0]).unwrap();
        assert!(p.chord(&p.antipode()) <= 2.0);
        assert_eq!(p.chord(&p), 0.0);
    }
}
