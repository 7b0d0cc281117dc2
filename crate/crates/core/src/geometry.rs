//! Objective-space points, boxes and the box-size measures used to drive the
//! refinement.
//!
//! The hot loops of the search region work on plain `&[f64]` slices; the
//! [`ObjectivePoint`] and [`BoxDims`] newtypes are the validated forms used at
//! API boundaries.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("objective point must have at least one component")]
    Empty,
    #[error("objective point component {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("box is degenerate in component {index}: lower {lower} is not below upper {upper}")]
    Degenerate { index: usize, lower: f64, upper: f64 },
    #[error("scale entry {index} must be positive and finite, got {value}")]
    BadScale { index: usize, value: f64 },
}

/// A finite vector in objective space.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ObjectivePoint(Vec<f64>);

impl ObjectivePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::Empty);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GeometryError::NonFinite { index, value });
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for ObjectivePoint {
    type Error = GeometryError;

    fn try_from(value: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ObjectivePoint> for Vec<f64> {
    fn from(p: ObjectivePoint) -> Self {
        p.0
    }
}

impl Index<usize> for ObjectivePoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for ObjectivePoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Debug for ObjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// An axis-parallel box `[lower, upper]` with `lower < upper` in every component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDims {
    lower: ObjectivePoint,
    upper: ObjectivePoint,
}

impl BoxDims {
    pub fn new(lower: ObjectivePoint, upper: ObjectivePoint) -> Result<Self, GeometryError> {
        if lower.dim() != upper.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: lower.dim(),
                actual: upper.dim(),
            });
        }
        for (index, (&l, &u)) in lower.0.iter().zip(&upper.0).enumerate() {
            if l >= u {
                return Err(GeometryError::Degenerate { index, lower: l, upper: u });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_vecs(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GeometryError> {
        Self::new(ObjectivePoint::new(lower)?, ObjectivePoint::new(upper)?)
    }

    pub fn lower(&self) -> &ObjectivePoint {
        &self.lower
    }

    pub fn upper(&self) -> &ObjectivePoint {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    /// Edge lengths `u_i - l_i`.
    pub fn extents(&self) -> Vec<f64> {
        self.lower.0.iter().zip(&self.upper.0).map(|(l, u)| u - l).collect()
    }
}

/// How box sizes are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SizeMode {
    /// Minimal edge length in objective units.
    #[default]
    Absolute,
    /// Minimal edge length after dividing each edge by the start box extent.
    Relative,
    /// Minimal edge length divided by the smallest start box extent.
    Scaled,
}

impl fmt::Display for SizeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeMode::Absolute => f.write_str("absolute"),
            SizeMode::Relative => f.write_str("relative"),
            SizeMode::Scaled => f.write_str("scaled"),
        }
    }
}

/// A size mode bound to the per-dimension scale it needs.
///
/// In absolute mode the scale is ignored (and stored as all ones).
#[derive(Debug, Clone, PartialEq)]
pub struct SizeMeasure {
    mode: SizeMode,
    inv_scale: Vec<f64>,
}

impl SizeMeasure {
    pub fn absolute(m: usize) -> Self {
        Self { mode: SizeMode::Absolute, inv_scale: vec![1.0; m] }
    }

    pub fn relative(scale: &[f64]) -> Result<Self, GeometryError> {
        if let Some((index, &value)) =
            scale.iter().enumerate().find(|(_, s)| !(s.is_finite() && **s > 0.0))
        {
            return Err(GeometryError::BadScale { index, value });
        }
        Ok(Self { mode: SizeMode::Relative, inv_scale: scale.iter().map(|s| 1.0 / s).collect() })
    }

    /// One factor `1 / scale` for every dimension.
    pub fn scaled(m: usize, scale: f64) -> Result<Self, GeometryError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(GeometryError::BadScale { index: 0, value: scale });
        }
        Ok(Self { mode: SizeMode::Scaled, inv_scale: vec![1.0 / scale; m] })
    }

    /// The measure for `mode` relative to the extents of `start`.
    pub fn for_start_box(mode: SizeMode, start: &BoxDims) -> Self {
        match mode {
            SizeMode::Absolute => Self::absolute(start.dim()),
            SizeMode::Relative => {
                Self::relative(&start.extents()).expect("a valid box has positive extents")
            }
            SizeMode::Scaled => {
                let min = start.extents().into_iter().fold(f64::INFINITY, f64::min);
                Self::scaled(start.dim(), min).expect("a valid box has positive extents")
            }
        }
    }

    pub fn mode(&self) -> SizeMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.inv_scale.len()
    }

    /// Per-dimension factors applied to edge lengths (all ones in absolute
    /// mode); `size` equals the minimum of `(u_i - l_i) * factor_i`.
    pub fn edge_factors(&self) -> &[f64] {
        &self.inv_scale
    }

    #[inline]
    fn edge(&self, i: usize, l: f64, u: f64) -> f64 {
        // multiplying by 1.0 is exact, so both modes share one formula
        (u - l) * self.inv_scale[i]
    }

    /// Minimal (scaled) edge length of `[lower, upper]`.
    #[inline]
    pub fn size(&self, lower: &[f64], upper: &[f64]) -> f64 {
        debug_assert_eq!(lower.len(), upper.len());
        let mut best = f64::INFINITY;
        for i in 0..lower.len() {
            let e = self.edge(i, lower[i], upper[i]);
            if e < best {
                best = e;
            }
        }
        best
    }

    /// Product of the (scaled) edge lengths.
    pub fn volume(&self, lower: &[f64], upper: &[f64]) -> f64 {
        (0..lower.len()).map(|i| self.edge(i, lower[i], upper[i])).product()
    }

    pub fn box_size(&self, b: &BoxDims) -> f64 {
        self.size(b.lower.as_slice(), b.upper.as_slice())
    }

    /// Deterministic total order on boxes; `Greater` means the first box is
    /// the one to refine next.
    ///
    /// Keys in order: size, volume, then the concatenated `(l, u)` tuple
    /// compared lexicographically.
    pub fn compare(&self, l1: &[f64], u1: &[f64], l2: &[f64], u2: &[f64]) -> Ordering {
        self.compare_with_sizes(self.size(l1, u1), l1, u1, self.size(l2, u2), l2, u2)
    }

    /// Same as [`SizeMeasure::compare`] with precomputed sizes.
    #[inline]
    pub fn compare_with_sizes(
        &self,
        size1: f64,
        l1: &[f64],
        u1: &[f64],
        size2: f64,
        l2: &[f64],
        u2: &[f64],
    ) -> Ordering {
        size1
            .total_cmp(&size2)
            .then_with(|| self.volume(l1, u1).total_cmp(&self.volume(l2, u2)))
            .then_with(|| lex_cmp(l1, l2))
            .then_with(|| lex_cmp(u1, u2))
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Componentwise strict order: `a_i < b_i` for every `i`.
///
/// Panics on a dimension mismatch.
#[inline]
pub fn strictly_less(a: &[f64], b: &[f64]) -> bool {
    assert_eq!(a.len(), b.len(), "strictly_less: dimension mismatch");
    a.iter().zip(b).all(|(x, y)| x < y)
}

/// `a <= b` componentwise.
#[inline]
pub fn weakly_less(a: &[f64], b: &[f64]) -> bool {
    assert_eq!(a.len(), b.len(), "weakly_less: dimension mismatch");
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Pareto dominance for minimization: `a <= b` and `a != b`.
#[inline]
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    weakly_less(a, b) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Size of `b` in the given mode; `scale` holds the per-dimension extents in
/// relative mode and is reduced to its minimum in scaled mode.
pub fn box_size(b: &BoxDims, mode: SizeMode, scale: &[f64]) -> Result<f64, GeometryError> {
    Ok(measure_for(mode, scale, b.dim())?.box_size(b))
}

/// Total order on boxes; `Greater` means `b1` is preferred.
pub fn compare_boxes(
    b1: &BoxDims,
    b2: &BoxDims,
    mode: SizeMode,
    scale: &[f64],
) -> Result<Ordering, GeometryError> {
    let measure = measure_for(mode, scale, b1.dim())?;
    Ok(measure.compare(
        b1.lower.as_slice(),
        b1.upper.as_slice(),
        b2.lower.as_slice(),
        b2.upper.as_slice(),
    ))
}

fn measure_for(mode: SizeMode, scale: &[f64], m: usize) -> Result<SizeMeasure, GeometryError> {
    match mode {
        SizeMode::Absolute => Ok(SizeMeasure::absolute(m)),
        SizeMode::Relative => {
            if scale.len() != m {
                return Err(GeometryError::DimensionMismatch { expected: m, actual: scale.len() });
            }
            SizeMeasure::relative(scale)
        }
        SizeMode::Scaled => {
            if scale.len() != m {
                return Err(GeometryError::DimensionMismatch { expected: m, actual: scale.len() });
            }
            SizeMeasure::scaled(m, scale.iter().copied().fold(f64::INFINITY, f64::min))
        }
    }
}
