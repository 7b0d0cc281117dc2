//! Local lower and upper bounds of the unexplored search region.
//!
//! The region inside the start box that may still contain nondominated points
//! is the union of the boxes `[l, u]` with `l` a local lower bound, `u` a local
//! upper bound and `l < u`. Every new representation point `z` (with its
//! scalarization point `s = z + λ`) replaces the upper bounds above `z` and the
//! lower bounds below `s` by child bounds.
//!
//! Two interchangeable strategies are provided:
//!
//! * [`Strategy::Naive`] spawns all `m` children of every affected bound,
//!   filters redundant ones by pairwise comparison and finds the largest box by
//!   a nested scan over `L × U`.
//! * [`Strategy::Improved`] tracks defining sets so that redundant children
//!   are never created, and keeps for every bound the list of opposing bounds
//!   whose box is still larger than the target size.
//!
//! Both produce identical bound sets and identical box selections.

mod improved;
mod naive;
mod oracle;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{strictly_less, weakly_less, BoxDims, SizeMeasure, SizeMode};

pub use improved::ImprovedRegion;
pub use naive::NaiveRegion;
pub use oracle::{bounds_oracle, OracleKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("pruning threshold must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("dimension mismatch: region has {expected} objectives, point has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("scalarization point s is not above z in component {index} (z = {z}, s = {s})")]
    SBelowZ { index: usize, z: f64, s: f64 },
    #[error("point component {index} is not finite")]
    NonFinite { index: usize },
}

/// Search-region management strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Naive,
    #[default]
    Improved,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Naive => f.write_str("naive"),
            Strategy::Improved => f.write_str("improved"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Lower,
    Upper,
}

/// The points fixing one component `k` of a bound `b`: every point `p` with
/// `p_k = b_k` that is strictly beyond `b` in all other components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DefiningSet {
    /// The component comes from the start box.
    pub start_box: bool,
    pub points: Vec<Vec<f64>>,
}

impl DefiningSet {
    pub fn start_box() -> Self {
        Self { start_box: true, points: Vec::new() }
    }

    pub fn point(p: &[f64]) -> Self {
        Self { start_box: false, points: vec![p.to_vec()] }
    }
}

/// A local bound together with its defining sets (`s` points for lower
/// bounds, `z` points for upper bounds).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundNode {
    pub id: u32,
    pub kind: BoundKind,
    pub coords: Vec<f64>,
    pub defining: Vec<DefiningSet>,
}

/// An opposing pair of bounds chosen for refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedBox {
    pub lower_id: u32,
    pub upper_id: u32,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub size: f64,
}

impl SelectedBox {
    pub fn to_box(&self) -> BoxDims {
        BoxDims::from_vecs(self.lower.clone(), self.upper.clone())
            .expect("selected boxes are non-degenerate")
    }
}

/// Counts of bounds replaced by one update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpdateSummary {
    pub lower_replaced: usize,
    pub upper_replaced: usize,
}

/// Decides whether the child of upper bound `u` in component `k` is a local
/// upper bound after inserting `z < u`: `z_k > max_{j != k} min_{d in D_j(u)} d_k`,
/// with a start-box face contributing `-inf`.
pub fn child_criterion_upper(defining: &[DefiningSet], z: &[f64], k: usize) -> bool {
    defining
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .all(|(_, d)| d.start_box || d.points.iter().any(|p| p[k] < z[k]))
}

/// Lower-bound counterpart of [`child_criterion_upper`]:
/// `s_k < min_{j != k} max_{d in D_j(l)} d_k`, start-box faces acting as `+inf`.
pub fn child_criterion_lower(defining: &[DefiningSet], s: &[f64], k: usize) -> bool {
    defining
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .all(|(_, d)| d.start_box || d.points.iter().any(|p| p[k] > s[k]))
}

#[derive(Debug, Clone)]
enum Inner {
    Naive(NaiveRegion),
    Improved(ImprovedRegion),
}

/// The bound sets `L`, `U` for one run, managed by either strategy.
#[derive(Debug, Clone)]
pub struct SearchRegionState {
    inner: Inner,
    start: BoxDims,
    measure: SizeMeasure,
    epsilon: f64,
}

impl SearchRegionState {
    /// A fresh region over `start`; pairs whose box size is at most `epsilon`
    /// are never reported (and, for the improved strategy, never stored).
    pub fn new(
        start: &BoxDims,
        epsilon: f64,
        mode: SizeMode,
        strategy: Strategy,
    ) -> Result<Self, RegionError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(RegionError::BadEpsilon(epsilon));
        }
        Ok(Self::build(start, epsilon, mode, strategy))
    }

    /// A region that keeps every opposing pair (threshold zero).
    pub fn without_pruning(start: &BoxDims, mode: SizeMode, strategy: Strategy) -> Self {
        Self::build(start, 0.0, mode, strategy)
    }

    fn build(start: &BoxDims, epsilon: f64, mode: SizeMode, strategy: Strategy) -> Self {
        let measure = SizeMeasure::for_start_box(mode, start);
        let inner = match strategy {
            Strategy::Naive => Inner::Naive(NaiveRegion::new(start, measure.clone(), epsilon)),
            Strategy::Improved => {
                Inner::Improved(ImprovedRegion::new(start, measure.clone(), epsilon))
            }
        };
        Self { inner, start: start.clone(), measure, epsilon }
    }

    pub fn strategy(&self) -> Strategy {
        match self.inner {
            Inner::Naive(_) => Strategy::Naive,
            Inner::Improved(_) => Strategy::Improved,
        }
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn measure(&self) -> &SizeMeasure {
        &self.measure
    }

    pub fn start_box(&self) -> &BoxDims {
        &self.start
    }

    /// Inserts a new point: lower bounds are updated with `s`, then upper
    /// bounds with `z`. Passing `None` for `z` updates the lower bounds only.
    pub fn apply_point(&mut self, z: Option<&[f64]>, s: &[f64]) -> Result<UpdateSummary, RegionError> {
        let m = self.dim();
        check_point(s, m)?;
        if let Some(z) = z {
            check_point(z, m)?;
            if !weakly_less(z, s) {
                let index = (0..m).find(|&i| z[i] > s[i]).unwrap_or(0);
                return Err(RegionError::SBelowZ { index, z: z[index], s: s[index] });
            }
        }
        Ok(match &mut self.inner {
            Inner::Naive(r) => r.apply_point(z, s),
            Inner::Improved(r) => r.apply_point(z, s),
        })
    }

    /// The box to refine next, or `None` once every box has size at most the
    /// threshold.
    pub fn largest_box(&self) -> Option<SelectedBox> {
        match &self.inner {
            Inner::Naive(r) => r.largest_box(),
            Inner::Improved(r) => r.largest_box(),
        }
    }

    /// Drops the pair permanently; boxes later derived from it by splitting
    /// either bound are dropped as well.
    pub fn evict(&mut self, b: &SelectedBox) {
        match &mut self.inner {
            Inner::Naive(r) => r.evict(b),
            Inner::Improved(r) => r.evict(b),
        }
    }

    pub fn lower_bounds(&self) -> Vec<Vec<f64>> {
        match &self.inner {
            Inner::Naive(r) => r.lower_bounds(),
            Inner::Improved(r) => r.lower_bounds(),
        }
    }

    pub fn upper_bounds(&self) -> Vec<Vec<f64>> {
        match &self.inner {
            Inner::Naive(r) => r.upper_bounds(),
            Inner::Improved(r) => r.upper_bounds(),
        }
    }

    pub fn num_lower(&self) -> usize {
        match &self.inner {
            Inner::Naive(r) => r.num_lower(),
            Inner::Improved(r) => r.num_lower(),
        }
    }

    pub fn num_upper(&self) -> usize {
        match &self.inner {
            Inner::Naive(r) => r.num_upper(),
            Inner::Improved(r) => r.num_upper(),
        }
    }

    /// The improved strategy's bookkeeping, if that strategy is active.
    pub fn as_improved(&self) -> Option<&ImprovedRegion> {
        match &self.inner {
            Inner::Improved(r) => Some(r),
            Inner::Naive(_) => None,
        }
    }

    /// Largest size over all opposing pairs of the current `L × U`, ignoring
    /// the threshold; `0` when no pair is left.
    pub fn max_box_size(&self) -> f64 {
        let lower = self.lower_bounds();
        let upper = self.upper_bounds();
        let mut best = 0.0f64;
        for l in &lower {
            for u in &upper {
                if strictly_less(l, u) {
                    best = best.max(self.measure.size(l, u));
                }
            }
        }
        best
    }
}

fn check_point(p: &[f64], m: usize) -> Result<(), RegionError> {
    if p.len() != m {
        return Err(RegionError::DimensionMismatch { expected: m, actual: p.len() });
    }
    if let Some(index) = p.iter().position(|v| !v.is_finite()) {
        return Err(RegionError::NonFinite { index });
    }
    Ok(())
}

/// Sorted copy of a point list, for set comparisons in tests and checks.
pub fn sorted_points(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts
}

#[cfg(test)]
mod tests;
