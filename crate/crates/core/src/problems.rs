//! Test problems with known Pareto fronts.
//!
//! * `sphere` / `ellipsoid`: `min x` subject to `Σ (x_i / a_i)² <= 1`, with
//!   `a = 1` for the sphere and `a_1 = m` for the ellipsoid. Solvable in closed
//!   form (see [`crate::scalarization::QuadricSolver`]).
//! * `nonconvex`: three objectives `(-x_1, -x_2, -x_3²)` under
//!   `-cos x_1 - exp(-x_2) + x_3 <= 0`; connected, non-convex front.
//! * `comet`: a three-variable box-constrained problem whose front resembles a
//!   comet.
//! * `patched`: a two-variable variant of DTLZ7 whose front has four
//!   disconnected patches.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dominates, BoxDims, ObjectivePoint};

/// Tolerance for the feasibility test of quadric problems.
const FEASIBILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("unknown problem {0:?}")]
    Unknown(String),
    #[error("problem {name} does not support {m} objectives")]
    UnsupportedDimension { name: ProblemKind, m: usize },
    #[error("decision vector has {actual} components, expected {expected}")]
    DecisionDimension { expected: usize, actual: usize },
    #[error("decision vector {0:?} is infeasible")]
    Infeasible(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Sphere,
    Ellipsoid,
    Nonconvex,
    Comet,
    Patched,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 5] = [
        ProblemKind::Sphere,
        ProblemKind::Ellipsoid,
        ProblemKind::Nonconvex,
        ProblemKind::Comet,
        ProblemKind::Patched,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Sphere => "sphere",
            ProblemKind::Ellipsoid => "ellipsoid",
            ProblemKind::Nonconvex => "nonconvex",
            ProblemKind::Comet => "comet",
            ProblemKind::Patched => "patched",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ProblemError::Unknown(s.to_string()))
    }
}

/// A fully specified test problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    kind: ProblemKind,
    m: usize,
    decision_box: Vec<(f64, f64)>,
    ideal: ObjectivePoint,
    nadir: ObjectivePoint,
    quadric: Option<Vec<f64>>,
}

/// Upper end of the efficient range of `x_1` for the non-convex problem.
fn nonconvex_x1_max() -> f64 {
    0.2f64.acos()
}

/// `g(x) = x (1 + sin 3πx)`, the per-variable term of the patched problem.
fn patched_term(x: f64) -> f64 {
    x * (1.0 + (3.0 * PI * x).sin())
}

/// Maximum of [`patched_term`] on `[0, 1]`, by a dense scan followed by
/// golden-section refinement.
fn patched_term_max() -> f64 {
    let n = 10_000;
    let best = (0..=n)
        .map(|i| i as f64 / n as f64)
        .max_by(|a, b| patched_term(*a).total_cmp(&patched_term(*b)))
        .unwrap();
    let (mut a, mut b) = ((best - 1.0 / n as f64).max(0.0), (best + 1.0 / n as f64).min(1.0));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if patched_term(c) > patched_term(d) {
            b = d;
        } else {
            a = c;
        }
    }
    patched_term(0.5 * (a + b))
}

/// Builds one of the test problems.
pub fn make_problem(kind: ProblemKind, m: usize) -> Result<ProblemSpec, ProblemError> {
    let unsupported = || ProblemError::UnsupportedDimension { name: kind, m };
    let point = |v: Vec<f64>| ObjectivePoint::new(v).expect("finite problem constants");
    let spec = match kind {
        ProblemKind::Sphere | ProblemKind::Ellipsoid => {
            if m < 2 {
                return Err(unsupported());
            }
            let mut a = vec![1.0; m];
            if kind == ProblemKind::Ellipsoid {
                a[0] = m as f64;
            }
            ProblemSpec {
                kind,
                m,
                decision_box: a.iter().map(|&ai| (-ai, ai)).collect(),
                ideal: point(a.iter().map(|ai| -ai).collect()),
                nadir: point(vec![0.0; m]),
                quadric: Some(a),
            }
        }
        ProblemKind::Nonconvex => {
            if m != 3 {
                return Err(unsupported());
            }
            let x1_max = nonconvex_x1_max();
            let x2_max = -(0.2f64).ln();
            ProblemSpec {
                kind,
                m,
                // x_3 >= 1.2 forces cos x_1 >= 0.2 and exp(-x_2) >= 0.2, and
                // x_3 <= cos x_1 + exp(-x_2) <= 2: the box is the tightest one
                // containing the feasible set
                decision_box: vec![(0.0, x1_max), (0.0, x2_max), (1.2, 2.0)],
                ideal: point(vec![-x1_max, -x2_max, -4.0]),
                nadir: point(vec![0.0, 0.0, -1.44]),
                quadric: None,
            }
        }
        ProblemKind::Comet => {
            if m != 3 {
                return Err(unsupported());
            }
            ProblemSpec {
                kind,
                m,
                decision_box: vec![(1.0, 3.5), (-2.0, 2.0), (0.0, 1.0)],
                ideal: point(vec![-70.19, -70.19, 3.0]),
                nadir: point(vec![4.0, 4.0, 73.5]),
                quadric: None,
            }
        }
        ProblemKind::Patched => {
            if m != 3 {
                return Err(unsupported());
            }
            ProblemSpec {
                kind,
                m,
                decision_box: vec![(0.0, 1.0), (0.0, 1.0)],
                ideal: point(vec![0.0, 0.0, 6.0 - 2.0 * patched_term_max()]),
                nadir: point(vec![0.86, 0.86, 6.0]),
                quadric: None,
            }
        }
    };
    Ok(spec)
}

impl ProblemSpec {
    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Number of objectives.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_variables(&self) -> usize {
        self.decision_box.len()
    }

    pub fn decision_box(&self) -> &[(f64, f64)] {
        &self.decision_box
    }

    pub fn ideal(&self) -> &ObjectivePoint {
        &self.ideal
    }

    pub fn nadir(&self) -> &ObjectivePoint {
        &self.nadir
    }

    /// Semi-axes `a` when the feasible set is `Σ (x_i / a_i)² <= 1`.
    pub fn quadric(&self) -> Option<&[f64]> {
        self.quadric.as_deref()
    }

    /// `[ideal, nadir]`.
    pub fn start_box(&self) -> BoxDims {
        BoxDims::new(self.ideal.clone(), self.nadir.clone()).expect("ideal is below nadir")
    }

    pub fn has_front_sampler(&self) -> bool {
        true
    }

    /// Feasibility including the decision box.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.decision_box.len()
            && x.iter().zip(&self.decision_box).all(|(v, (lo, hi))| v >= lo && v <= hi)
            && self.constraint_ok(x)
    }

    /// Feasibility of the non-box constraints only.
    #[inline]
    pub fn constraint_ok(&self, x: &[f64]) -> bool {
        match self.kind {
            ProblemKind::Sphere | ProblemKind::Ellipsoid => {
                let a = self.quadric.as_deref().unwrap();
                x.iter().zip(a).map(|(x, a)| (x / a) * (x / a)).sum::<f64>()
                    <= 1.0 + FEASIBILITY_TOLERANCE
            }
            ProblemKind::Nonconvex => -x[0].cos() - (-x[1]).exp() + x[2] <= 0.0,
            ProblemKind::Comet | ProblemKind::Patched => true,
        }
    }

    /// Objective vector at a feasible `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<ObjectivePoint, ProblemError> {
        if x.len() != self.decision_box.len() {
            return Err(ProblemError::DecisionDimension {
                expected: self.decision_box.len(),
                actual: x.len(),
            });
        }
        if !self.is_feasible(x) {
            return Err(ProblemError::Infeasible(x.to_vec()));
        }
        let mut out = vec![0.0; self.m];
        self.evaluate_into(x, &mut out);
        ObjectivePoint::new(out).map_err(|_| ProblemError::Infeasible(x.to_vec()))
    }

    /// Objective vector without any feasibility check.
    #[inline]
    pub fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        match self.kind {
            ProblemKind::Sphere | ProblemKind::Ellipsoid => out.copy_from_slice(x),
            ProblemKind::Nonconvex => {
                out[0] = -x[0];
                out[1] = -x[1];
                out[2] = -x[2] * x[2];
            }
            ProblemKind::Comet => {
                let (x1, x2, x3) = (x[0], x[1], x[2]);
                let c = x1 * x1 * x1 * x2 * x2 - 10.0 * x1;
                out[0] = (1.0 + x3) * (c - 4.0 * x2);
                out[1] = (1.0 + x3) * (c + 4.0 * x2);
                out[2] = 3.0 * (1.0 + x3) * x1 * x1;
            }
            ProblemKind::Patched => {
                out[0] = x[0];
                out[1] = x[1];
                out[2] = 6.0 - patched_term(x[0]) - patched_term(x[1]);
            }
        }
    }

    /// Deterministic sample of `n` candidate points of the nondominated set,
    /// reduced to its mutually nondominated subset.
    pub fn sample_front(&self, n: usize, seed: u64) -> Vec<ObjectivePoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = match self.kind {
            ProblemKind::Sphere | ProblemKind::Ellipsoid => {
                let a = self.quadric.as_deref().unwrap();
                let raw: Vec<Vec<f64>> = (0..n)
                    .map(|_| {
                        let g: Vec<f64> = loop {
                            let g: Vec<f64> =
                                (0..self.m).map(|_| rng.sample::<f64, _>(StandardNormal).abs()).collect();
                            if g.iter().any(|&v| v > 0.0) {
                                break g;
                            }
                        };
                        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                        g.iter().zip(a).map(|(v, a)| -a * v / norm).collect()
                    })
                    .collect();
                // on the boundary of a strictly convex set, no filter needed
                return raw.into_iter().map(|p| ObjectivePoint::new(p).unwrap()).collect();
            }
            ProblemKind::Nonconvex => {
                let x1_max = nonconvex_x1_max();
                let raw: Vec<Vec<f64>> = (0..n)
                    .map(|_| {
                        let x1 = rng.random_range(0.0..=x1_max);
                        let x2_max = -(1.2 - x1.cos()).ln();
                        let x2 = rng.random_range(0.0..=x2_max.max(0.0));
                        let x3 = x1.cos() + (-x2).exp();
                        let mut f = vec![0.0; 3];
                        self.evaluate_into(&[x1, x2, x3], &mut f);
                        f
                    })
                    .collect();
                nondominated_filter(raw)
            }
            ProblemKind::Comet => {
                // the x_1 = 1 face has a 2-D image of area comparable to the
                // x_3 = 1 sheet; split samples evenly
                let raw: Vec<Vec<f64>> = (0..n)
                    .map(|i| {
                        let x = if i % 2 == 0 {
                            let x1: f64 = rng.random_range(1.0..=3.5);
                            let w = 2.0 / (x1 * x1 * x1);
                            vec![x1, rng.random_range(-w..=w), 1.0]
                        } else {
                            vec![1.0, rng.random_range(-2.0..=2.0), rng.random_range(0.0..=1.0)]
                        };
                        let mut f = vec![0.0; 3];
                        self.evaluate_into(&x, &mut f);
                        f
                    })
                    .collect();
                nondominated_filter(raw)
            }
            ProblemKind::Patched => patched_front_grid(n, &mut rng),
        };
        pts.into_iter().map(|p| ObjectivePoint::new(p).unwrap()).collect()
    }
}

/// Mutually nondominated subset, keeping the first of exact duplicates.
pub fn nondominated_filter(pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    // sort by coordinate sum: a dominating point always has the smaller sum
    order.sort_by(|&a, &b| {
        let sa: f64 = pts[a].iter().sum();
        let sb: f64 = pts[b].iter().sum();
        sa.total_cmp(&sb).then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let p = &pts[i];
        if !kept.iter().any(|&k| dominates(&pts[k], p) || pts[k] == *p) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept.into_iter().map(|i| pts[i].clone()).collect()
}

/// Nondominated points of the patched problem on a uniform `(x_1, x_2)` grid,
/// subsampled to at most `n`.
///
/// With `f_1 = x_1` and `f_2 = x_2`, grid point `(i, j)` is dominated exactly
/// when some grid point `(i', j') <= (i, j)`, `(i', j') != (i, j)`, has
/// `f_3 <= f_3(i, j)`; a running 2-D prefix minimum answers that in one pass.
fn patched_front_grid(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    // about a fifth of the unit square is efficient
    let side = (((n.max(1) as f64) * 5.0).sqrt().ceil() as usize).max(8) + 1;
    let step = 1.0 / (side - 1) as f64;
    let f3 = |i: usize, j: usize| 6.0 - patched_term(i as f64 * step) - patched_term(j as f64 * step);
    let mut prefix = vec![f64::INFINITY; side * side];
    let mut front: Vec<Vec<f64>> = Vec::new();
    for i in 0..side {
        for j in 0..side {
            let v = f3(i, j);
            let up = if i > 0 { prefix[(i - 1) * side + j] } else { f64::INFINITY };
            let left = if j > 0 { prefix[i * side + j - 1] } else { f64::INFINITY };
            let below = up.min(left);
            if v < below {
                front.push(vec![i as f64 * step, j as f64 * step, v]);
            }
            prefix[i * side + j] = v.min(below);
        }
    }
    if front.len() > n {
        let mut idx: Vec<usize> = rand::seq::index::sample(rng, front.len(), n).into_vec();
        idx.sort_unstable();
        front = idx.into_iter().map(|i| front[i].clone()).collect();
    }
    front
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_and_ellipsoid_boxes() {
        let s = make_problem(ProblemKind::Sphere, 3).unwrap();
        assert_eq!(s.quadric(), Some(&[1.0, 1.0, 1.0][..]));
        assert_eq!(s.ideal().as_slice(), &[-1.0, -1.0, -1.0]);
        assert_eq!(s.nadir().as_slice(), &[0.0, 0.0, 0.0]);

        let e = make_problem(ProblemKind::Ellipsoid, 4).unwrap();
        assert_eq!(e.quadric(), Some(&[4.0, 1.0, 1.0, 1.0][..]));
        assert_eq!(e.start_box().lower().as_slice(), &[-4.0, -1.0, -1.0, -1.0]);
        assert_eq!(e.start_box().upper().as_slice(), &[0.0; 4]);
    }

    #[test]
    fn comet_decision_box_and_reference_values() {
        let c = make_problem(ProblemKind::Comet, 3).unwrap();
        assert_eq!(c.decision_box(), &[(1.0, 3.5), (-2.0, 2.0), (0.0, 1.0)]);
        assert_eq!(c.evaluate(&[3.5, 0.0, 0.0]).unwrap().as_slice(), &[-35.0, -35.0, 36.75]);
        assert_eq!(c.evaluate(&[2.0, 0.0, 1.0]).unwrap().as_slice(), &[-40.0, -40.0, 24.0]);
    }

    #[test]
    fn patched_origin() {
        let p = make_problem(ProblemKind::Patched, 3).unwrap();
        assert_eq!(p.evaluate(&[0.0, 0.0]).unwrap().as_slice(), &[0.0, 0.0, 6.0]);
        // rounded reference value 2.61
        assert!((p.ideal()[2] - 2.61).abs() < 0.005, "{}", p.ideal()[2]);
    }

    #[test]
    fn nonconvex_reference_points() {
        let p = make_problem(ProblemKind::Nonconvex, 3).unwrap();
        let ideal = p.ideal().as_slice();
        assert!((ideal[0] + 1.37).abs() < 0.005);
        assert!((ideal[1] + 1.61).abs() < 0.005);
        assert_eq!(ideal[2], -4.0);
        assert_eq!(p.nadir().as_slice(), &[0.0, 0.0, -1.44]);
    }

    #[test]
    fn unsupported_combinations() {
        assert!(make_problem(ProblemKind::Sphere, 1).is_err());
        assert!(make_problem(ProblemKind::Comet, 4).is_err());
        assert!(make_problem(ProblemKind::Patched, 2).is_err());
        assert!("cube".parse::<ProblemKind>().is_err());
        assert_eq!("comet".parse::<ProblemKind>().unwrap(), ProblemKind::Comet);
    }

    #[test]
    fn evaluate_rejects_infeasible() {
        let s = make_problem(ProblemKind::Sphere, 2).unwrap();
        assert!(matches!(s.evaluate(&[-0.9, -0.9]), Err(ProblemError::Infeasible(_))));
        let n = make_problem(ProblemKind::Nonconvex, 3).unwrap();
        assert!(n.evaluate(&[0.0, 0.0, 2.0]).is_ok());
        assert!(n.evaluate(&[1.0, 1.0, 2.0]).is_err());
        assert!(matches!(s.evaluate(&[0.0]), Err(ProblemError::DecisionDimension { .. })));
    }

    #[test]
    fn unit_ellipsoid_matches_sphere() {
        let s = make_problem(ProblemKind::Sphere, 2).unwrap();
        let e = make_problem(ProblemKind::Ellipsoid, 2).unwrap();
        // a_1 = m = 2 differs; only compare where both are feasible
        for x in [[-0.5, -0.5], [0.0, -1.0], [-0.3, 0.2]] {
            assert_eq!(s.evaluate(&x).unwrap(), e.evaluate(&x).unwrap());
        }
    }

    fn assert_mutually_nondominated(pts: &[ObjectivePoint]) {
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                let strictly = |x: &[f64], y: &[f64]| {
                    x.iter().zip(y).all(|(u, v)| *u <= v + 1e-9)
                        && x.iter().zip(y).any(|(u, v)| *u < v - 1e-9)
                };
                assert!(!strictly(a.as_slice(), b.as_slice()), "{a:?} dominates {b:?}");
                assert!(!strictly(b.as_slice(), a.as_slice()), "{b:?} dominates {a:?}");
            }
        }
    }

    fn assert_within(spec: &ProblemSpec, pts: &[ObjectivePoint]) {
        for p in pts {
            for i in 0..spec.m() {
                assert!(p[i] >= spec.ideal()[i] - 1e-9, "{p:?} below ideal");
                assert!(p[i] <= spec.nadir()[i] + 1e-9, "{p:?} above nadir");
            }
        }
    }

    #[test]
    fn sphere_samples_on_negative_orthant_boundary() {
        let s = make_problem(ProblemKind::Sphere, 2).unwrap();
        let pts = s.sample_front(500, 7);
        assert_eq!(pts.len(), 500);
        for p in &pts {
            assert!((p[0] * p[0] + p[1] * p[1] - 1.0).abs() < 1e-12);
            assert!(p[0] <= 0.0 && p[1] <= 0.0);
        }
        assert_mutually_nondominated(&pts);
        assert_eq!(pts, s.sample_front(500, 7));
    }

    #[test]
    fn ellipsoid_samples_on_boundary() {
        let e = make_problem(ProblemKind::Ellipsoid, 3).unwrap();
        let pts = e.sample_front(300, 1);
        for p in &pts {
            let r = (p[0] / 3.0).powi(2) + p[1] * p[1] + p[2] * p[2];
            assert!((r - 1.0).abs() < 1e-12);
        }
        assert_within(&e, &pts);
    }

    #[test]
    fn nonconvex_samples() {
        let p = make_problem(ProblemKind::Nonconvex, 3).unwrap();
        let pts = p.sample_front(1500, 3);
        assert!(pts.len() > 1400, "filter removed too much: {}", pts.len());
        assert_mutually_nondominated(&pts);
        assert_within(&p, &pts);
    }

    #[test]
    fn comet_samples_come_from_corrected_efficient_set() {
        let c = make_problem(ProblemKind::Comet, 3).unwrap();
        let pts = c.sample_front(1500, 5);
        assert!(pts.len() > 1000, "{}", pts.len());
        assert_mutually_nondominated(&pts);
        for p in &pts {
            // x_3 = 1 sheet: f_3 = 6 x_1², f_1 + f_2 = 4 (x_1³ x_2² - 10 x_1)
            // x_1 = 1 face: f_3 = 3 (1 + x_3), f_2 - f_1 = 8 (1 + x_3) x_2
            let x1_sheet = (p[2] / 6.0).sqrt();
            let on_sheet = (1.0..=3.5 + 1e-12).contains(&x1_sheet) && {
                let x2 = (p[1] - p[0]) / 16.0;
                let f1 = 2.0 * (x1_sheet.powi(3) * x2 * x2 - 10.0 * x1_sheet - 4.0 * x2);
                (f1 - p[0]).abs() < 1e-8 && (x2 * x1_sheet.powi(3)).abs() <= 2.0 + 1e-9
            };
            let x3_face = p[2] / 3.0 - 1.0;
            let on_face = (-1e-12..=1.0 + 1e-12).contains(&x3_face) && {
                let x2 = (p[1] - p[0]) / (8.0 * (1.0 + x3_face));
                let f1 = (1.0 + x3_face) * (x2 * x2 - 10.0 - 4.0 * x2);
                (f1 - p[0]).abs() < 1e-8 && x2.abs() <= 2.0 + 1e-9
            };
            assert!(on_sheet || on_face, "{p:?} not in f(S')");
        }
    }

    #[test]
    fn patched_samples_form_four_clusters() {
        let p = make_problem(ProblemKind::Patched, 3).unwrap();
        let pts = p.sample_front(4000, 11);
        assert!(pts.len() >= 3000);
        assert_mutually_nondominated(&pts);
        assert_within(&p, &pts);
        // the efficient x ranges are two disjoint intervals per coordinate
        let gap = |x: f64| x > 0.26 && x < 0.63;
        assert!(pts.iter().all(|q| !gap(q[0]) && !gap(q[1])));
        let mut seen = [false; 4];
        for q in &pts {
            seen[(q[0] > 0.5) as usize * 2 + (q[1] > 0.5) as usize] = true;
        }
        assert_eq!(seen, [true; 4]);
    }
}
