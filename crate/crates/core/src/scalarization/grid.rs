use crate::problems::ProblemSpec;

use super::{PsQuery, PsSolution, PsSolver, SolveError};

/// What the grid solver needs from a problem.
pub trait GridProblem {
    fn num_objectives(&self) -> usize;
    fn decision_box(&self) -> &[(f64, f64)];
    /// Non-box constraints.
    fn constraint_ok(&self, x: &[f64]) -> bool;
    fn evaluate_into(&self, x: &[f64], out: &mut [f64]);
}

impl GridProblem for ProblemSpec {
    fn num_objectives(&self) -> usize {
        self.m()
    }

    fn decision_box(&self) -> &[(f64, f64)] {
        ProblemSpec::decision_box(self)
    }

    fn constraint_ok(&self, x: &[f64]) -> bool {
        ProblemSpec::constraint_ok(self, x)
    }

    fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        ProblemSpec::evaluate_into(self, x, out)
    }
}

/// Slack components within this distance below zero are treated as zero.
const GRID_LAMBDA_TOLERANCE: f64 = 1e-9;

/// Minimax solver over a uniform decision grid.
///
/// `α(x) = max_i (F_i(x) - p_i) / q_i` is minimized over the feasible grid
/// points; each refinement pass re-grids a window of one coarse cell on either
/// side of the incumbent with the same number of points per variable. Ties go
/// to the first point in row-major order, so results are deterministic.
#[derive(Debug, Clone)]
pub struct GridSolver<P = ProblemSpec> {
    problem: P,
    resolution: Vec<usize>,
    refinement_passes: usize,
}

impl<P: GridProblem> GridSolver<P> {
    /// `resolution` points per variable (at least 2), one refinement pass.
    pub fn new(problem: P, resolution: usize) -> Result<Self, SolveError> {
        let n = problem.decision_box().len();
        Self::with_resolutions(problem, vec![resolution; n], 1)
    }

    pub fn with_resolutions(
        problem: P,
        resolution: Vec<usize>,
        refinement_passes: usize,
    ) -> Result<Self, SolveError> {
        if resolution.len() != problem.decision_box().len() {
            return Err(SolveError::Contract(format!(
                "{} grid resolutions for {} variables",
                resolution.len(),
                problem.decision_box().len()
            )));
        }
        if resolution.iter().any(|&r| r < 2) {
            return Err(SolveError::Contract("grid resolution must be at least 2".into()));
        }
        Ok(Self { problem, resolution, refinement_passes })
    }

    pub fn problem(&self) -> &P {
        &self.problem
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    /// Best feasible grid point in `window`, with its `α`.
    fn scan(&self, query: &PsQuery, window: &[(f64, f64)]) -> Option<(Vec<f64>, f64)> {
        let n = window.len();
        let steps: Vec<f64> = window
            .iter()
            .zip(&self.resolution)
            .map(|((lo, hi), r)| (hi - lo) / (*r - 1) as f64)
            .collect();
        let inv_q: Vec<f64> = query.q.iter().map(|q| 1.0 / q).collect();
        let mut idx = vec![0usize; n];
        let mut x: Vec<f64> = window.iter().map(|w| w.0).collect();
        let mut f = vec![0.0; query.dim()];
        let mut best: Option<(Vec<f64>, f64)> = None;
        loop {
            if self.problem.constraint_ok(&x) {
                self.problem.evaluate_into(&x, &mut f);
                let mut alpha = f64::NEG_INFINITY;
                for i in 0..f.len() {
                    alpha = alpha.max((f[i] - query.p[i]) * inv_q[i]);
                }
                if best.as_ref().is_none_or(|b| alpha < b.1) {
                    best = Some((x.clone(), alpha));
                }
            }
            // row-major odometer, last variable fastest
            let mut j = n;
            loop {
                if j == 0 {
                    return best;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < self.resolution[j] {
                    // hit the upper end exactly on the last point
                    x[j] = if idx[j] + 1 == self.resolution[j] {
                        window[j].1
                    } else {
                        window[j].0 + idx[j] as f64 * steps[j]
                    };
                    break;
                }
                idx[j] = 0;
                x[j] = window[j].0;
            }
        }
    }
}

impl<P: GridProblem> PsSolver for GridSolver<P> {
    fn solve(&mut self, query: &PsQuery) -> Result<PsSolution, SolveError> {
        if query.dim() != self.problem.num_objectives() {
            return Err(SolveError::Contract(format!(
                "query has {} components, problem has {} objectives",
                query.dim(),
                self.problem.num_objectives()
            )));
        }
        let bounds = self.problem.decision_box().to_vec();
        let (mut x, mut alpha) = self.scan(query, &bounds).ok_or(SolveError::InfeasibleProblem)?;
        let mut cell: Vec<f64> =
            bounds.iter().zip(&self.resolution).map(|((lo, hi), r)| (hi - lo) / (*r - 1) as f64).collect();
        for _ in 0..self.refinement_passes {
            let window: Vec<(f64, f64)> = x
                .iter()
                .zip(&bounds)
                .zip(&cell)
                .map(|((&xi, &(lo, hi)), &h)| ((xi - h).max(lo), (xi + h).min(hi)))
                .collect();
            if let Some((xr, ar)) = self.scan(query, &window) {
                if ar < alpha {
                    x = xr;
                    alpha = ar;
                }
            }
            for (c, (w, r)) in cell.iter_mut().zip(window.iter().zip(&self.resolution)) {
                *c = (w.1 - w.0) / (*r - 1) as f64;
            }
        }
        let mut z = vec![0.0; query.dim()];
        self.problem.evaluate_into(&x, &mut z);
        let s = query.point_at(alpha);
        let lambda: Vec<f64> = s
            .iter()
            .zip(&z)
            .map(|(s, z)| {
                let l = s - z;
                if l < 0.0 && l >= -GRID_LAMBDA_TOLERANCE {
                    // the active component: s_i = z_i up to rounding
                    0.0
                } else {
                    l
                }
            })
            .collect();
        // s = z + λ agrees with p + α q up to rounding and never lies below z
        PsSolution::from_parts(query.query_id, alpha, z, lambda, Some(x))
    }
}
