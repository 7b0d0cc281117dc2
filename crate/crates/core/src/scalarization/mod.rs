//! Pascoletti-Serafini scalarization: the query/solution contract and its
//! backends.
//!
//! `PS(p, q)` asks for the smallest `α` such that `p + α q = F(x) + λ` for some
//! feasible `x` and `λ >= 0`. The engine always queries with `p` the upper
//! corner of a box and `q` its diagonal.

mod grid;
pub mod protocol;
mod quadric;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grid::{GridProblem, GridSolver};
pub use protocol::StreamSolver;
pub use quadric::{solve_quadric, QuadricSolver};

/// Tolerance below which a negative slack component is treated as zero.
pub const LAMBDA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("the search direction does not meet the quadric")]
    NoIntersection,
    #[error("no feasible decision vector on the grid")]
    InfeasibleProblem,
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// One scalarization request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsQuery {
    pub query_id: u64,
    /// Reference point (upper corner of the selected box).
    pub p: Vec<f64>,
    /// Direction (box diagonal), strictly positive.
    pub q: Vec<f64>,
}

impl PsQuery {
    pub fn new(query_id: u64, p: Vec<f64>, q: Vec<f64>) -> Result<Self, SolveError> {
        if p.len() != q.len() {
            return Err(SolveError::Contract(format!(
                "p has {} components, q has {}",
                p.len(),
                q.len()
            )));
        }
        if let Some(i) = q.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(SolveError::Contract(format!("q[{i}] = {} is not positive", q[i])));
        }
        Ok(Self { query_id, p, q })
    }

    /// The query for box `[lower, upper]`: `p = upper`, `q = upper - lower`.
    pub fn for_box(query_id: u64, lower: &[f64], upper: &[f64]) -> Result<Self, SolveError> {
        let q = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
        Self::new(query_id, upper.to_vec(), q)
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// `p + α q`.
    pub fn point_at(&self, alpha: f64) -> Vec<f64> {
        self.p.iter().zip(&self.q).map(|(p, q)| p + alpha * q).collect()
    }
}

/// A scalarization result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsSolution {
    pub query_id: u64,
    pub alpha: f64,
    /// Objective vector `F(x)` at the optimizer.
    pub z: Vec<f64>,
    /// Slack, componentwise non-negative.
    pub lambda: Vec<f64>,
    /// `z + λ`.
    pub s: Vec<f64>,
    /// Optimal decision vector, when the backend knows it.
    pub decision: Option<Vec<f64>>,
}

impl PsSolution {
    /// Builds a solution from `z` and `λ`, clamping slack components in
    /// `[-LAMBDA_TOLERANCE, 0)` to zero and setting `s = z + λ`.
    pub fn from_parts(
        query_id: u64,
        alpha: f64,
        z: Vec<f64>,
        lambda: Vec<f64>,
        decision: Option<Vec<f64>>,
    ) -> Result<Self, SolveError> {
        if z.len() != lambda.len() {
            return Err(SolveError::Contract(format!(
                "z has {} components, lambda has {}",
                z.len(),
                lambda.len()
            )));
        }
        if !alpha.is_finite() || z.iter().chain(&lambda).any(|v| !v.is_finite()) {
            return Err(SolveError::Contract("solution contains non-finite values".into()));
        }
        let mut lambda = lambda;
        for (i, l) in lambda.iter_mut().enumerate() {
            if *l < -LAMBDA_TOLERANCE {
                return Err(SolveError::Contract(format!("lambda[{i}] = {l} is negative")));
            }
            if *l < 0.0 {
                *l = 0.0;
            }
        }
        let s = z.iter().zip(&lambda).map(|(z, l)| z + l).collect();
        Ok(Self { query_id, alpha, z, lambda, s, decision })
    }
}

/// A backend able to answer Pascoletti-Serafini queries.
pub trait PsSolver {
    fn solve(&mut self, query: &PsQuery) -> Result<PsSolution, SolveError>;
}

impl<S: PsSolver + ?Sized> PsSolver for Box<S> {
    fn solve(&mut self, query: &PsQuery) -> Result<PsSolution, SolveError> {
        (**self).solve(query)
    }
}
