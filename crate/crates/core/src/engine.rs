//! The representation loop.
//!
//! Each iteration takes the largest box `[l, u]` of the remaining region,
//! solves `PS(u, u - l)`, records `z`, and updates the lower bounds with
//! `s = z + λ` and the upper bounds with `z`. The loop ends once no box is
//! larger than the target quality.
//!
//! [`Session`] exposes the loop one query at a time for solvers living outside
//! the process; [`run_representation`] drives it with an in-process backend.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{strictly_less, weakly_less, BoxDims, SizeMode};
use crate::problems::{ProblemKind, ProblemSpec};
use crate::scalarization::{
    GridSolver, PsQuery, PsSolution, PsSolver, QuadricSolver, SolveError, LAMBDA_TOLERANCE,
};
use crate::search_region::{RegionError, SearchRegionState, SelectedBox, Strategy};

pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("session is closed")]
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub epsilon: f64,
    pub mode: SizeMode,
    pub strategy: Strategy,
    pub max_iterations: usize,
}

impl RunConfig {
    pub fn new(epsilon: f64, mode: SizeMode, strategy: Strategy) -> Self {
        Self { epsilon, mode, strategy, max_iterations: DEFAULT_MAX_ITERATIONS }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(EngineError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(EngineError::Config("max iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// One accepted point with the box whose query produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationEntry {
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub alpha: f64,
    pub box_lower: Vec<f64>,
    pub box_upper: Vec<f64>,
}

/// Outcome of one submitted solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ack {
    Accepted,
    /// `z` is weakly dominated by an earlier point; only `s` was applied.
    SkippedDominated,
    /// Neither `s` nor `z` splits the selected box, which was dropped.
    StalledEvicted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", tag = "status", content = "cause")]
pub enum Termination {
    Converged,
    Truncated,
    Aborted(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub strategy: Strategy,
    pub mode: SizeMode,
    pub epsilon: f64,
    pub m: usize,
    #[serde(skip)]
    pub representation: Vec<RepresentationEntry>,
    pub cardinality: usize,
    pub iterations: usize,
    pub stalled_boxes: usize,
    pub skipped_dominated: usize,
    /// Size of the box selected at each iteration, in order.
    #[serde(skip)]
    pub selected_sizes: Vec<f64>,
    pub final_max_box_size: f64,
    pub region_time_ms: f64,
    pub solve_time_ms: f64,
    pub wall_time_ms: f64,
    pub termination: Termination,
}

impl RunReport {
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.representation.iter().map(|e| e.z.clone()).collect()
    }

    pub fn is_converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

#[derive(Debug, Clone)]
struct Pending {
    query: PsQuery,
    selected: SelectedBox,
}

/// Step-wise driver: alternate [`Session::next_query`] and
/// [`Session::submit_solution`] until `next_query` returns `None`.
#[derive(Debug, Clone)]
pub struct Session {
    config: RunConfig,
    region: SearchRegionState,
    representation: Vec<RepresentationEntry>,
    pending: Option<Pending>,
    next_id: u64,
    iterations: usize,
    stalled: usize,
    skipped: usize,
    selected_sizes: Vec<f64>,
    region_time: Duration,
    solve_time: Duration,
    started: Instant,
    finished: Option<Termination>,
    closed: bool,
}

impl Session {
    pub fn new(start: &BoxDims, config: RunConfig) -> Result<Self, EngineError> {
        config.validate()?;
        let region = SearchRegionState::new(start, config.epsilon, config.mode, config.strategy)?;
        Ok(Self {
            config,
            region,
            representation: Vec::new(),
            pending: None,
            next_id: 0,
            iterations: 0,
            stalled: 0,
            skipped: 0,
            selected_sizes: Vec::new(),
            region_time: Duration::ZERO,
            solve_time: Duration::ZERO,
            started: Instant::now(),
            finished: None,
            closed: false,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn region(&self) -> &SearchRegionState {
        &self.region
    }

    pub fn representation(&self) -> &[RepresentationEntry] {
        &self.representation
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// The query for the current largest box, or `None` once the loop has
    /// ended. Repeated calls without a submission return the same query.
    pub fn next_query(&mut self) -> Result<Option<PsQuery>, EngineError> {
        if self.closed {
            return Err(EngineError::Closed);
        }
        if let Some(p) = &self.pending {
            return Ok(Some(p.query.clone()));
        }
        if self.finished.is_some() {
            return Ok(None);
        }
        let t = Instant::now();
        let selected = self.region.largest_box();
        self.region_time += t.elapsed();
        let Some(selected) = selected else {
            self.finished = Some(Termination::Converged);
            return Ok(None);
        };
        if self.iterations >= self.config.max_iterations {
            self.finished = Some(Termination::Truncated);
            return Ok(None);
        }
        let query = PsQuery::for_box(self.next_id, &selected.lower, &selected.upper)
            .map_err(|e| EngineError::Contract(e.to_string()))?;
        self.next_id += 1;
        self.iterations += 1;
        self.selected_sizes.push(selected.size);
        self.pending = Some(Pending { query: query.clone(), selected });
        Ok(Some(query))
    }

    fn take_pending(&mut self, query_id: u64) -> Result<Pending, EngineError> {
        if self.closed {
            return Err(EngineError::Closed);
        }
        match &self.pending {
            None => Err(EngineError::Protocol(format!("no query pending, got answer for {query_id}"))),
            Some(p) if p.query.query_id != query_id => Err(EngineError::Protocol(format!(
                "answer for query {query_id}, pending query is {}",
                p.query.query_id
            ))),
            Some(_) => Ok(self.pending.take().unwrap()),
        }
    }

    /// Applies the answer to the pending query.
    pub fn submit_solution(&mut self, sol: &PsSolution) -> Result<Ack, EngineError> {
        let m = self.region.dim();
        if let Some(p) = &self.pending {
            if p.query.query_id == sol.query_id {
                if sol.z.len() != m || sol.s.len() != m || sol.lambda.len() != m {
                    return Err(EngineError::Protocol(format!("solution dimension differs from {m}")));
                }
                if let Some(i) = sol.lambda.iter().position(|&l| l < -LAMBDA_TOLERANCE) {
                    return Err(EngineError::Contract(format!("lambda[{i}] = {} is negative", sol.lambda[i])));
                }
                if let Some(i) = (0..m).find(|&i| sol.z[i] > sol.s[i]) {
                    return Err(EngineError::Contract(format!(
                        "s[{i}] = {} lies below z[{i}] = {}",
                        sol.s[i], sol.z[i]
                    )));
                }
            }
        }
        let Pending { selected, .. } = self.take_pending(sol.query_id)?;
        let t = Instant::now();

        let dominated = self.representation.iter().any(|e| weakly_less(&e.z, &sol.z));
        let splits_lower = strictly_less(&selected.lower, &sol.s);
        let splits_upper = !dominated && strictly_less(&sol.z, &selected.upper);
        let ack = if !splits_lower && !splits_upper {
            self.region.evict(&selected);
            self.stalled += 1;
            Ack::StalledEvicted
        } else if dominated {
            self.region.apply_point(None, &sol.s)?;
            self.skipped += 1;
            Ack::SkippedDominated
        } else {
            self.region.apply_point(Some(&sol.z), &sol.s)?;
            self.representation.push(RepresentationEntry {
                z: sol.z.clone(),
                s: sol.s.clone(),
                alpha: sol.alpha,
                box_lower: selected.lower,
                box_upper: selected.upper,
            });
            Ack::Accepted
        };
        self.region_time += t.elapsed();
        Ok(ack)
    }

    /// The solver found no point on the search line: drop the pending box.
    pub fn report_no_intersection(&mut self, query_id: u64) -> Result<Ack, EngineError> {
        let Pending { selected, .. } = self.take_pending(query_id)?;
        let t = Instant::now();
        self.region.evict(&selected);
        self.region_time += t.elapsed();
        self.stalled += 1;
        Ok(Ack::StalledEvicted)
    }

    /// Adds externally measured solver time to the report.
    pub fn add_solve_time(&mut self, d: Duration) {
        self.solve_time += d;
    }

    /// Ends the session, aborting it if it was still running.
    pub fn close(&mut self, abort_cause: Option<String>) -> RunReport {
        let termination = match abort_cause {
            Some(cause) => Termination::Aborted(cause),
            None => self
                .finished
                .clone()
                .unwrap_or_else(|| Termination::Aborted("session closed before termination".into())),
        };
        self.closed = true;
        self.pending = None;
        RunReport {
            strategy: self.config.strategy,
            mode: self.config.mode,
            epsilon: self.config.epsilon,
            m: self.region.dim(),
            representation: self.representation.clone(),
            cardinality: self.representation.len(),
            iterations: self.iterations,
            stalled_boxes: self.stalled,
            skipped_dominated: self.skipped,
            selected_sizes: self.selected_sizes.clone(),
            final_max_box_size: self.region.max_box_size(),
            region_time_ms: self.region_time.as_secs_f64() * 1e3,
            solve_time_ms: self.solve_time.as_secs_f64() * 1e3,
            wall_time_ms: self.started.elapsed().as_secs_f64() * 1e3,
            termination,
        }
    }
}

/// Runs the loop to completion with an in-process backend.
///
/// Backend failures other than a missed search line abort the run; the
/// partial report is still returned.
pub fn run_with_solver<S: PsSolver + ?Sized>(
    start: &BoxDims,
    config: RunConfig,
    solver: &mut S,
) -> Result<RunReport, EngineError> {
    let mut session = Session::new(start, config)?;
    loop {
        let query = match session.next_query()? {
            Some(q) => q,
            None => return Ok(session.close(None)),
        };
        let t = Instant::now();
        let result = solver.solve(&query);
        session.add_solve_time(t.elapsed());
        let step = match result {
            Ok(sol) => session.submit_solution(&sol),
            Err(SolveError::NoIntersection) => session.report_no_intersection(query.query_id),
            Err(e) => return Ok(session.close(Some(e.to_string()))),
        };
        if let Err(e) = step {
            return Ok(session.close(Some(e.to_string())));
        }
    }
}

/// Grid points per decision variable used when none is configured.
pub fn default_grid_resolution(kind: ProblemKind) -> usize {
    match kind {
        ProblemKind::Sphere | ProblemKind::Ellipsoid => 400,
        ProblemKind::Nonconvex | ProblemKind::Comet => 60,
        ProblemKind::Patched => 200,
    }
}

/// Closed-form backend for quadric problems, grid backend otherwise.
pub fn default_solver(problem: &ProblemSpec, grid_resolution: Option<usize>) -> Result<Box<dyn PsSolver>, SolveError> {
    match (problem.quadric(), grid_resolution) {
        (Some(a), None) => Ok(Box::new(QuadricSolver::new(a)?)),
        (_, res) => {
            let res = res.unwrap_or_else(|| default_grid_resolution(problem.kind()));
            Ok(Box::new(GridSolver::new(problem.clone(), res)?))
        }
    }
}

/// Runs one of the built-in problems over `[ideal, nadir]`.
pub fn run_representation(
    problem: &ProblemSpec,
    config: RunConfig,
    grid_resolution: Option<usize>,
) -> Result<RunReport, EngineError> {
    let mut solver = default_solver(problem, grid_resolution).map_err(|e| EngineError::Config(e.to_string()))?;
    run_with_solver(&problem.start_box(), config, &mut solver)
}
