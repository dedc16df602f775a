//! Exact optimisation of the reduced model.
//!
//! [`solve`] certifies trivial models from the profit upper bound, then
//! runs one of two exact branch-and-bound engines:
//!
//! * the structured engine, for models that round-trip through
//!   [`ReducedProblem`]: enumerates open-facility sets and per-shipper offer
//!   patterns, bounds them with a Lagrangian relaxation of the capacity
//!   rows and prices leaves with the exact transportation subproblem;
//! * the generic engine, for any [`MilpModel`]: LP relaxations through the
//!   dense simplex, most-fractional branching on `y`, then `z`, then `r`,
//!   depth-first dives with best-bound backtracking.
//!
//! [`enumerate_oracle`] is an independent brute force for small instances.

mod enumerate;
mod generic;
pub mod simplex;
mod structured;
pub mod transport;

use std::time::{Duration, Instant};

pub use enumerate::{enumerate_oracle, search_space, ENUMERATION_LIMIT};
pub use generic::BnBNode;
pub use simplex::{solve_lp, LpProblem, LpRow, LpSolution, LpStatus, FEAS_TOL};
pub use transport::{assign, transportation, Transport, TransportResult};

use crate::error::Result;
use crate::milp::{MilpModel, ReducedProblem, Solution, Status, TRIVIAL_TOL};

/// Which branch-and-bound engine [`solve`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Structured when the model has the reduced layout, generic otherwise.
    #[default]
    Auto,
    /// Requires the reduced layout; falls back to generic without it.
    Structured,
    Generic,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
    /// Worker threads; results are deterministic only with one.
    pub workers: usize,
    pub engine: Engine,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { time_limit: None, workers: 1, engine: Engine::Auto }
    }
}

impl SolveOptions {
    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    fn deadline(&self, start: Instant) -> Option<Instant> {
        self.time_limit.map(|d| start + d)
    }
}

/// One evaluated node. Values are in maximisation form: for minimisation
/// models they are negated objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub depth: usize,
    pub parent_bound: f64,
    pub bound: f64,
    /// Objective of a feasible point found at this node.
    pub feasible: Option<f64>,
}

/// Relative optimality gap, `|bound - objective| / (1e-10 + |objective|)`.
pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    if !objective.is_finite() || !bound.is_finite() {
        return f64::INFINITY;
    }
    (bound - objective).abs() / (1e-10 + objective.abs())
}

/// Pruning slack for a maximisation incumbent.
pub(crate) fn prune_tol(incumbent: f64) -> f64 {
    1e-9 * incumbent.abs().max(1.0)
}

/// Solves `model` to optimality or until the time limit.
pub fn solve(model: &MilpModel, opts: &SolveOptions) -> Result<Solution> {
    solve_inner(model, opts, None)
}

/// Like [`solve`], also returning every evaluated node.
pub fn solve_traced(model: &MilpModel, opts: &SolveOptions) -> Result<(Solution, Vec<TraceEntry>)> {
    let mut trace = Vec::new();
    let sol = solve_inner(model, opts, Some(&mut trace))?;
    Ok((sol, trace))
}

fn solve_inner(model: &MilpModel, opts: &SolveOptions, trace: Option<&mut Vec<TraceEntry>>) -> Result<Solution> {
    let start = Instant::now();
    let reduced = ReducedProblem::from_model(model);
    if let Some(rp) = &reduced {
        if rp.profit_upper_bound() <= TRIVIAL_TOL {
            let mut sol = Solution::from_values(model, vec![0.0; model.num_variables()], Status::Trivial);
            sol.bound = rp.profit_upper_bound().max(0.0);
            sol.seconds = start.elapsed().as_secs_f64();
            return Ok(sol);
        }
    }
    let mut sol = match (&reduced, opts.engine) {
        (Some(rp), Engine::Auto | Engine::Structured) => match structured::Search::new(rp) {
            Some(search) => search.run(model, opts, start, trace)?,
            None => generic::branch_and_bound(model, opts, start, reduced.as_ref(), trace)?,
        },
        _ => generic::branch_and_bound(model, opts, start, reduced.as_ref(), trace)?,
    };
    sol.seconds = start.elapsed().as_secs_f64();
    Ok(sol)
}
