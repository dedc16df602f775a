//! LP-based branch and bound for arbitrary models.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::simplex::{solve_lp, LpProblem, LpStatus};
use super::{prune_tol, relative_gap, structured, SolveOptions, TraceEntry};
use crate::error::{Error, Result};
use crate::milp::{MilpModel, ObjSense, ReducedProblem, Solution, Status, VarKind, VarTag};

const INT_TOL: f64 = 1e-6;

/// A subproblem: binaries fixed so far and the bound inherited from the
/// parent relaxation (in maximisation sense).
#[derive(Debug, Clone, PartialEq)]
pub struct BnBNode {
    pub fixed: Vec<(usize, bool)>,
    pub bound: f64,
    pub depth: usize,
    /// Variable branched on to create this node.
    pub branch: Option<VarTag>,
}

struct Queued {
    node: BnBNode,
    seq: u64,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // best bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        self.node.bound.total_cmp(&other.node.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

fn class(tag: VarTag) -> u8 {
    match tag {
        VarTag::Price { .. } => 0,
        VarTag::Service { .. } => 1,
        VarTag::Open { .. } => 2,
        _ => 3,
    }
}

struct Relaxation<'a> {
    model: &'a MilpModel,
    lp: LpProblem,
    sign: f64,
    binaries: Vec<usize>,
}

impl<'a> Relaxation<'a> {
    fn new(model: &'a MilpModel) -> Self {
        let n = model.num_variables();
        let sign = if model.sense == ObjSense::Minimize { -1.0 } else { 1.0 };
        let mut lp = LpProblem::new(n);
        for &(v, c) in &model.objective {
            lp.objective[v] += sign * c;
        }
        let mut binaries = Vec::new();
        for (v, var) in model.variables.iter().enumerate() {
            lp.lower[v] = var.lower;
            lp.upper[v] = var.upper;
            if var.kind == VarKind::Binary {
                lp.lower[v] = lp.lower[v].max(0.0);
                lp.upper[v] = lp.upper[v].min(1.0);
                binaries.push(v);
            }
        }
        for c in &model.constraints {
            lp.add_row(c.terms.clone(), c.sense, c.rhs);
        }
        Relaxation { model, lp, sign, binaries }
    }

    fn solve(&mut self, fixed: &[(usize, bool)]) -> Result<(LpStatus, Vec<f64>, f64)> {
        let saved: Vec<(usize, f64, f64)> = fixed.iter().map(|&(v, _)| (v, self.lp.lower[v], self.lp.upper[v])).collect();
        for &(v, on) in fixed {
            let x = if on { 1.0 } else { 0.0 };
            self.lp.lower[v] = x;
            self.lp.upper[v] = x;
        }
        let result = solve_lp(&self.lp);
        for (v, lo, up) in saved.into_iter().rev() {
            self.lp.lower[v] = lo;
            self.lp.upper[v] = up;
        }
        let s = result?;
        Ok((s.status, s.x, s.objective))
    }

    /// Most fractional binary of the highest-priority class.
    fn branching(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(u8, f64, usize)> = None;
        for &v in &self.binaries {
            let frac = x[v].min(1.0 - x[v]);
            if frac <= INT_TOL {
                continue;
            }
            let c = class(self.model.variables[v].tag);
            let better = match best {
                None => true,
                Some((bc, bf, _)) => c < bc || (c == bc && frac > bf),
            };
            if better {
                best = Some((c, frac, v));
            }
        }
        best.map(|(_, _, v)| v)
    }

    /// Fixes every binary at its rounded value and re-solves for the
    /// continuous part. `None` if that point is infeasible.
    fn polish(&mut self, x: &[f64]) -> Result<Option<Vec<f64>>> {
        let fixed: Vec<(usize, bool)> = self.binaries.iter().map(|&v| (v, x[v] > 0.5)).collect();
        let (status, y, _) = self.solve(&fixed)?;
        Ok((status == LpStatus::Optimal).then_some(y))
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.sign * self.model.objective_value(x)
    }
}

/// Exact branch and bound on `model`. With the reduced layout available the
/// incumbent is warm-started from the upper bound's offer pattern.
pub(crate) fn branch_and_bound(
    model: &MilpModel,
    opts: &SolveOptions,
    start: Instant,
    reduced: Option<&ReducedProblem>,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> Result<Solution> {
    let deadline = opts.deadline(start);
    let mut rel = Relaxation::new(model);
    let sign = rel.sign;

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let zero = vec![0.0; model.num_variables()];
    let zero_ok = model.variables.iter().all(|v| v.lower <= 0.0 && v.upper >= 0.0)
        && model.violations(&zero, 1e-9).is_empty();
    if zero_ok {
        incumbent = Some((rel.value(&zero), zero));
    }
    if let Some(values) = reduced.and_then(|rp| structured::warm_start_values(rp, model)) {
        if model.violations(&values, 1e-7).is_empty() {
            let v = rel.value(&values);
            if incumbent.as_ref().map_or(true, |(b, _)| v > *b) {
                incumbent = Some((v, values));
            }
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut nodes = 0u64;
    let mut current = Some(BnBNode { fixed: Vec::new(), bound: f64::INFINITY, depth: 0, branch: None });
    let mut timed_out = false;

    loop {
        let node = match current.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(Queued { node, .. }) => node,
                None => break,
            },
        };
        let inc = incumbent.as_ref().map_or(f64::NEG_INFINITY, |(v, _)| *v);
        if node.bound <= inc + prune_tol(inc) {
            continue;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            heap.push(Queued { node, seq });
            timed_out = true;
            break;
        }
        nodes += 1;
        let (status, x, obj) = rel.solve(&node.fixed)?;
        match status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(Error::Solver("linear relaxation is unbounded".into())),
            LpStatus::Optimal => {}
        }
        let bound = obj.min(node.bound);
        let mut entry = TraceEntry { depth: node.depth, parent_bound: node.bound, bound, feasible: None };
        if bound <= inc + prune_tol(inc) {
            if let Some(t) = trace.as_deref_mut() {
                t.push(entry);
            }
            continue;
        }
        match rel.branching(&x) {
            None => {
                if let Some(y) = rel.polish(&x)? {
                    let v = rel.value(&y);
                    entry.feasible = Some(v);
                    if v > inc {
                        incumbent = Some((v, y));
                    }
                }
                if let Some(t) = trace.as_deref_mut() {
                    t.push(entry);
                }
            }
            Some(v) => {
                if let Some(t) = trace.as_deref_mut() {
                    t.push(entry);
                }
                let tag = model.variables[v].tag;
                let child = |on: bool| {
                    let mut fixed = node.fixed.clone();
                    fixed.push((v, on));
                    BnBNode { fixed, bound, depth: node.depth + 1, branch: Some(tag) }
                };
                let up_first = x[v] >= 0.5;
                let (first, second) = (child(up_first), child(!up_first));
                seq += 1;
                heap.push(Queued { node: second, seq });
                current = Some(first);
            }
        }
    }

    let status = match (&incumbent, timed_out) {
        (_, true) => Status::TimeLimit,
        (Some(_), false) => Status::Optimal,
        (None, false) => Status::Infeasible,
    };
    let mut sol = match incumbent {
        Some((_, values)) => Solution::from_values(model, values, status),
        None => Solution::empty(status),
    };
    if timed_out {
        let inc = sign * sol.objective;
        let open_bound = heap.iter().map(|q| q.node.bound).fold(inc, f64::max);
        sol.bound = sign * open_bound;
        sol.gap = relative_gap(sol.objective, sol.bound);
    }
    sol.nodes = nodes;
    Ok(sol)
}
