//! Branch and bound specialised to the reduced layout.
//!
//! Once the set `O` of open facilities is fixed, the remaining decisions
//! split by shipper into offer patterns (at most one `(service, price)` per
//! category, one price per service, the offer cap and the minimum demands
//! respected), coupled only through the capacity rows. Relaxing those with
//! multipliers `λ >= 0` gives the bound
//!
//! ```text
//! L(λ) = Σ_{i∈O} (λ_i u_i - f_i)
//!      + Σ_n max_pattern Σ_{(k,m,p)} [ρ d_k q - Σ_{j∈k} min_{i∈O} (ρ c_ij + λ_i γ d_j)]
//! ```
//!
//! strengthened by keeping the aggregate row `Σ γ d (offered) <= Σ_{i∈O} u_i`
//! in the subproblem: each shipper contributes a Pareto front of
//! (capacity used, best value) over its patterns and the fronts are merged
//! like a knapsack. `L` is minimised by projected subgradient steps. Open
//! sets are
//! searched in decreasing order of their root bound; within a set, shippers
//! are fixed one at a time, children in decreasing order of their estimate,
//! and complete patterns are priced with the exact transportation problem.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use super::transport::assign;
use super::{prune_tol, relative_gap, SolveOptions, TraceEntry};
use crate::error::Result;
use crate::milp::{MilpModel, ReducedProblem, Solution, Status, VarTag};

const ROOT_ITERS: usize = 60;
const NODE_ITERS: usize = 10;
const PATTERN_LIMIT: usize = 2_000_000;
const MAX_FACILITIES: usize = 20;

/// A complete first stage with its optimal allocation.
#[derive(Debug, Clone)]
struct Candidate {
    value: f64,
    open: Vec<usize>,
    /// Pattern index per shipper; empty for the do-nothing solution.
    patterns: Vec<usize>,
    /// `(customer, slot, price)` of each allocated customer.
    who: Vec<(usize, usize, usize)>,
    /// Fractions per allocated customer over `open`.
    fractions: Vec<Vec<f64>>,
}

impl Candidate {
    fn nothing() -> Self {
        Candidate { value: 0.0, open: Vec::new(), patterns: Vec::new(), who: Vec::new(), fractions: Vec::new() }
    }
}

struct Shared {
    best_bits: AtomicU64,
    best: Mutex<Candidate>,
    stop: AtomicBool,
    nodes: AtomicU64,
    deadline: Option<Instant>,
    trace: Option<Mutex<Vec<TraceEntry>>>,
}

impl Shared {
    fn incumbent(&self) -> f64 {
        f64::from_bits(self.best_bits.load(Ordering::Acquire))
    }

    fn offer(&self, cand: Candidate) {
        let mut best = self.best.lock().expect("incumbent lock");
        if cand.value > best.value {
            self.best_bits.store(cand.value.to_bits(), Ordering::Release);
            *best = cand;
        }
    }

    fn timed_out(&self) -> bool {
        if self.stop.load(Ordering::Relaxed) {
            return true;
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.stop.store(true, Ordering::Relaxed);
            return true;
        }
        false
    }

    fn record(&self, entry: TraceEntry) {
        if let Some(t) = &self.trace {
            t.lock().expect("trace lock").push(entry);
        }
    }
}

struct Root {
    bound: f64,
    lambda: Vec<f64>,
    argmax: Vec<usize>,
    done: bool,
}

pub(crate) struct Search<'a> {
    rp: &'a ReducedProblem,
    /// `(category, slot, price)` of every option.
    options: Vec<(usize, usize, usize)>,
    /// Per shipper, each pattern as a sorted list of option indices. The
    /// empty pattern comes first.
    patterns: Vec<Vec<Vec<u32>>>,
    /// Capacity used by each pattern, `Σ γ d` over its customers.
    usage: Vec<Vec<f64>>,
    /// Pattern indices of each shipper by increasing usage.
    by_usage: Vec<Vec<usize>>,
}

/// One point of a (usage, value) Pareto front, with the pattern chosen for
/// each shipper it covers.
#[derive(Debug, Clone)]
struct Point {
    usage: f64,
    value: f64,
    picks: Vec<usize>,
}

/// Keeps the points whose value beats every point of smaller usage.
fn pareto(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.usage.total_cmp(&b.usage).then(b.value.total_cmp(&a.value)));
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().map_or(true, |l| p.value > l.value) {
            out.push(p);
        }
    }
    out
}

fn merge(a: &[Point], b: &[Point]) -> Vec<Point> {
    let mut pts = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut picks = x.picks.clone();
            picks.extend_from_slice(&y.picks);
            pts.push(Point { usage: x.usage + y.usage, value: x.value + y.value, picks });
        }
    }
    pareto(pts)
}

/// Best point using at most `cap`.
fn best_within(front: &[Point], cap: f64) -> Option<&Point> {
    let k = front.partition_point(|p| p.usage <= cap);
    k.checked_sub(1).map(|i| &front[i])
}

fn capacity_slack(total: f64) -> f64 {
    1e-9 * total.abs().max(1.0)
}

impl<'a> Search<'a> {
    /// `None` when the pattern space is too large for this engine.
    pub(crate) fn new(rp: &'a ReducedProblem) -> Option<Self> {
        if rp.facilities.len() > MAX_FACILITIES {
            return None;
        }
        let mut options = Vec::new();
        let mut base = Vec::with_capacity(rp.categories.len());
        for (c, cat) in rp.categories.iter().enumerate() {
            let mut b = Vec::with_capacity(cat.services.len());
            for (s, cs) in cat.services.iter().enumerate() {
                b.push(options.len());
                for p in 0..cs.revenue.len() {
                    options.push((c, s, p));
                }
            }
            base.push(b);
        }
        let mut patterns = Vec::with_capacity(rp.shippers.len());
        let mut total = 0usize;
        for sh in 0..rp.shippers.len() {
            let pats = shipper_patterns(rp, sh, &base, PATTERN_LIMIT.saturating_sub(total))?;
            total += pats.len();
            patterns.push(pats);
        }
        let usage: Vec<Vec<f64>> = patterns
            .iter()
            .map(|pats| {
                pats.iter()
                    .map(|pat| {
                        pat.iter()
                            .map(|&o| {
                                let (c, sl, _) = options[o as usize];
                                rp.categories[c].customers.iter().map(|&cu| rp.customers[cu].uses[sl].usage).sum::<f64>()
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let by_usage = usage
            .iter()
            .map(|u: &Vec<f64>| {
                let mut idx: Vec<usize> = (0..u.len()).collect();
                idx.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Some(Search { rp, options, patterns, usage, by_usage })
    }

    fn open_capacity(&self, open: &[usize]) -> f64 {
        open.iter().map(|&f| self.rp.facilities[f].capacity).sum()
    }

    /// Pareto front of one shipper's patterns under option values `v`.
    fn shipper_front(&self, n: usize, v: &[f64]) -> Vec<Point> {
        let mut out: Vec<Point> = Vec::new();
        for &i in &self.by_usage[n] {
            let val = Self::pattern_value(&self.patterns[n][i], v);
            let u = self.usage[n][i];
            match out.last_mut() {
                Some(l) if val <= l.value => {}
                Some(l) if u == l.usage => {
                    l.value = val;
                    l.picks[0] = i;
                }
                _ => out.push(Point { usage: u, value: val, picks: vec![i] }),
            }
        }
        out
    }

    /// Merged front of shippers `from..`.
    fn tail_front(&self, from: usize, v: &[f64]) -> Vec<Point> {
        let mut front = vec![Point { usage: 0.0, value: 0.0, picks: Vec::new() }];
        for n in from..self.patterns.len() {
            front = merge(&front, &self.shipper_front(n, v));
        }
        front
    }

    fn option_values(&self, open: &[usize], lambda: &[f64], v: &mut Vec<f64>) {
        v.clear();
        for &(c, s, p) in &self.options {
            let cat = &self.rp.categories[c];
            let mut val = cat.services[s].revenue[p];
            for &cu in &cat.customers {
                let u = &self.rp.customers[cu].uses[s];
                let row = &u.cost[p];
                let best = open.iter().map(|&f| row[f] + lambda[f] * u.usage).fold(f64::INFINITY, f64::min);
                val -= best;
            }
            v.push(val);
        }
    }

    fn pattern_value(pat: &[u32], v: &[f64]) -> f64 {
        pat.iter().map(|&o| v[o as usize]).sum()
    }

    fn constant(&self, open: &[usize], lambda: &[f64]) -> f64 {
        open.iter()
            .map(|&f| lambda[f] * self.rp.facilities[f].capacity - self.rp.facilities[f].fixed_cost)
            .sum()
    }

    /// `L(λ)` with the first `fixed.len()` shippers fixed; fills the
    /// maximising pattern of every shipper into `argmax`. `-inf` when the
    /// fixed patterns alone exceed the open capacity.
    fn lagrangian(&self, open: &[usize], lambda: &[f64], fixed: &[usize], v: &mut Vec<f64>, argmax: &mut [usize]) -> f64 {
        self.option_values(open, lambda, v);
        let mut total = self.constant(open, lambda);
        let mut used = 0.0;
        for (n, &i) in fixed.iter().enumerate() {
            total += Self::pattern_value(&self.patterns[n][i], v);
            used += self.usage[n][i];
            argmax[n] = i;
        }
        let cap = self.open_capacity(open);
        let front = self.tail_front(fixed.len(), v);
        match best_within(&front, cap - used + capacity_slack(cap)) {
            Some(p) => {
                argmax[fixed.len()..].copy_from_slice(&p.picks);
                total + p.value
            }
            None => f64::NEG_INFINITY,
        }
    }

    /// `∂L/∂λ_i = u_i - load_i` at the chosen patterns.
    fn subgradient(&self, open: &[usize], lambda: &[f64], chosen: &[usize], g: &mut [f64]) {
        g.iter_mut().for_each(|x| *x = 0.0);
        for &f in open {
            g[f] = self.rp.facilities[f].capacity;
        }
        for (n, &pi) in chosen.iter().enumerate() {
            for &o in &self.patterns[n][pi] {
                let (c, s, p) = self.options[o as usize];
                for &cu in &self.rp.categories[c].customers {
                    let u = &self.rp.customers[cu].uses[s];
                    let mut arg = open[0];
                    let mut best = f64::INFINITY;
                    for &f in open {
                        let x = u.cost[p][f] + lambda[f] * u.usage;
                        if x < best {
                            best = x;
                            arg = f;
                        }
                    }
                    g[arg] -= u.usage;
                }
            }
        }
    }

    /// Projected subgradient descent on `L`, starting at `lambda`. Stops
    /// early once the bound falls below the incumbent.
    fn dual(&self, sh: &Shared, open: &[usize], fixed: &[usize], lambda: &[f64], iters: usize) -> Root {
        let nf = self.rp.facilities.len();
        let mut lam = lambda.to_vec();
        let mut v = Vec::with_capacity(self.options.len());
        let mut argmax = vec![0; self.patterns.len()];
        let mut g = vec![0.0; nf];
        let mut best = Root { bound: f64::INFINITY, lambda: lam.clone(), argmax: argmax.clone(), done: true };
        let mut theta = 1.0;
        let mut stall = 0;
        for it in 0..iters {
            let l = self.lagrangian(open, &lam, fixed, &mut v, &mut argmax);
            if l < best.bound {
                if l < best.bound - 1e-9 * l.abs().max(1.0) {
                    stall = 0;
                } else {
                    stall += 1;
                }
                best.bound = l;
                best.lambda.clone_from(&lam);
                best.argmax.clone_from(&argmax);
            } else {
                stall += 1;
            }
            if stall >= 2 {
                theta *= 0.5;
                stall = 0;
            }
            let inc = sh.incumbent();
            if best.bound <= inc + prune_tol(inc) || it + 1 == iters {
                break;
            }
            self.subgradient(open, &lam, &argmax, &mut g);
            let mut norm2 = 0.0;
            for &f in open {
                if lam[f] <= 0.0 && g[f] > 0.0 {
                    g[f] = 0.0;
                }
                norm2 += g[f] * g[f];
            }
            if norm2 <= 1e-18 {
                break;
            }
            let step = theta * (l - inc) / norm2;
            for &f in open {
                lam[f] = (lam[f] - step * g[f]).max(0.0);
            }
        }
        best
    }

    /// Exact value of fixed patterns over `open`; `None` if the offered
    /// demand does not fit.
    fn leaf(&self, open: &[usize], fixed: &[usize]) -> Option<Candidate> {
        let mut revenue = 0.0;
        let mut usage = Vec::new();
        let mut cost = Vec::new();
        let mut who = Vec::new();
        for (n, &pi) in fixed.iter().enumerate() {
            for &o in &self.patterns[n][pi] {
                let (c, s, p) = self.options[o as usize];
                let cat = &self.rp.categories[c];
                revenue += cat.services[s].revenue[p];
                for &cu in &cat.customers {
                    let u = &self.rp.customers[cu].uses[s];
                    usage.push(u.usage);
                    cost.push(open.iter().map(|&f| u.cost[p][f]).collect::<Vec<f64>>());
                    who.push((cu, s, p));
                }
            }
        }
        let capacity: Vec<f64> = open.iter().map(|&f| self.rp.facilities[f].capacity).collect();
        let t = assign(&usage, &capacity, &cost)?;
        let fixed_cost: f64 = open.iter().map(|&f| self.rp.facilities[f].fixed_cost).sum();
        Some(Candidate {
            value: revenue - t.cost - fixed_cost,
            open: open.to_vec(),
            patterns: fixed.to_vec(),
            who,
            fractions: t.fraction,
        })
    }

    /// Every category takes its best option at the cheapest facility, as in
    /// the profit upper bound; shippers whose choice is not a valid pattern
    /// offer nothing. Priced with all facilities open, then with only the
    /// facilities that plan uses.
    fn warm_start(&self) -> Option<Candidate> {
        if self.rp.facilities.is_empty() || self.patterns.is_empty() {
            return None;
        }
        let all: Vec<usize> = (0..self.rp.facilities.len()).collect();
        let lambda = vec![0.0; all.len()];
        let mut v = Vec::new();
        self.option_values(&all, &lambda, &mut v);
        let mut chosen = Vec::with_capacity(self.patterns.len());
        for (n, sh) in self.rp.shippers.iter().enumerate() {
            let mut pat: Vec<u32> = Vec::new();
            for &c in &sh.categories {
                let best = self
                    .options
                    .iter()
                    .enumerate()
                    .filter(|(_, &(oc, _, _))| oc == c)
                    .max_by(|a, b| v[a.0].total_cmp(&v[b.0]).then(b.0.cmp(&a.0)));
                if let Some((o, _)) = best {
                    if v[o] > 0.0 {
                        pat.push(o as u32);
                    }
                }
            }
            pat.sort_unstable();
            chosen.push(self.patterns[n].iter().position(|p| *p == pat).unwrap_or(0));
        }
        let first = self.leaf(&all, &chosen)?;
        let mut used: Vec<usize> = Vec::new();
        for row in &first.fractions {
            for (fi, &x) in row.iter().enumerate() {
                if x > 0.0 && !used.contains(&first.open[fi]) {
                    used.push(first.open[fi]);
                }
            }
        }
        used.sort_unstable();
        match self.leaf(&used, &chosen) {
            Some(second) if !used.is_empty() && second.value > first.value => Some(second),
            _ => Some(first),
        }
    }

    fn dfs(&self, sh: &Shared, open: &[usize], fixed: &mut Vec<usize>, lambda: &[f64], bound: f64) -> bool {
        let d = fixed.len();
        let last = d + 1 == self.patterns.len();
        let mut v = Vec::with_capacity(self.options.len());
        self.option_values(open, lambda, &mut v);
        let mut rest = self.constant(open, lambda);
        let mut used = 0.0;
        for (n, &pi) in fixed.iter().enumerate() {
            rest += Self::pattern_value(&self.patterns[n][pi], &v);
            used += self.usage[n][pi];
        }
        let cap = self.open_capacity(open);
        let room = cap - used + capacity_slack(cap);
        let tail = self.tail_front(d + 1, &v);
        let mut kids: Vec<(f64, usize)> = self.patterns[d]
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                let t = best_within(&tail, room - self.usage[d][i])?;
                Some((rest + Self::pattern_value(p, &v) + t.value, i))
            })
            .collect();
        kids.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (est, idx) in kids {
            if sh.timed_out() {
                return false;
            }
            let est = est.min(bound);
            let inc = sh.incumbent();
            if est <= inc + prune_tol(inc) {
                break;
            }
            sh.nodes.fetch_add(1, Ordering::Relaxed);
            fixed.push(idx);
            if last {
                let cand = self.leaf(open, fixed);
                sh.record(TraceEntry {
                    depth: d + 1,
                    parent_bound: bound,
                    bound: est,
                    feasible: cand.as_ref().map(|c| c.value),
                });
                if let Some(c) = cand {
                    sh.offer(c);
                }
            } else {
                let child = self.dual(sh, open, fixed, lambda, NODE_ITERS);
                let b = child.bound.min(est);
                sh.record(TraceEntry { depth: d + 1, parent_bound: bound, bound: b, feasible: None });
                let inc = sh.incumbent();
                if b > inc + prune_tol(inc) && !self.dfs(sh, open, fixed, &child.lambda, b) {
                    fixed.pop();
                    return false;
                }
            }
            fixed.pop();
        }
        true
    }

    fn root(&self, sh: &Shared, open: &[usize]) -> Root {
        if sh.timed_out() {
            return Root {
                bound: self.rp.profit_upper_bound(),
                lambda: Vec::new(),
                argmax: Vec::new(),
                done: false,
            };
        }
        let lambda = vec![0.0; self.rp.facilities.len()];
        let r = self.dual(sh, open, &[], &lambda, ROOT_ITERS);
        sh.record(TraceEntry { depth: 0, parent_bound: f64::INFINITY, bound: r.bound, feasible: None });
        r
    }

    /// Searches one open set; `false` if interrupted by the time limit.
    fn explore(&self, sh: &Shared, open: &[usize], root: &Root) -> bool {
        if !root.done {
            return false;
        }
        let inc = sh.incumbent();
        if root.bound <= inc + prune_tol(inc) {
            return true;
        }
        if self.patterns.is_empty() {
            return true;
        }
        if let Some(c) = self.leaf(open, &root.argmax) {
            sh.offer(c);
        }
        sh.nodes.fetch_add(1, Ordering::Relaxed);
        self.dfs(sh, open, &mut Vec::new(), &root.lambda, root.bound)
    }

    fn to_values(&self, model: &MilpModel, cand: &Candidate) -> Vec<f64> {
        let index: HashMap<VarTag, usize> =
            model.variables.iter().enumerate().map(|(i, v)| (v.tag, i)).collect();
        let mut x = vec![0.0; model.num_variables()];
        let mut set = |tag: VarTag, val: f64| {
            if let Some(&i) = index.get(&tag) {
                x[i] = val;
            }
        };
        let rp = self.rp;
        for &f in &cand.open {
            set(VarTag::Open { i: rp.facilities[f].id }, 1.0);
        }
        for (n, &pi) in cand.patterns.iter().enumerate() {
            for &o in &self.patterns[n][pi] {
                let (c, s, p) = self.options[o as usize];
                let cat = &rp.categories[c];
                let (sid, k, m) = (rp.shippers[cat.shipper].id, cat.id, cat.services[s].service);
                set(VarTag::Price { n: sid, m, p }, 1.0);
                set(VarTag::Service { n: sid, k, m }, 1.0);
                set(VarTag::OfferLink { n: sid, k, m, p }, 1.0);
            }
        }
        for (t, &(cu, s, p)) in cand.who.iter().enumerate() {
            let cust = &rp.customers[cu];
            let m = rp.categories[cust.category].services[s].service;
            for (fi, &f) in cand.open.iter().enumerate() {
                let w = cand.fractions[t][fi];
                if w > 0.0 {
                    let i = rp.facilities[f].id;
                    set(VarTag::Assign { i, j: cust.id, m }, w);
                    set(VarTag::CostLink { i, j: cust.id, m, p }, w);
                }
            }
        }
        x
    }

    pub(crate) fn run(
        &self,
        model: &MilpModel,
        opts: &SolveOptions,
        start: Instant,
        trace: Option<&mut Vec<TraceEntry>>,
    ) -> Result<Solution> {
        let sh = Shared {
            best_bits: AtomicU64::new(0f64.to_bits()),
            best: Mutex::new(Candidate::nothing()),
            stop: AtomicBool::new(false),
            nodes: AtomicU64::new(0),
            deadline: opts.deadline(start),
            trace: trace.is_some().then(|| Mutex::new(Vec::new())),
        };
        // opening nothing is the only option with no facility, worth exactly 0
        sh.record(TraceEntry { depth: 0, parent_bound: f64::INFINITY, bound: 0.0, feasible: Some(0.0) });
        if let Some(c) = self.warm_start() {
            sh.offer(c);
        }
        let nf = self.rp.facilities.len();
        let sets: Vec<Vec<usize>> = (1usize..1 << nf)
            .map(|mask| (0..nf).filter(|f| mask >> f & 1 == 1).collect())
            .collect();

        let roots: Vec<Root> = self.for_each(opts.workers, &sets, |open| self.root(&sh, open));
        let mut order: Vec<usize> = (0..sets.len()).collect();
        order.sort_by(|&a, &b| roots[b].bound.total_cmp(&roots[a].bound).then(a.cmp(&b)));
        let ordered: Vec<usize> = order.clone();
        let done: Vec<bool> = self.for_each(opts.workers, &ordered, |&s| self.explore(&sh, &sets[s], &roots[s]));

        let timed_out = done.iter().any(|d| !d);
        let best = sh.best.lock().expect("incumbent lock").clone();
        let status = if timed_out { Status::TimeLimit } else { Status::Optimal };
        let mut sol = Solution::from_values(model, self.to_values(model, &best), status);
        if timed_out {
            let open_bound = ordered
                .iter()
                .zip(&done)
                .filter(|(_, d)| !**d)
                .map(|(&s, _)| roots[s].bound)
                .fold(sol.objective, f64::max);
            sol.bound = open_bound;
            sol.gap = relative_gap(sol.objective, sol.bound);
        }
        sol.nodes = sh.nodes.load(Ordering::Relaxed);
        if let (Some(out), Some(t)) = (trace, sh.trace) {
            out.extend(t.into_inner().expect("trace lock"));
        }
        Ok(sol)
    }

    /// Maps over `items` in order, on a pool of `workers` threads when
    /// more than one is requested.
    fn for_each<T: Sync, R: Send>(&self, workers: usize, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        #[cfg(feature = "parallel")]
        if workers > 1 {
            use rayon::prelude::*;
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                return pool.install(|| items.par_iter().map(&f).collect());
            }
        }
        let _ = workers;
        items.iter().map(f).collect()
    }
}

/// Valid offer patterns of one shipper, or `None` past `limit`.
fn shipper_patterns(rp: &ReducedProblem, sh: usize, base: &[Vec<usize>], limit: usize) -> Option<Vec<Vec<u32>>> {
    let shipper = &rp.shippers[sh];
    let cats = &shipper.categories;
    let radix: Vec<usize> = cats.iter().map(|&c| rp.categories[c].services.len() + 1).collect();
    let mut slots = vec![0usize; cats.len()];
    let mut out = Vec::new();
    loop {
        // ladders used by this slot choice, with the demand offered on each
        let mut used: Vec<(usize, f64)> = Vec::new();
        for (i, &c) in cats.iter().enumerate() {
            if slots[i] == 0 {
                continue;
            }
            let cat = &rp.categories[c];
            let l = cat.services[slots[i] - 1].ladder;
            match used.iter_mut().find(|(x, _)| *x == l) {
                Some(u) => u.1 += cat.demand,
                None => used.push((l, cat.demand)),
            }
        }
        if used.len() as f64 <= shipper.offer_cap + 1e-9 {
            let levels: Vec<usize> = used.iter().map(|&(l, _)| shipper.ladders[l].min_demand.len()).collect();
            let mut price = vec![0usize; used.len()];
            if levels.iter().all(|&n| n > 0) {
                loop {
                    let ok = used.iter().zip(&price).all(|(&(l, demand), &p)| {
                        let need = shipper.ladders[l].min_demand[p];
                        demand >= need - 1e-9 * need.abs().max(1.0)
                    });
                    if ok {
                        let mut pat: Vec<u32> = Vec::new();
                        for (i, &c) in cats.iter().enumerate() {
                            if slots[i] == 0 {
                                continue;
                            }
                            let s = slots[i] - 1;
                            let l = rp.categories[c].services[s].ladder;
                            let pos = used.iter().position(|&(x, _)| x == l).expect("ladder recorded");
                            pat.push((base[c][s] + price[pos]) as u32);
                        }
                        pat.sort_unstable();
                        out.push(pat);
                        if out.len() > limit {
                            return None;
                        }
                    }
                    if !advance(&mut price, &levels) {
                        break;
                    }
                }
            }
        }
        if !advance(&mut slots, &radix) {
            break;
        }
    }
    Some(out)
}

/// Mixed-radix increment; `false` after the last combination.
fn advance(digits: &mut [usize], radix: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radix) {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

/// Warm-start point for the generic engine, as model values.
pub(crate) fn warm_start_values(rp: &ReducedProblem, model: &MilpModel) -> Option<Vec<f64>> {
    let search = Search::new(rp)?;
    let cand = search.warm_start()?;
    (cand.value > 0.0).then(|| search.to_values(model, &cand))
}
