//! Dense-tableau two-phase primal simplex.
//!
//! The problem is brought to standard form: lower bounds are shifted out,
//! variables bounded only above are mirrored, free variables are split,
//! fixed variables are substituted, finite upper bounds become rows and
//! single-variable rows become bounds. Phase 1 minimises the sum of
//! artificials, phase 2 the (negated) objective. Pricing is Dantzig's rule;
//! after a run of degenerate pivots, or if the first attempt fails its
//! residual check, the solve restarts with Bland's rule.

use crate::error::{Error, Result};
use crate::milp::Sense;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
/// Primal feasibility tolerance on every original row.
pub const FEAS_TOL: f64 = 1e-7;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `max c x` subject to rows and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(LpRow { terms, sense, rhs });
    }

    /// Largest scaled violation of any row or bound at `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.rows {
            let lhs: f64 = row.terms.iter().map(|&(v, a)| a * x[v]).sum();
            let viol = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol / row.rhs.abs().max(1.0));
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }
}

/// How an original variable maps to standard-form columns.
#[derive(Debug, Clone, Copy)]
enum Map {
    Fixed(f64),
    /// `x = offset + x'`
    Shift { col: usize, offset: f64 },
    /// `x = offset - x'`
    Mirror { col: usize, offset: f64 },
    /// `x = x+ - x-`
    Split { pos: usize, neg: usize },
}

struct Standard {
    map: Vec<Map>,
    ncols: usize,
    /// Rows over standard columns with `rhs >= 0` after normalisation.
    rows: Vec<(Vec<(usize, f64)>, Sense, f64)>,
    /// Minimisation cost over standard columns.
    cost: Vec<f64>,
}

fn standardize(p: &LpProblem) -> std::result::Result<Standard, LpStatus> {
    let n = p.num_vars();
    let mut lower = p.lower.clone();
    let mut upper = p.upper.clone();
    let mut rows = Vec::new();

    // single-variable rows become bounds
    for row in &p.rows {
        let terms: Vec<(usize, f64)> = row.terms.iter().copied().filter(|t| t.1 != 0.0).collect();
        if terms.is_empty() {
            let ok = match row.sense {
                Sense::Le => 0.0 <= row.rhs + FEAS_TOL,
                Sense::Ge => 0.0 >= row.rhs - FEAS_TOL,
                Sense::Eq => row.rhs.abs() <= FEAS_TOL,
            };
            if !ok {
                return Err(LpStatus::Infeasible);
            }
            continue;
        }
        if terms.len() == 1 {
            let (v, a) = terms[0];
            let b = row.rhs / a;
            let sense = if a < 0.0 {
                match row.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                }
            } else {
                row.sense
            };
            match sense {
                Sense::Le => upper[v] = upper[v].min(b),
                Sense::Ge => lower[v] = lower[v].max(b),
                Sense::Eq => {
                    lower[v] = lower[v].max(b);
                    upper[v] = upper[v].min(b);
                }
            }
            continue;
        }
        rows.push((terms, row.sense, row.rhs));
    }

    let mut map = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut bound_rows = Vec::new();
    for j in 0..n {
        let (l, u) = (lower[j], upper[j]);
        if l > u + FEAS_TOL * l.abs().max(1.0) {
            return Err(LpStatus::Infeasible);
        }
        let m = if l.is_finite() && u.is_finite() && u <= l {
            Map::Fixed(u)
        } else if l.is_finite() {
            let col = ncols;
            ncols += 1;
            if u.is_finite() {
                bound_rows.push((col, u - l));
            }
            Map::Shift { col, offset: l }
        } else if u.is_finite() {
            let col = ncols;
            ncols += 1;
            Map::Mirror { col, offset: u }
        } else {
            let pos = ncols;
            ncols += 2;
            Map::Split { pos, neg: pos + 1 }
        };
        map.push(m);
    }

    let mut cost = vec![0.0; ncols];
    for (j, &c) in p.objective.iter().enumerate() {
        match map[j] {
            Map::Fixed(_) => {}
            Map::Shift { col, .. } => cost[col] -= c,
            Map::Mirror { col, .. } => cost[col] += c,
            Map::Split { pos, neg } => {
                cost[pos] -= c;
                cost[neg] += c;
            }
        }
    }

    let mut out_rows = Vec::with_capacity(rows.len() + bound_rows.len());
    for (terms, sense, rhs) in rows {
        let mut rhs = rhs;
        let mut st: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (v, a) in terms {
            match map[v] {
                Map::Fixed(x) => rhs -= a * x,
                Map::Shift { col, offset } => {
                    st.push((col, a));
                    rhs -= a * offset;
                }
                Map::Mirror { col, offset } => {
                    st.push((col, -a));
                    rhs -= a * offset;
                }
                Map::Split { pos, neg } => {
                    st.push((pos, a));
                    st.push((neg, -a));
                }
            }
        }
        if st.is_empty() {
            let ok = match sense {
                Sense::Le => 0.0 <= rhs + FEAS_TOL,
                Sense::Ge => 0.0 >= rhs - FEAS_TOL,
                Sense::Eq => rhs.abs() <= FEAS_TOL,
            };
            if !ok {
                return Err(LpStatus::Infeasible);
            }
            continue;
        }
        out_rows.push((st, sense, rhs));
    }
    for (col, ub) in bound_rows {
        out_rows.push((vec![(col, 1.0)], Sense::Le, ub));
    }
    for row in &mut out_rows {
        if row.2 < 0.0 {
            for t in &mut row.0 {
                t.1 = -t.1;
            }
            row.2 = -row.2;
            row.1 = match row.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }
    Ok(Standard { map, ncols, rows: out_rows, cost })
}

struct Tableau {
    m: usize,
    width: usize,
    /// Row-major `m x width`; the last column is the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs, `width` entries (last is minus the objective).
    d: Vec<f64>,
    eligible: Vec<bool>,
    iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    Stalled,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.width - 1]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        self.d = vec![0.0; w];
        self.d[..cost.len()].copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                let row = &self.t[i * w..(i + 1) * w];
                for (dj, &a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let piv = self.t[r * w + c];
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for x in row.iter_mut() {
                *x /= piv;
            }
            row[c] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for chunk in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = chunk[c];
            if f != 0.0 {
                for (x, &p) in chunk.iter_mut().zip(prow.iter()) {
                    *x -= f * p;
                }
                chunk[c] = 0.0;
            }
        }
        let f = self.d[c];
        if f != 0.0 {
            for (x, &p) in self.d.iter_mut().zip(prow.iter()) {
                *x -= f * p;
            }
            self.d[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    fn run(&mut self, bland: bool, max_iter: usize) -> Outcome {
        let mut degenerate = 0usize;
        let mut use_bland = bland;
        let ncols = self.width - 1;
        loop {
            if self.iterations > max_iter {
                return Outcome::Stalled;
            }
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..ncols {
                if !self.eligible[j] {
                    continue;
                }
                let dj = self.d[j];
                if dj < -COST_TOL {
                    if use_bland {
                        enter = Some(j);
                        break;
                    }
                    if dj < best {
                        best = dj;
                        enter = Some(j);
                    }
                }
            }
            let Some(c) = enter else { return Outcome::Optimal };

            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            if ratio < best_ratio - 1e-12 {
                                true
                            } else if ratio <= best_ratio + 1e-12 {
                                if use_bland {
                                    self.basis[i] < self.basis[l]
                                } else {
                                    a > self.at(l, c)
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else { return Outcome::Unbounded };
            if best_ratio <= 1e-12 {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    use_bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }
}

fn solve_standard(std: &Standard, bland: bool) -> std::result::Result<(LpStatus, Vec<f64>, usize), ()> {
    let m = std.rows.len();
    let n = std.ncols;
    let n_slack = std.rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = std.rows.iter().filter(|r| r.1 != Sense::Le).count();
    let ncols = n + n_slack + n_art;
    let width = ncols + 1;
    let mut t = vec![0.0; m * width];
    let mut basis = vec![0; m];
    let mut is_art = vec![false; ncols];
    let (mut s, mut a) = (n, n + n_slack);
    for (i, (terms, sense, rhs)) in std.rows.iter().enumerate() {
        let row = &mut t[i * width..(i + 1) * width];
        for &(col, coef) in terms {
            row[col] += coef;
        }
        row[width - 1] = *rhs;
        match sense {
            Sense::Le => {
                row[s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Sense::Ge => {
                row[s] = -1.0;
                s += 1;
                row[a] = 1.0;
                basis[i] = a;
                is_art[a] = true;
                a += 1;
            }
            Sense::Eq => {
                row[a] = 1.0;
                basis[i] = a;
                is_art[a] = true;
                a += 1;
            }
        }
    }
    let mut tab = Tableau {
        m,
        width,
        t,
        basis,
        d: Vec::new(),
        eligible: vec![true; ncols],
        iterations: 0,
    };
    let max_iter = 50 * (m + ncols) + 1000;

    if n_art > 0 {
        let phase1: Vec<f64> = (0..ncols).map(|j| if is_art[j] { 1.0 } else { 0.0 }).collect();
        tab.set_costs(&phase1);
        match tab.run(bland, max_iter) {
            Outcome::Optimal => {}
            Outcome::Unbounded | Outcome::Stalled => return Err(()),
        }
        let infeas: f64 = (0..m).filter(|&i| is_art[tab.basis[i]]).map(|i| tab.rhs(i)).sum();
        let scale = std.rows.iter().map(|r| r.2).fold(1.0f64, f64::max);
        if infeas > FEAS_TOL * scale {
            return Ok((LpStatus::Infeasible, Vec::new(), tab.iterations));
        }
        // drive remaining artificials out of the basis
        let mut i = 0;
        while i < tab.m {
            if is_art[tab.basis[i]] {
                let col = (0..ncols)
                    .filter(|&j| !is_art[j])
                    .max_by(|&x, &y| tab.at(i, x).abs().total_cmp(&tab.at(i, y).abs()))
                    .filter(|&j| tab.at(i, j).abs() > PIVOT_TOL);
                match col {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        // redundant row
                        let w = tab.width;
                        tab.t.drain(i * w..(i + 1) * w);
                        tab.basis.remove(i);
                        tab.m -= 1;
                        continue;
                    }
                }
            }
            i += 1;
        }
        for j in 0..ncols {
            if is_art[j] {
                tab.eligible[j] = false;
            }
        }
    }

    let mut cost = std.cost.clone();
    cost.resize(ncols, 0.0);
    tab.set_costs(&cost);
    match tab.run(bland, max_iter) {
        Outcome::Optimal => {}
        Outcome::Unbounded => return Ok((LpStatus::Unbounded, Vec::new(), tab.iterations)),
        Outcome::Stalled => return Err(()),
    }
    // dual feasibility of the final basis
    if (0..ncols).any(|j| tab.eligible[j] && tab.d[j] < -1e-7) {
        return Err(());
    }
    let mut xs = vec![0.0; ncols];
    for i in 0..tab.m {
        xs[tab.basis[i]] = tab.rhs(i);
    }
    xs.truncate(n);
    Ok((LpStatus::Optimal, xs, tab.iterations))
}

/// Solves the LP. Numerical failure of the Dantzig run triggers a restart
/// with Bland's rule; a second failure is a solver error.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    let std = match standardize(p) {
        Ok(s) => s,
        Err(status) => {
            return Ok(LpSolution { status, x: Vec::new(), objective: f64::NEG_INFINITY, iterations: 0 })
        }
    };
    let mut total_iter = 0;
    for bland in [false, true] {
        let Ok((status, xs, iters)) = solve_standard(&std, bland) else {
            continue;
        };
        total_iter += iters;
        if status != LpStatus::Optimal {
            let objective = if status == LpStatus::Unbounded { f64::INFINITY } else { f64::NEG_INFINITY };
            return Ok(LpSolution { status, x: Vec::new(), objective, iterations: total_iter });
        }
        let x: Vec<f64> = std
            .map
            .iter()
            .map(|m| match *m {
                Map::Fixed(v) => v,
                Map::Shift { col, offset } => offset + xs[col],
                Map::Mirror { col, offset } => offset - xs[col],
                Map::Split { pos, neg } => xs[pos] - xs[neg],
            })
            .collect();
        if p.max_residual(&x) <= FEAS_TOL {
            let objective = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
            return Ok(LpSolution { status, x, objective, iterations: total_iter });
        }
    }
    Err(Error::Solver("simplex failed to reach a feasible optimal basis, also with Bland's rule".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut p = LpProblem::new(2);
        p.objective = vec![3.0, 5.0];
        p.add_row(vec![(0, 1.0)], Sense::Le, 4.0);
        p.add_row(vec![(1, 2.0)], Sense::Le, 12.0);
        p.add_row(vec![(0, 3.0), (1, 2.0)], Sense::Le, 18.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 6.0, epsilon = 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y (max -x - y), x + y >= 2, x - y = 1 -> (1.5, 0.5)
        let mut p = LpProblem::new(2);
        p.objective = vec![-1.0, -1.0];
        p.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Ge, 2.0);
        p.add_row(vec![(0, 1.0), (1, -1.0)], Sense::Eq, 1.0);
        let s = solve_lp(&p).unwrap();
        assert_abs_diff_eq!(s.objective, -2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 1.5, epsilon = 1e-9);
    }

    #[test]
    fn bounds_free_and_mirrored() {
        // max -|x - 3| style: x free, y <= 5 only; max x + y s.t. x <= 2
        let mut p = LpProblem::new(3);
        p.objective = vec![1.0, 1.0, -1.0];
        p.lower = vec![f64::NEG_INFINITY, f64::NEG_INFINITY, 1.0];
        p.upper = vec![f64::INFINITY, 5.0, 1.0];
        p.add_row(vec![(0, 1.0), (2, 1.0)], Sense::Le, 3.0);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut p = LpProblem::new(1);
        p.upper = vec![0.0];
        p.add_row(vec![(0, 1.0)], Sense::Ge, 1.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);

        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 0.0];
        p.add_row(vec![(0, 1.0), (1, -1.0)], Sense::Le, 1.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);

        let mut p = LpProblem::new(2);
        p.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0);
        p.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Ge, 2.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, cycles under naive Dantzig with lowest-index ties
        let mut p = LpProblem::new(4);
        p.objective = vec![0.75, -20.0, 0.5, -6.0];
        p.add_row(vec![(0, 0.25), (1, -8.0), (2, -1.0), (3, 9.0)], Sense::Le, 0.0);
        p.add_row(vec![(0, 0.5), (1, -12.0), (2, -0.5), (3, 3.0)], Sense::Le, 0.0);
        p.add_row(vec![(2, 1.0)], Sense::Le, 1.0);
        let s = solve_lp(&p).unwrap();
        assert_abs_diff_eq!(s.objective, 1.25, epsilon = 1e-9);
    }

    #[test]
    fn redundant_equalities() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 2.0];
        p.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0);
        p.add_row(vec![(0, 2.0), (1, 2.0)], Sense::Eq, 2.0);
        let s = solve_lp(&p).unwrap();
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-9);
        assert!(p.max_residual(&s.x) <= FEAS_TOL);
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        /// Random bounded LPs: the optimum is feasible and no vertex of a
        /// coarse grid beats it.
        #[test]
        fn random_box_lps(c in prop::collection::vec(-5.0f64..5.0, 3),
                          a in prop::collection::vec(-3.0f64..3.0, 6),
                          b in prop::collection::vec(0.5f64..6.0, 2)) {
            let mut p = LpProblem::new(3);
            p.objective = c.clone();
            p.upper = vec![2.0; 3];
            p.add_row(vec![(0, a[0]), (1, a[1]), (2, a[2])], Sense::Le, b[0]);
            p.add_row(vec![(0, a[3]), (1, a[4]), (2, a[5])], Sense::Le, b[1]);
            let s = solve_lp(&p).unwrap();
            prop_assert_eq!(s.status, LpStatus::Optimal); // origin is feasible
            prop_assert!(p.max_residual(&s.x) <= FEAS_TOL);
            let steps = 8;
            for i in 0..=steps {
                for j in 0..=steps {
                    for k in 0..=steps {
                        let x = [2.0 * i as f64 / steps as f64, 2.0 * j as f64 / steps as f64, 2.0 * k as f64 / steps as f64];
                        if p.max_residual(&x) <= 0.0 {
                            let v: f64 = c.iter().zip(&x).map(|(c, x)| c * x).sum();
                            prop_assert!(v <= s.objective + 1e-7);
                        }
                    }
                }
            }
        }
    }
}
