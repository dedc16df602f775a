use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{MilpModel, VarTag, Violation};
use crate::choice::RhoTable;
use crate::error::{Error, Result};
use crate::instance::{Instance, OfferKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    TimeLimit,
    /// Certified zero-profit instance: nothing is offered or opened.
    Trivial,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::TimeLimit => "time_limit",
            Status::Trivial => "trivial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PriceChoice {
    pub shipper: usize,
    pub service: usize,
    pub price: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ServiceChoice {
    pub shipper: usize,
    pub category: usize,
    pub service: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub facility: usize,
    pub customer: usize,
    pub service: usize,
    pub fraction: f64,
}

/// Objective split into its three parts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    /// `Σ ρ d_k q π`.
    pub revenue: f64,
    /// `Σ ρ c ν`.
    pub assignment_cost: f64,
    /// `Σ f r`.
    pub fixed_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Offer {
    pub shipper: usize,
    pub category: usize,
    pub service: usize,
    pub price: usize,
    pub price_value: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    pub objective: f64,
    /// Best proven upper bound.
    pub bound: f64,
    /// `|bound - objective| / (1e-10 + |objective|)`; zero when optimal.
    pub gap: f64,
    pub nodes: u64,
    pub seconds: f64,
    /// Open facilities `r_i = 1`.
    pub open: Vec<usize>,
    /// `y_n^{mp} = 1`.
    pub prices: Vec<PriceChoice>,
    /// `z_nk^m = 1`.
    pub services: Vec<ServiceChoice>,
    /// Non-zero `w_ij^m`.
    pub allocation: Vec<Allocation>,
    pub report: Report,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offers: Vec<Offer>,
    /// Raw values of every model variable, when produced by a solver.
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl Solution {
    /// Reads first-stage decisions and the allocation from a point of
    /// `model`, rounding binaries.
    pub fn from_values(model: &MilpModel, values: Vec<f64>, status: Status) -> Solution {
        let mut sol = Solution::empty(status);
        for (var, &x) in model.variables.iter().zip(&values) {
            let on = x > 0.5;
            match var.tag {
                VarTag::Open { i } if on => sol.open.push(i),
                VarTag::Price { n, m, p } if on => sol.prices.push(PriceChoice { shipper: n, service: m, price: p }),
                VarTag::Service { n, k, m } if on => {
                    sol.services.push(ServiceChoice { shipper: n, category: k, service: m })
                }
                VarTag::Assign { i, j, m } if x > 1e-12 => sol.allocation.push(Allocation {
                    facility: i,
                    customer: j,
                    service: m,
                    fraction: x,
                }),
                _ => {}
            }
        }
        for &(v, c) in &model.objective {
            let x = values[v];
            match model.variables[v].tag {
                VarTag::Open { .. } => sol.report.fixed_cost -= c * x,
                VarTag::OfferLink { .. } => sol.report.revenue += c * x,
                VarTag::CostLink { .. } => sol.report.assignment_cost -= c * x,
                _ => {}
            }
        }
        sol.objective = model.objective_value(&values);
        sol.bound = sol.objective;
        sol.values = values;
        sol
    }

    /// Nothing opened, nothing offered.
    pub fn empty(status: Status) -> Solution {
        Solution {
            status,
            objective: 0.0,
            bound: 0.0,
            gap: 0.0,
            nodes: 0,
            seconds: 0.0,
            open: Vec::new(),
            prices: Vec::new(),
            services: Vec::new(),
            allocation: Vec::new(),
            report: Report::default(),
            offers: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Fills the per-category offer summary from the chosen `y` and `z`.
    pub fn attach_offers(&mut self, inst: &Instance, rho: &RhoTable) -> Result<()> {
        self.offers.clear();
        for s in &self.services {
            let Some(pc) = self
                .prices
                .iter()
                .find(|p| p.shipper == s.shipper && p.service == s.service)
            else {
                continue;
            };
            let key = OfferKey::new(s.shipper, s.category, s.service, pc.price);
            self.offers.push(Offer {
                shipper: s.shipper,
                category: s.category,
                service: s.service,
                price: pc.price,
                price_value: inst.price(s.shipper, s.service, pc.price)?.price,
                rho: rho.require(key)?,
            });
        }
        Ok(())
    }

    pub fn is_open(&self, i: usize) -> bool {
        self.open.contains(&i)
    }

    pub fn price_of(&self, shipper: usize, service: usize) -> Option<usize> {
        self.prices
            .iter()
            .find(|p| p.shipper == shipper && p.service == service)
            .map(|p| p.price)
    }

    pub fn service_of(&self, shipper: usize, category: usize) -> Option<usize> {
        self.services
            .iter()
            .find(|s| s.shipper == shipper && s.category == category)
            .map(|s| s.service)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Parameter(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Solution> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        crate::instance::parse_json(&text)
    }
}

const FEAS_TOL: f64 = 1e-7;

/// Checks first-stage and allocation constraints of `sol` against the raw
/// instance data. Returns every violated row.
pub fn check_solution(inst: &Instance, sol: &Solution) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut fail = |constraint: String, amount: f64| out.push(Violation { constraint, amount });

    let nf = inst.num_facilities();
    let mut seen_price = std::collections::BTreeSet::new();
    for p in &sol.prices {
        if inst.price(p.shipper, p.service, p.price).is_err() {
            fail(format!("unknown price y_n{}_m{}_p{}", p.shipper, p.service, p.price), 1.0);
        }
        if !seen_price.insert((p.shipper, p.service)) {
            fail(format!("one_price_n{}_m{}", p.shipper, p.service), 1.0);
        }
    }
    for n in 0..inst.num_shippers() {
        let used = sol.prices.iter().filter(|p| p.shipper == n).count();
        let cap = inst.num_categories(n);
        if used > cap {
            fail(format!("offer_cap_n{n}"), (used - cap) as f64);
        }
    }
    let mut seen_service = std::collections::BTreeSet::new();
    for s in &sol.services {
        if s.shipper >= inst.num_shippers()
            || s.category >= inst.num_categories(s.shipper)
            || !inst.category_services(s.shipper, s.category).contains(&s.service)
        {
            fail(format!("unknown service z_n{}_k{}_m{}", s.shipper, s.category, s.service), 1.0);
            continue;
        }
        if !seen_service.insert((s.shipper, s.category)) {
            fail(format!("one_service_n{}_k{}", s.shipper, s.category), 1.0);
        }
        if sol.price_of(s.shipper, s.service).is_none() {
            fail(format!("priced_n{}_k{}_m{}", s.shipper, s.category, s.service), 1.0);
        }
    }
    for &i in &sol.open {
        if i >= nf {
            fail(format!("unknown facility r_i{i}"), 1.0);
        }
    }

    // w[i][j][m] as a dense map over the customers' services
    let mut w = std::collections::HashMap::new();
    for a in &sol.allocation {
        if a.facility >= nf || a.customer >= inst.num_customers() || !inst.customer_services(a.customer).contains(&a.service) {
            fail(format!("unknown allocation w_i{}_j{}_m{}", a.facility, a.customer, a.service), 1.0);
            continue;
        }
        if !(a.fraction >= -FEAS_TOL && a.fraction <= 1.0 + FEAS_TOL) {
            fail(format!("bounds of w_i{}_j{}_m{}", a.facility, a.customer, a.service), a.fraction);
        }
        *w.entry((a.facility, a.customer, a.service)).or_insert(0.0) += a.fraction;
    }
    let w_at = |i: usize, j: usize, m: usize| w.get(&(i, j, m)).copied().unwrap_or(0.0);

    for (i, f) in inst.facilities.iter().enumerate() {
        let open = if sol.is_open(i) { 1.0 } else { 0.0 };
        let mut load = 0.0;
        for (j, c) in inst.customers.iter().enumerate() {
            let mut link = 0.0;
            for &m in inst.customer_services(j) {
                let x = w_at(i, j, m);
                load += x * inst.service_levels[m].gamma * c.demand;
                link += x;
            }
            if link - open > FEAS_TOL {
                fail(format!("open_i{i}_j{j}"), link - open);
            }
        }
        let excess = load - f.capacity * open;
        if excess > FEAS_TOL * f.capacity.max(1.0) {
            fail(format!("capacity_i{i}"), excess);
        }
    }
    for (j, c) in inst.customers.iter().enumerate() {
        for &m in inst.customer_services(j) {
            let z = if sol.service_of(c.shipper, c.category) == Some(m) { 1.0 } else { 0.0 };
            let total: f64 = (0..nf).map(|i| w_at(i, j, m)).sum();
            if (total - z).abs() > FEAS_TOL {
                fail(format!("assign_j{j}_m{m}"), (total - z).abs());
            }
        }
    }
    for p in &sol.prices {
        let Ok(entry) = inst.price(p.shipper, p.service, p.price) else { continue };
        let offered: f64 = (0..inst.num_categories(p.shipper))
            .filter(|&k| sol.service_of(p.shipper, k) == Some(p.service))
            .map(|k| inst.category_demand(p.shipper, k))
            .sum();
        if entry.min_demand - offered > FEAS_TOL * entry.min_demand.max(1.0) {
            fail(format!("min_demand_n{}_m{}", p.shipper, p.service), entry.min_demand - offered);
        }
    }
    out
}

/// Recomputes the objective of `sol` from the instance, independently of
/// any model: `-Σ f r + Σ ρ d_k q [z y] - Σ ρ c w y`.
pub fn evaluate(inst: &Instance, rho: &RhoTable, sol: &Solution) -> Result<f64> {
    let violations = check_solution(inst, sol);
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations));
    }
    let fixed: f64 = sol.open.iter().map(|&i| inst.facilities[i].fixed_cost).sum();
    let mut revenue = 0.0;
    for s in &sol.services {
        let p = sol.price_of(s.shipper, s.service).expect("checked above");
        let r = rho.require(OfferKey::new(s.shipper, s.category, s.service, p))?;
        revenue += r * inst.category_demand(s.shipper, s.category) * inst.price(s.shipper, s.service, p)?.price;
    }
    let mut cost = 0.0;
    for a in &sol.allocation {
        let c = &inst.customers[a.customer];
        if let Some(p) = sol.price_of(c.shipper, a.service) {
            let r = rho.require(OfferKey::new(c.shipper, c.category, a.service, p))?;
            cost += r * inst.cost(a.facility, a.customer, a.service) * a.fraction;
        }
    }
    Ok(revenue - cost - fixed)
}

/// Relaxation bound: each category takes its single best option served at
/// its cheapest facility; if anything is earned at least the cheapest
/// facility must be paid for. A bound `<= 1e-9` certifies that the optimum
/// is zero.
pub fn profit_upper_bound(inst: &Instance, rho: &RhoTable) -> Result<f64> {
    let mut total = 0.0;
    for n in 0..inst.num_shippers() {
        for k in 0..inst.num_categories(n) {
            let d_k = inst.category_demand(n, k);
            let customers = inst.category_customers(n, k);
            let mut best = 0.0f64;
            for &m in inst.category_services(n, k) {
                let serve: f64 = customers
                    .iter()
                    .map(|&j| {
                        (0..inst.num_facilities())
                            .map(|i| inst.cost(i, j, m))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .sum();
                let levels = inst.ladder(n, m).map_or(0, |l| l.entries.len());
                for p in 0..levels {
                    let r = rho.require(OfferKey::new(n, k, m, p))?;
                    let q = inst.price(n, m, p)?.price;
                    best = best.max(r * (d_k * q - serve));
                }
            }
            total += best;
        }
    }
    let min_fixed = inst
        .facilities
        .iter()
        .map(|f| f.fixed_cost)
        .fold(f64::INFINITY, f64::min);
    Ok(if inst.facilities.is_empty() { total } else { total - min_fixed })
}

/// Threshold below which [`profit_upper_bound`] certifies a trivial instance.
pub const TRIVIAL_TOL: f64 = 1e-9;
