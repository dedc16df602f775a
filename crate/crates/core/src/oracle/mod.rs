//! Scenario-level simulation of a first-stage decision.
//!
//! In every scenario each offered category compares its offer with the
//! opt-out on sampled utilities and accepts or rejects. The scenario
//! profit is then
//!
//! * `ReducedConsistent`: the fixed allocation of the solution, restricted
//!   to the accepting categories. Its expectation is exactly the reduced
//!   objective;
//! * `Reallocation`: the accepting customers re-assigned by a fresh
//!   transportation problem at unscaled costs.
//!
//! Scenarios are generated on the fly and evaluated in blocks; means are
//! combined by pairwise summation, so results do not depend on the thread
//! count.

use serde::Serialize;

use crate::choice::{accept_rule, Response, ScenarioSet};
use crate::error::{Error, Result};
use crate::instance::{Instance, OfferKey};
use crate::milp::{check_solution, Allocation, Solution};
use crate::par::{self, Exec};
use crate::solver::assign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ReducedConsistent,
    Reallocation,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::ReducedConsistent => "reduced-consistent",
            Mode::Reallocation => "per-scenario-reallocation",
        })
    }
}

/// One offered category of the first stage, with everything a scenario
/// needs.
#[derive(Debug, Clone)]
struct Offered {
    key: OfferKey,
    v_offer: f64,
    v_optout: f64,
    revenue: f64,
    /// Cost of the category's customers under the solution's allocation.
    fixed_alloc_cost: f64,
    /// `(customer, usage)` of the category's customers.
    customers: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioOutcome {
    pub scenario: usize,
    /// Acceptance per offered category, in the order of `Solution::services`.
    pub accepted: Vec<bool>,
    pub allocation: Vec<Allocation>,
    pub revenue: f64,
    pub cost: f64,
    pub profit: f64,
    /// Price-service pairs `(n, m)` whose accepted demand misses the
    /// minimum demand of the chosen price.
    pub min_demand_violations: Vec<(usize, usize)>,
    /// `false` when re-assignment found no capacity-feasible allocation.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationRate {
    pub shipper: usize,
    pub service: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub mode: Mode,
    pub scenarios: usize,
    /// Mean profit over the feasible scenarios.
    pub mean: f64,
    pub std_error: f64,
    /// Scenarios without a feasible re-assignment; excluded from `mean`.
    pub infeasible: usize,
    pub violation_rates: Vec<ViolationRate>,
}

/// Both modes on the same scenarios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeComparison {
    pub reduced: SimulationReport,
    pub reallocation: SimulationReport,
    /// `reallocation.mean - reduced.mean`.
    pub gap: f64,
}

struct Prepared<'a> {
    inst: &'a Instance,
    sol: &'a Solution,
    offered: Vec<Offered>,
    /// Priced `(n, m, min_demand)` with at least one offered category.
    priced: Vec<(usize, usize, f64)>,
    fixed_cost: f64,
}

impl<'a> Prepared<'a> {
    fn new(inst: &'a Instance, sol: &'a Solution) -> Result<Self> {
        let violations = check_solution(inst, sol);
        if !violations.is_empty() {
            return Err(Error::Infeasible(violations));
        }
        let mut offered = Vec::with_capacity(sol.services.len());
        for s in &sol.services {
            let p = sol.price_of(s.shipper, s.service).ok_or_else(|| {
                Error::Build(format!("service {} of shipper {} has no price", s.service, s.shipper))
            })?;
            let key = OfferKey::new(s.shipper, s.category, s.service, p);
            let members = inst.category_customers(s.shipper, s.category);
            let gamma = inst.service_levels[s.service].gamma;
            let fixed_alloc_cost = sol
                .allocation
                .iter()
                .filter(|a| a.service == s.service && members.contains(&a.customer))
                .map(|a| a.fraction * inst.cost(a.facility, a.customer, a.service))
                .sum();
            offered.push(Offered {
                key,
                v_offer: inst.deterministic_utility(key)?,
                v_optout: inst.optout_utility(s.shipper, s.category)?,
                revenue: inst.category_demand(s.shipper, s.category) * inst.price(s.shipper, s.service, p)?.price,
                fixed_alloc_cost,
                customers: members.iter().map(|&j| (j, gamma * inst.customers[j].demand)).collect(),
            });
        }
        let mut priced = Vec::new();
        for pc in &sol.prices {
            if offered.iter().any(|o| o.key.shipper == pc.shipper && o.key.service == pc.service) {
                priced.push((pc.shipper, pc.service, inst.price(pc.shipper, pc.service, pc.price)?.min_demand));
            }
        }
        let fixed_cost = sol.open.iter().map(|&i| inst.facilities[i].fixed_cost).sum();
        Ok(Prepared { inst, sol, offered, priced, fixed_cost })
    }

    fn outcome(&self, scenarios: &ScenarioSet, s: usize, mode: Mode) -> ScenarioOutcome {
        let accepted: Vec<bool> = self
            .offered
            .iter()
            .map(|o| {
                let k = o.key;
                let e = scenarios.offer_noise(s, k.shipper, k.category, k.service);
                let e0 = scenarios.optout_noise(s, k.shipper, k.category);
                accept_rule(o.v_offer + e, o.v_optout + e0) == Response::Accept
            })
            .collect();

        let mut revenue = 0.0;
        for (o, &a) in self.offered.iter().zip(&accepted) {
            if a {
                revenue += o.revenue;
            }
        }
        let (cost, allocation, feasible) = match mode {
            Mode::ReducedConsistent => {
                let mut cost = 0.0;
                let mut allocation = Vec::new();
                for (o, &a) in self.offered.iter().zip(&accepted) {
                    if !a {
                        continue;
                    }
                    cost += o.fixed_alloc_cost;
                    allocation.extend(self.sol.allocation.iter().filter(|w| {
                        w.service == o.key.service && o.customers.iter().any(|&(j, _)| j == w.customer)
                    }));
                }
                (cost, allocation, true)
            }
            Mode::Reallocation => self.reassign(&accepted),
        };

        let mut min_demand_violations = Vec::new();
        for &(n, m, need) in &self.priced {
            let got: f64 = self
                .offered
                .iter()
                .zip(&accepted)
                .filter(|(o, &a)| a && o.key.shipper == n && o.key.service == m)
                .map(|(o, _)| self.inst.category_demand(n, o.key.category))
                .sum();
            if got < need {
                min_demand_violations.push((n, m));
            }
        }
        ScenarioOutcome {
            scenario: s,
            accepted,
            allocation,
            revenue,
            cost,
            profit: revenue - cost - self.fixed_cost,
            min_demand_violations,
            feasible,
        }
    }

    fn reassign(&self, accepted: &[bool]) -> (f64, Vec<Allocation>, bool) {
        let open = &self.sol.open;
        let mut usage = Vec::new();
        let mut cost = Vec::new();
        let mut who = Vec::new();
        for (o, &a) in self.offered.iter().zip(accepted) {
            if !a {
                continue;
            }
            for &(j, u) in &o.customers {
                usage.push(u);
                cost.push(open.iter().map(|&i| self.inst.cost(i, j, o.key.service)).collect::<Vec<f64>>());
                who.push((j, o.key.service));
            }
        }
        let capacity: Vec<f64> = open.iter().map(|&i| self.inst.facilities[i].capacity).collect();
        match assign(&usage, &capacity, &cost) {
            None => (0.0, Vec::new(), false),
            Some(t) => {
                let mut allocation = Vec::new();
                for (c, &(j, m)) in who.iter().enumerate() {
                    for (f, &x) in t.fraction[c].iter().enumerate() {
                        if x > 0.0 {
                            allocation.push(Allocation { facility: open[f], customer: j, service: m, fraction: x });
                        }
                    }
                }
                (t.cost, allocation, true)
            }
        }
    }
}

/// Outcome of a single scenario.
pub fn scenario_outcome(
    inst: &Instance,
    sol: &Solution,
    scenarios: &ScenarioSet,
    scenario: usize,
    mode: Mode,
) -> Result<ScenarioOutcome> {
    Ok(Prepared::new(inst, sol)?.outcome(scenarios, scenario, mode))
}

/// Outcomes of every scenario, materialised.
pub fn scenario_outcomes(
    inst: &Instance,
    sol: &Solution,
    scenarios: &ScenarioSet,
    mode: Mode,
    exec: Exec,
) -> Result<Vec<ScenarioOutcome>> {
    let prep = Prepared::new(inst, sol)?;
    Ok(par::map_range(exec, scenarios.count, |s| prep.outcome(scenarios, s, mode)))
}

/// Fraction of scenarios in which each priced `(n, m)` misses its minimum
/// demand.
pub fn min_demand_violation_rate(sol: &Solution, outcomes: &[ScenarioOutcome]) -> Vec<ViolationRate> {
    let total = outcomes.len().max(1) as f64;
    let mut pairs: Vec<(usize, usize)> = sol.prices.iter().map(|p| (p.shipper, p.service)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
        .into_iter()
        .filter(|&(n, m)| sol.services.iter().any(|s| s.shipper == n && s.service == m))
        .map(|(n, m)| ViolationRate {
            shipper: n,
            service: m,
            rate: outcomes.iter().filter(|o| o.min_demand_violations.contains(&(n, m))).count() as f64 / total,
        })
        .collect()
}

#[derive(Default)]
struct Block {
    sum: f64,
    sum_sq: f64,
    feasible: usize,
    infeasible: usize,
    violations: Vec<usize>,
}

/// Streams every scenario and summarises the profit distribution.
pub fn simulate(
    inst: &Instance,
    sol: &Solution,
    scenarios: &ScenarioSet,
    mode: Mode,
    exec: Exec,
) -> Result<SimulationReport> {
    if scenarios.count == 0 {
        return Err(Error::Parameter("scenario set is empty".into()));
    }
    let prep = Prepared::new(inst, sol)?;
    let blocks = par::block_reduce(exec, scenarios.count, |range| {
        let mut b = Block { violations: vec![0; prep.priced.len()], ..Block::default() };
        for s in range {
            let o = prep.outcome(scenarios, s, mode);
            for (slot, &(n, m, _)) in prep.priced.iter().enumerate() {
                if o.min_demand_violations.contains(&(n, m)) {
                    b.violations[slot] += 1;
                }
            }
            if o.feasible {
                b.sum += o.profit;
                b.sum_sq += o.profit * o.profit;
                b.feasible += 1;
            } else {
                b.infeasible += 1;
            }
        }
        b
    });
    let sum = par::pairwise_sum(&blocks.iter().map(|b| b.sum).collect::<Vec<_>>());
    let sum_sq = par::pairwise_sum(&blocks.iter().map(|b| b.sum_sq).collect::<Vec<_>>());
    let n = blocks.iter().map(|b| b.feasible).sum::<usize>();
    let infeasible = blocks.iter().map(|b| b.infeasible).sum::<usize>();
    let (mean, std_error) = if n == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let mean = sum / n as f64;
        let var = if n > 1 { ((sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0)).max(0.0) } else { 0.0 };
        (mean, (var / n as f64).sqrt())
    };
    let violation_rates = prep
        .priced
        .iter()
        .enumerate()
        .map(|(slot, &(n, m, _))| ViolationRate {
            shipper: n,
            service: m,
            rate: blocks.iter().map(|b| b.violations[slot]).sum::<usize>() as f64 / scenarios.count as f64,
        })
        .collect();
    Ok(SimulationReport { mode, scenarios: scenarios.count, mean, std_error, infeasible, violation_rates })
}

/// Runs both modes on the same scenarios.
pub fn compare_modes(inst: &Instance, sol: &Solution, scenarios: &ScenarioSet, exec: Exec) -> Result<ModeComparison> {
    let reduced = simulate(inst, sol, scenarios, Mode::ReducedConsistent, exec)?;
    let reallocation = simulate(inst, sol, scenarios, Mode::Reallocation, exec)?;
    let gap = reallocation.mean - reduced.mean;
    Ok(ModeComparison { reduced, reallocation, gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::RhoTable;
    use crate::instance::{generate, GeneratorParams};
    use crate::milp::{build, evaluate, testing, PriceChoice, ServiceChoice, Status};
    use crate::solver::{solve, SolveOptions};

    fn solved(params: GeneratorParams) -> (Instance, Solution) {
        let inst = generate(&params).unwrap();
        let model = build(&inst, &RhoTable::closed_form(&inst).unwrap()).unwrap();
        let sol = solve(&model, &SolveOptions::default()).unwrap();
        (inst, sol)
    }

    fn small() -> GeneratorParams {
        GeneratorParams {
            facilities: 2,
            customers: 4,
            shippers: 2,
            categories: 2,
            services: 2,
            prices: 2,
            alpha: 0.0,
            ratio: 1.5,
            ..GeneratorParams::default()
        }
    }

    #[test]
    fn nothing_offered_costs_the_fixed_charges() {
        let inst = generate(&small()).unwrap();
        let sol = Solution { open: vec![0, 1], ..Solution::empty(Status::Optimal) };
        let fixed: f64 = inst.facilities.iter().map(|f| f.fixed_cost).sum();
        for mode in [Mode::ReducedConsistent, Mode::Reallocation] {
            let r = simulate(&inst, &sol, &ScenarioSet::new(500, 1.0, 3), mode, Exec::Parallel).unwrap();
            assert!((r.mean + fixed).abs() < 1e-9 * fixed);
            assert!(r.std_error < 1e-6 * fixed);
        }
    }

    #[test]
    fn deterministic_acceptance_matches_indicator_evaluation() {
        let mut inst = testing::single(10.0, 2.0, 0.5, 4.0, 100.0);
        inst.choice_model.deterministic = true;
        inst.choice_model.optout[0][0] = -5.0;
        let rho = RhoTable::closed_form(&inst).unwrap();
        assert_eq!(rho.get(OfferKey::new(0, 0, 0, 0)), Some(1.0));
        let sol = solve(&build(&inst, &rho).unwrap(), &SolveOptions::default()).unwrap();
        let scen = ScenarioSet::deterministic(50);
        let outs = scenario_outcomes(&inst, &sol, &scen, Mode::ReducedConsistent, Exec::Sequential).unwrap();
        assert!(outs.windows(2).all(|w| w[0].profit == w[1].profit));
        let r = simulate(&inst, &sol, &scen, Mode::ReducedConsistent, Exec::Sequential).unwrap();
        assert!((r.mean - evaluate(&inst, &rho, &sol).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejected_categories_contribute_nothing() {
        let (inst, sol) = solved(small());
        assert!(!sol.services.is_empty());
        let scen = ScenarioSet::new(300, inst.choice_model.beta, 9);
        for mode in [Mode::ReducedConsistent, Mode::Reallocation] {
            for o in scenario_outcomes(&inst, &sol, &scen, mode, Exec::Parallel).unwrap() {
                let mut revenue = 0.0;
                for (s, &a) in sol.services.iter().zip(&o.accepted) {
                    let members = inst.category_customers(s.shipper, s.category);
                    let touched = o.allocation.iter().any(|w| w.service == s.service && members.contains(&w.customer));
                    assert_eq!(touched, a, "allocation only for accepting categories");
                    if a {
                        let p = sol.price_of(s.shipper, s.service).unwrap();
                        revenue += inst.category_demand(s.shipper, s.category) * inst.price(s.shipper, s.service, p).unwrap().price;
                    }
                }
                assert!((o.revenue - revenue).abs() < 1e-9);
                if o.accepted.iter().all(|a| !a) {
                    assert_eq!(o.cost, 0.0);
                }
            }
        }
    }

    #[test]
    fn results_do_not_depend_on_threads() {
        let (inst, sol) = solved(small());
        let scen = ScenarioSet::new(20_000, inst.choice_model.beta, 4);
        let a = simulate(&inst, &sol, &scen, Mode::Reallocation, Exec::Sequential).unwrap();
        let b = simulate(&inst, &sol, &scen, Mode::Reallocation, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reallocation_is_never_worse() {
        let (inst, sol) = solved(GeneratorParams { ratio: 1.1, ..small() });
        let scen = ScenarioSet::new(400, inst.choice_model.beta, 5);
        let red = scenario_outcomes(&inst, &sol, &scen, Mode::ReducedConsistent, Exec::Parallel).unwrap();
        let re = scenario_outcomes(&inst, &sol, &scen, Mode::Reallocation, Exec::Parallel).unwrap();
        for (a, b) in red.iter().zip(&re) {
            assert!(b.feasible);
            assert!(b.profit >= a.profit - 1e-9 * a.profit.abs().max(1.0));
        }
        let c = compare_modes(&inst, &sol, &scen, Exec::Parallel).unwrap();
        assert!(c.gap >= -1e-9);
    }

    #[test]
    fn reallocation_finishes_on_desk_scenarios() {
        let (inst, sol) = solved(GeneratorParams::default());
        let scen = ScenarioSet::new(600, inst.choice_model.beta, 1);
        let outs = scenario_outcomes(&inst, &sol, &scen, Mode::Reallocation, Exec::Parallel).unwrap();
        assert!(outs.iter().all(|o| o.feasible));
    }

    #[test]
    fn violation_rate_all_zero_without_minimums() {
        let (inst, sol) = solved(small());
        let scen = ScenarioSet::new(1000, inst.choice_model.beta, 6);
        let outs = scenario_outcomes(&inst, &sol, &scen, Mode::ReducedConsistent, Exec::Parallel).unwrap();
        assert!(min_demand_violation_rate(&sol, &outs).iter().all(|r| r.rate == 0.0));
    }

    #[test]
    fn violation_rate_at_threshold_is_half() {
        // one category whose whole demand is exactly the minimum, ρ = 0.5
        let mut inst = testing::single(10.0, 2.0, 0.1, 1.0, 100.0);
        inst.price_ladders[0].entries[0].min_demand = 10.0;
        let l = inst.choice_model.preference[0][0][0];
        inst.choice_model.optout[0][0] = inst.choice_model.alpha * 2.0 + l;
        let rho = RhoTable::closed_form(&inst).unwrap();
        assert!((rho.get(OfferKey::new(0, 0, 0, 0)).unwrap() - 0.5).abs() < 1e-12);
        let sol = Solution {
            open: vec![0],
            prices: vec![PriceChoice { shipper: 0, service: 0, price: 0 }],
            services: vec![ServiceChoice { shipper: 0, category: 0, service: 0 }],
            allocation: vec![Allocation { facility: 0, customer: 0, service: 0, fraction: 1.0 }],
            ..Solution::empty(Status::Optimal)
        };
        let n = 40_000;
        let outs = scenario_outcomes(&inst, &sol, &ScenarioSet::new(n, 1.0, 8), Mode::ReducedConsistent, Exec::Parallel).unwrap();
        let rate = min_demand_violation_rate(&sol, &outs)[0].rate;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((rate - 0.5).abs() < 4.0 * sigma, "{rate}");
    }

    #[test]
    fn deterministic_rates_are_zero_or_one() {
        let mut inst = testing::single(10.0, 2.0, 0.1, 1.0, 100.0);
        inst.price_ladders[0].entries[0].min_demand = 10.0;
        inst.choice_model.deterministic = true;
        let sol = Solution {
            open: vec![0],
            prices: vec![PriceChoice { shipper: 0, service: 0, price: 0 }],
            services: vec![ServiceChoice { shipper: 0, category: 0, service: 0 }],
            allocation: vec![Allocation { facility: 0, customer: 0, service: 0, fraction: 1.0 }],
            ..Solution::empty(Status::Optimal)
        };
        for v0 in [-10.0, 10.0] {
            inst.choice_model.optout[0][0] = v0;
            let outs =
                scenario_outcomes(&inst, &sol, &ScenarioSet::deterministic(20), Mode::ReducedConsistent, Exec::Sequential)
                    .unwrap();
            let rate = min_demand_violation_rate(&sol, &outs)[0].rate;
            assert!(rate == 0.0 || rate == 1.0);
        }
    }

    #[test]
    fn invalid_first_stage_is_rejected() {
        let inst = testing::single(10.0, 2.0, 0.1, 1.0, 100.0);
        let sol = Solution {
            services: vec![ServiceChoice { shipper: 0, category: 0, service: 0 }],
            ..Solution::empty(Status::Optimal)
        };
        assert!(matches!(
            simulate(&inst, &sol, &ScenarioSet::new(10, 1.0, 1), Mode::ReducedConsistent, Exec::Sequential),
            Err(Error::Infeasible(_))
        ));
    }
}
