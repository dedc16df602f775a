//! Exhaustive ground truth for small instances.
//!
//! Works from the raw instance, not from the MILP: every combination of
//! open facilities, one-price-per-(shipper, service) choices and
//! one-service-per-category choices is checked against the offer cap, the
//! "priced before offered" rule and minimum demands; the allocation is
//! then the cheapest ρ-weighted transportation plan, solved as an LP with
//! the dense simplex.

use std::time::Instant;

use super::simplex::{solve_lp, LpProblem, LpStatus};
use crate::choice::RhoTable;
use crate::error::{Error, Result};
use crate::instance::{Instance, OfferKey};
use crate::milp::{Allocation, PriceChoice, ServiceChoice, Sense, Solution, Status};
use crate::par::{self, Exec};

/// Largest number of binary assignments the oracle accepts, `2^22`.
pub const ENUMERATION_LIMIT: u128 = 1 << 22;

struct Plan {
    /// Chosen price level per (shipper, service) ladder, `None` = unpriced.
    prices: Vec<Option<usize>>,
    /// Chosen service per category, `None` = not offered.
    services: Vec<Option<usize>>,
}

/// Cheapest transport cost of the offered customers over `open`, as an
/// explicit LP. `None` when infeasible.
fn transport_lp(
    inst: &Instance,
    open: &[usize],
    customers: &[(usize, usize, f64)],
) -> Result<Option<(f64, Vec<Allocation>)>> {
    if customers.is_empty() {
        return Ok(Some((0.0, Vec::new())));
    }
    if open.is_empty() {
        return Ok(None);
    }
    let nf = open.len();
    let mut lp = LpProblem::new(customers.len() * nf);
    for (c, &(j, m, r)) in customers.iter().enumerate() {
        for (f, &i) in open.iter().enumerate() {
            lp.objective[c * nf + f] = -r * inst.cost(i, j, m);
            lp.upper[c * nf + f] = 1.0;
        }
        lp.add_row((0..nf).map(|f| (c * nf + f, 1.0)).collect(), Sense::Eq, 1.0);
    }
    for (f, &i) in open.iter().enumerate() {
        let terms = customers
            .iter()
            .enumerate()
            .map(|(c, &(j, m, _))| (c * nf + f, inst.service_levels[m].gamma * inst.customers[j].demand))
            .collect();
        lp.add_row(terms, Sense::Le, inst.facilities[i].capacity);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    let mut alloc = Vec::new();
    for (c, &(j, m, _)) in customers.iter().enumerate() {
        for (f, &i) in open.iter().enumerate() {
            let x = sol.x[c * nf + f];
            if x > 1e-12 {
                alloc.push(Allocation { facility: i, customer: j, service: m, fraction: x });
            }
        }
    }
    Ok(Some((-sol.objective, alloc)))
}

/// Number of 0/1 assignments of the model's binaries, `2^(|r|+|y|+|z|)`.
pub fn search_space(inst: &Instance) -> u128 {
    let ny: usize = inst.price_ladders.iter().map(|l| l.entries.len()).sum();
    let nz: usize = (0..inst.num_shippers())
        .flat_map(|n| (0..inst.num_categories(n)).map(move |k| (n, k)))
        .map(|(n, k)| inst.category_services(n, k).len())
        .sum();
    let bits = inst.num_facilities() + ny + nz;
    if bits >= 127 {
        u128::MAX
    } else {
        1u128 << bits
    }
}

/// Brute-force optimum of the reduced problem.
pub fn enumerate_oracle(inst: &Instance, rho: &RhoTable, exec: Exec) -> Result<Solution> {
    let start = Instant::now();
    let count = search_space(inst);
    if count > ENUMERATION_LIMIT {
        return Err(Error::SearchSpace { count, limit: ENUMERATION_LIMIT });
    }
    let ladders: Vec<(usize, usize, usize)> = inst
        .price_ladders
        .iter()
        .map(|l| (l.shipper, l.service, l.entries.len()))
        .collect();
    let cats: Vec<(usize, usize)> = (0..inst.num_shippers())
        .flat_map(|n| (0..inst.num_categories(n)).map(move |k| (n, k)))
        .collect();

    // all price configurations (mixed radix over ladders)
    let mut price_plans: Vec<Vec<Option<usize>>> = vec![Vec::new()];
    for &(_, _, levels) in &ladders {
        let mut next = Vec::new();
        for plan in &price_plans {
            for choice in std::iter::once(None).chain((0..levels).map(Some)) {
                let mut p = plan.clone();
                p.push(choice);
                next.push(p);
            }
        }
        price_plans = next;
    }
    let price_plans: Vec<Vec<Option<usize>>> = price_plans
        .into_iter()
        .filter(|plan| {
            (0..inst.num_shippers()).all(|n| {
                let used = ladders.iter().zip(plan).filter(|((s, _, _), c)| *s == n && c.is_some()).count();
                used <= inst.num_categories(n)
            })
        })
        .collect();

    let facility_sets: Vec<Vec<usize>> = (0..1usize << inst.num_facilities())
        .map(|mask| (0..inst.num_facilities()).filter(|i| mask >> i & 1 == 1).collect())
        .collect();

    let evaluate_prices = |prices: &Vec<Option<usize>>| -> Result<Option<(f64, Plan, Vec<usize>, Vec<Allocation>)>> {
        let price_of = |n: usize, m: usize| -> Option<usize> {
            ladders.iter().zip(prices).find(|((s, sv, _), _)| *s == n && *sv == m).and_then(|(_, c)| *c)
        };
        let mut service_plans: Vec<Vec<Option<usize>>> = vec![Vec::new()];
        for &(n, k) in &cats {
            let mut next = Vec::new();
            let options: Vec<Option<usize>> = std::iter::once(None)
                .chain(inst.category_services(n, k).iter().copied().filter(|&m| price_of(n, m).is_some()).map(Some))
                .collect();
            for plan in &service_plans {
                for &o in &options {
                    let mut p = plan.clone();
                    p.push(o);
                    next.push(p);
                }
            }
            service_plans = next;
        }
        let mut best: Option<(f64, Plan, Vec<usize>, Vec<Allocation>)> = None;
        for services in service_plans {
            // minimum demand per priced ladder
            let ok = ladders.iter().zip(prices).all(|(&(n, m, _), choice)| match choice {
                None => true,
                Some(p) => {
                    let offered: f64 = cats
                        .iter()
                        .zip(&services)
                        .filter(|((cn, _), s)| *cn == n && **s == Some(m))
                        .map(|((cn, ck), _)| inst.category_demand(*cn, *ck))
                        .sum();
                    let need = inst.price(n, m, *p).map(|e| e.min_demand).unwrap_or(f64::INFINITY);
                    offered >= need
                }
            });
            if !ok {
                continue;
            }
            let mut revenue = 0.0;
            let mut customers = Vec::new();
            for (&(n, k), s) in cats.iter().zip(&services) {
                if let Some(m) = *s {
                    let p = price_of(n, m).expect("service filtered by price");
                    let r = rho.require(OfferKey::new(n, k, m, p))?;
                    revenue += r * inst.category_demand(n, k) * inst.price(n, m, p)?.price;
                    for j in inst.category_customers(n, k) {
                        customers.push((j, m, r));
                    }
                }
            }
            for open in &facility_sets {
                let fixed: f64 = open.iter().map(|&i| inst.facilities[i].fixed_cost).sum();
                let Some((cost, alloc)) = transport_lp(inst, open, &customers)? else { continue };
                let value = revenue - cost - fixed;
                if best.as_ref().map_or(true, |b| value > b.0) {
                    best = Some((
                        value,
                        Plan { prices: prices.clone(), services: services.clone() },
                        open.clone(),
                        alloc,
                    ));
                }
            }
        }
        Ok(best)
    };

    let results = par::map_slice(exec, &price_plans, evaluate_prices);
    let mut best: Option<(f64, Plan, Vec<usize>, Vec<Allocation>)> = None;
    for r in results {
        if let Some(cand) = r? {
            // strict improvement keeps the first plan in enumeration order
            if best.as_ref().map_or(true, |b| cand.0 > b.0) {
                best = Some(cand);
            }
        }
    }
    let (value, plan, open, allocation) = best.expect("the empty plan is always feasible");

    let mut sol = Solution::empty(Status::Optimal);
    sol.objective = value;
    sol.bound = value;
    sol.nodes = count as u64;
    sol.open = open;
    for (&(n, m, _), c) in ladders.iter().zip(&plan.prices) {
        // only prices that are actually used matter; unused ones are dropped
        if let Some(p) = *c {
            if cats.iter().zip(&plan.services).any(|((cn, _), s)| *cn == n && *s == Some(m)) {
                sol.prices.push(PriceChoice { shipper: n, service: m, price: p });
            }
        }
    }
    sol.prices.sort();
    for (&(n, k), s) in cats.iter().zip(&plan.services) {
        if let Some(m) = *s {
            sol.services.push(ServiceChoice { shipper: n, category: k, service: m });
        }
    }
    sol.allocation = allocation;
    sol.report.fixed_cost = sol.open.iter().map(|&i| inst.facilities[i].fixed_cost).sum();
    for s in &sol.services {
        let p = sol.price_of(s.shipper, s.service).expect("priced");
        let r = rho.require(OfferKey::new(s.shipper, s.category, s.service, p))?;
        sol.report.revenue += r * inst.category_demand(s.shipper, s.category) * inst.price(s.shipper, s.service, p)?.price;
    }
    sol.report.assignment_cost = sol.report.revenue - sol.report.fixed_cost - value;
    sol.seconds = start.elapsed().as_secs_f64();
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, GeneratorParams};
    use crate::milp::{evaluate, testing};

    #[test]
    fn arithmetic_case() {
        let inst = testing::single(10.0, 2.0, 5.0, 4.0, 100.0);
        let rho = RhoTable::constant(&inst, 1.0);
        let sol = enumerate_oracle(&inst, &rho, Exec::Sequential).unwrap();
        assert!((sol.objective - 11.0).abs() < 1e-9);
        assert_eq!(sol.open, vec![0]);
        assert!((evaluate(&inst, &rho, &sol).unwrap() - 11.0).abs() < 1e-9);
    }

    #[test]
    fn zero_rho_offers_nothing() {
        let inst = generate(&GeneratorParams {
            facilities: 2,
            customers: 4,
            shippers: 2,
            categories: 2,
            services: 2,
            prices: 2,
            ..GeneratorParams::default()
        })
        .unwrap();
        let sol = enumerate_oracle(&inst, &RhoTable::constant(&inst, 0.0), Exec::Parallel).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.services.is_empty() && sol.open.is_empty());
    }

    #[test]
    fn refuses_large_spaces() {
        let inst = generate(&GeneratorParams::default()).unwrap();
        match enumerate_oracle(&inst, &RhoTable::closed_form(&inst).unwrap(), Exec::Sequential) {
            Err(Error::SearchSpace { count, limit }) => {
                assert_eq!(count, 1u128 << (4 + 30 + 18));
                assert_eq!(limit, ENUMERATION_LIMIT);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn oracle_solution_evaluates_to_its_objective() {
        let inst = generate(&GeneratorParams {
            facilities: 2,
            customers: 4,
            shippers: 2,
            categories: 2,
            services: 2,
            prices: 2,
            ratio: 0.8,
            alpha: 0.0,
            ..GeneratorParams::default()
        })
        .unwrap();
        let rho = RhoTable::closed_form(&inst).unwrap();
        let sol = enumerate_oracle(&inst, &rho, Exec::Parallel).unwrap();
        let v = evaluate(&inst, &rho, &sol).unwrap();
        assert!((v - sol.objective).abs() <= 1e-8 * v.abs().max(1.0));
    }
}
