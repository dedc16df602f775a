//! The reduced single-level MILP: builder, LP text format, solutions and
//! their independent evaluation.
//!
//! Objective (maximised):
//!
//! ```text
//! -Σ f_i r_i + Σ ρ_nk^{mp} d_k q_n^{mp} π_nk^{mp} - Σ ρ_{n_j k_j}^{mp} c_ij^m ν_ij^{mp}
//! ```
//!
//! subject to one price per (shipper, service), at most `|K_n|` priced
//! services per shipper, one service per category, services only with a
//! price, capacities `Σ γ^m d_j w_ij^m <= u_i r_i`, assignment to open
//! facilities only, full assignment of offered categories, minimum demand
//! per price level, and the McCormick rows defining `π = y z` and
//! `ν = w y`. The `ν` rows are generated for every price level `p` of the
//! customer's shipper.

mod lp_format;
mod model;
mod reduced;
mod solution;

pub use lp_format::{export_lp, parse_lp};
pub use model::{
    Constraint, MilpModel, ObjSense, RowTag, Sense, VarCounts, VarKind, VarTag, Variable, Violation,
};
pub use reduced::{
    Category as ReducedCategory, CategoryService, Customer as ReducedCustomer, Facility as ReducedFacility,
    Ladder, ReducedProblem, ServiceUse, Shipper as ReducedShipper,
};
pub use solution::{
    check_solution, evaluate, profit_upper_bound, Allocation, Offer, PriceChoice, Report, ServiceChoice,
    Solution, Status, TRIVIAL_TOL,
};

use crate::choice::RhoTable;
use crate::error::Result;
use crate::instance::Instance;

/// Builds the linearized model for `inst` with acceptance probabilities
/// `rho`. Fails with a build error naming the first missing offer.
pub fn build(inst: &Instance, rho: &RhoTable) -> Result<MilpModel> {
    Ok(ReducedProblem::from_instance(inst, rho)?.to_model())
}

#[cfg(test)]
pub(crate) mod testing {
    use crate::choice::ChoiceModel;
    use crate::instance::*;

    /// One facility, one customer, one shipper/category/service/price.
    pub fn single(demand: f64, price: f64, cost: f64, fixed: f64, capacity: f64) -> Instance {
        Instance {
            facilities: vec![Facility { capacity, fixed_cost: fixed, location: [0.0; 2] }],
            customers: vec![Customer { shipper: 0, category: 0, demand, location: [0.0; 2] }],
            shippers: vec![Shipper { categories: vec![Category { services: vec![0] }] }],
            service_levels: vec![ServiceLevel { gamma: 1.0, cost_multiplier: 1.0 }],
            price_ladders: vec![PriceLadder {
                shipper: 0,
                service: 0,
                entries: vec![PriceEntry { price, min_demand: 0.0 }],
            }],
            costs: vec![vec![vec![cost]]],
            choice_model: ChoiceModel::uniform(0.0, 1.0, 1.0, 0.0, 1, 1, 1),
            meta: Meta::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::instance::{generate, GeneratorParams, OfferKey};
    use proptest::prelude::*;

    fn desk() -> Instance {
        generate(&GeneratorParams::default()).unwrap()
    }

    #[test]
    fn single_everything_counts() {
        let mut inst = testing::single(10.0, 2.0, 5.0, 4.0, 100.0);
        inst.customers.push(inst.customers[0].clone());
        inst.costs[0].push(vec![1.0]);
        let rho = RhoTable::constant(&inst, 1.0);
        let c = build(&inst, &rho).unwrap().counts();
        assert_eq!((c.r, c.y, c.z, c.w, c.pi, c.nu), (1, 1, 1, 2, 1, 2));
    }

    #[test]
    fn desk_counts() {
        let inst = desk();
        let rho = RhoTable::closed_form(&inst).unwrap();
        let c = build(&inst, &rho).unwrap().counts();
        assert_eq!(c.r, 4);
        assert_eq!(c.y, 2 * 3 * 5);
        assert_eq!(c.z, 2 * 3 * 3);
        assert_eq!(c.w, 4 * 48 * 3);
        assert_eq!(c.pi, 2 * 3 * 3 * 5);
        assert_eq!(c.nu, 2880);
        assert_eq!(c.other, 0);
    }

    #[test]
    fn missing_rho_names_offer() {
        let inst = desk();
        let mut rho = RhoTable::new();
        for (k, v) in RhoTable::closed_form(&inst).unwrap().iter() {
            if k != OfferKey::new(1, 2, 0, 3) {
                rho.insert(k, v);
            }
        }
        match build(&inst, &rho) {
            Err(Error::Build(msg)) => assert!(msg.contains("(n=1, k=2, m=0, p=3)"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn every_variable_is_used() {
        let inst = desk();
        let model = build(&inst, &RhoTable::closed_form(&inst).unwrap()).unwrap();
        let mut used = vec![false; model.num_variables()];
        for row in &model.constraints {
            for &(v, _) in &row.terms {
                used[v] = true;
            }
        }
        for &(v, _) in &model.objective {
            used[v] = true;
        }
        assert!(used.iter().all(|&u| u));
    }

    #[test]
    fn objective_coefficients() {
        let inst = testing::single(10.0, 2.0, 5.0, 4.0, 100.0);
        let rho = RhoTable::constant(&inst, 1.0);
        let model = build(&inst, &rho).unwrap();
        let obj = model.objective_dense();
        let at = |name: &str| obj[model.find_variable(name).unwrap()];
        assert_eq!(at("r_i0"), -4.0);
        assert_eq!(at("pi_n0_k0_m0_p0"), 20.0);
        assert_eq!(at("nu_i0_j0_m0_p0"), -5.0);
        assert_eq!(at("y_n0_m0_p0"), 0.0);
    }

    #[test]
    fn hand_built_arithmetic_case() {
        let inst = testing::single(10.0, 2.0, 5.0, 4.0, 100.0);
        let rho = RhoTable::constant(&inst, 1.0);
        let sol = Solution {
            open: vec![0],
            prices: vec![PriceChoice { shipper: 0, service: 0, price: 0 }],
            services: vec![ServiceChoice { shipper: 0, category: 0, service: 0 }],
            allocation: vec![Allocation { facility: 0, customer: 0, service: 0, fraction: 1.0 }],
            ..Solution::empty(Status::Optimal)
        };
        assert_eq!(evaluate(&inst, &rho, &sol).unwrap(), 11.0);
        assert_eq!(evaluate(&inst, &rho, &Solution::empty(Status::Optimal)).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_reports_violations() {
        let inst = testing::single(10.0, 2.0, 5.0, 4.0, 100.0);
        let rho = RhoTable::constant(&inst, 1.0);
        // offered but facility closed and nothing priced
        let sol = Solution {
            services: vec![ServiceChoice { shipper: 0, category: 0, service: 0 }],
            allocation: vec![Allocation { facility: 0, customer: 0, service: 0, fraction: 1.0 }],
            ..Solution::empty(Status::Optimal)
        };
        match evaluate(&inst, &rho, &sol) {
            Err(Error::Infeasible(v)) => {
                let names: Vec<&str> = v.iter().map(|x| x.constraint.as_str()).collect();
                assert!(names.contains(&"priced_n0_k0_m0"), "{names:?}");
                assert!(names.contains(&"open_i0_j0"), "{names:?}");
                assert!(names.contains(&"capacity_i0"), "{names:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn upper_bound_examples() {
        let inst = desk();
        let min_f = inst.facilities.iter().map(|f| f.fixed_cost).fold(f64::INFINITY, f64::min);
        let zero = RhoTable::constant(&inst, 0.0);
        assert_eq!(profit_upper_bound(&inst, &zero).unwrap(), -min_f);

        // revenue 10 * 2 = 20 below serving cost 25
        let single = testing::single(10.0, 2.0, 25.0, 4.0, 100.0);
        let b = profit_upper_bound(&single, &RhoTable::constant(&single, 0.7)).unwrap();
        assert!(b <= TRIVIAL_TOL);

        let rho = RhoTable::closed_form(&inst).unwrap();
        let rp = ReducedProblem::from_instance(&inst, &rho).unwrap();
        let a = profit_upper_bound(&inst, &rho).unwrap();
        assert!((a - rp.profit_upper_bound()).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn nonnegativity_rows_present() {
        let inst = desk();
        let model = build(&inst, &RhoTable::closed_form(&inst).unwrap()).unwrap();
        let pi_nonneg = model.constraints.iter().filter(|c| matches!(c.tag, RowTag::PiNonneg { .. })).count();
        let nu_nonneg = model.constraints.iter().filter(|c| matches!(c.tag, RowTag::NuNonneg { .. })).count();
        assert_eq!(pi_nonneg, 90);
        assert_eq!(nu_nonneg, 2880);
    }

    #[test]
    fn lp_round_trip_preserves_structure() {
        let inst = generate(&GeneratorParams { customers: 12, ..GeneratorParams::default() }).unwrap();
        let rho = RhoTable::closed_form(&inst).unwrap();
        let model = build(&inst, &rho).unwrap();
        let text = export_lp(&model);
        let back = parse_lp(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(export_lp(&back), text);
        assert!(ReducedProblem::from_model(&back).is_some());
    }

    fn arb_params() -> impl Strategy<Value = GeneratorParams> {
        (1usize..4, 1usize..3, 1usize..3, 1usize..4, 1usize..4, 0usize..6, any::<u64>()).prop_map(
            |(fac, shp, cat, srv, prc, extra, seed)| GeneratorParams {
                facilities: fac,
                shippers: shp,
                categories: cat,
                customers: shp * cat + extra,
                services: srv,
                prices: prc,
                seed,
                ..GeneratorParams::default()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn counts_match_closed_forms(p in arb_params()) {
            let inst = generate(&p).unwrap();
            let model = build(&inst, &RhoTable::closed_form(&inst).unwrap()).unwrap();
            let c = model.counts();
            let (i, j, n, k, m, pp) = (p.facilities, p.customers, p.shippers, p.categories, p.services, p.prices);
            prop_assert_eq!(c.r, i);
            prop_assert_eq!(c.y, n * m * pp);
            prop_assert_eq!(c.z, n * k * m);
            prop_assert_eq!(c.w, i * j * m);
            prop_assert_eq!(c.pi, n * k * m * pp);
            prop_assert_eq!(c.nu, i * j * m * pp);
            // rows: one_price + offer_cap + one_service + priced + capacity + open
            // + assign + min_demand + 4 pi + 4 nu families
            let rows = n * m + n + n * k + n * k * m + i + i * j + j * m + n * m
                + 4 * n * k * m * pp + 4 * i * j * m * pp;
            prop_assert_eq!(model.num_constraints(), rows);
            prop_assert!(ReducedProblem::from_model(&model).is_some());
        }
    }
}
