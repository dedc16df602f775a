//! Two facilities, two shippers with two single-customer categories each,
//! two service levels with two prices. Assignment costs and acceptance
//! probabilities are chosen here.

use std::io::Write;

use serde::Serialize;

use super::solve_with_rho;
use crate::choice::{ChoiceModel, RhoTable};
use crate::error::{Error, Result};
use crate::instance::{
    Category, Customer, Facility, Instance, Meta, PriceEntry, PriceLadder, ServiceLevel, Shipper,
};
use crate::milp::{Offer, Status};

pub const FIXTURE_CSV_VERSION: &str = "# biloc fixture csv v1";

/// Facility names in index order.
pub const FACILITY_NAMES: [&str; 2] = ["A", "B"];

/// Per-unit haul rate `[facility][customer]` at service 0.
const RATE: [[f64; 4]; 2] = [[3.2, 3.2, 4.0, 4.0], [4.0, 4.0, 2.5, 2.5]];
/// Cost multiplier of service 1.
const SERVICE_1_COST: f64 = 1.2;
/// Fixture acceptance probabilities `[service][price]`; lower prices are
/// likelier to be accepted.
const FIXTURE_RHO: [[f64; 2]; 2] = [[0.9, 0.6], [0.8, 0.5]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Fixture,
    PerfectInformation,
    Uniform,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Fixture => "fixture",
            Regime::PerfectInformation => "perfect-information",
            Regime::Uniform => "uniform",
        })
    }
}

/// The fixture instance. With `with_min_demand` false every `l` is zero.
pub fn fixture_instance(with_min_demand: bool) -> Instance {
    let demand = [50.0, 100.0, 20.0, 20.0];
    let customers = (0..4)
        .map(|j| Customer { shipper: j / 2, category: j % 2, demand: demand[j], location: [0.0; 2] })
        .collect();
    let l = |v: f64| if with_min_demand { v } else { 0.0 };
    let ladders = (0..2)
        .flat_map(|n| {
            [
                PriceLadder {
                    shipper: n,
                    service: 0,
                    entries: vec![
                        PriceEntry { price: 6.0, min_demand: l(40.0) },
                        PriceEntry { price: 6.5, min_demand: 0.0 },
                    ],
                },
                PriceLadder {
                    shipper: n,
                    service: 1,
                    entries: vec![
                        PriceEntry { price: 6.3, min_demand: l(50.0) },
                        PriceEntry { price: 7.0, min_demand: 0.0 },
                    ],
                },
            ]
        })
        .collect();
    let costs = (0..2)
        .map(|i| (0..4).map(|j| vec![RATE[i][j] * demand[j], RATE[i][j] * demand[j] * SERVICE_1_COST]).collect())
        .collect();
    let category = || Category { services: vec![0, 1] };
    Instance {
        facilities: vec![
            Facility { capacity: 150.0, fixed_cost: 250.0, location: [0.0; 2] },
            Facility { capacity: 50.0, fixed_cost: 140.0, location: [0.0; 2] },
        ],
        customers,
        shippers: vec![Shipper { categories: vec![category(), category()] }; 2],
        service_levels: vec![
            ServiceLevel { gamma: 1.0, cost_multiplier: 1.0 },
            ServiceLevel { gamma: 1.15, cost_multiplier: SERVICE_1_COST },
        ],
        price_ladders: ladders,
        costs,
        choice_model: ChoiceModel::uniform(0.0, 1.0, 0.0, 0.0, 2, 2, 2),
        meta: Meta::default(),
    }
}

/// Acceptance probabilities of a regime for the fixture instance.
pub fn fixture_rho(inst: &Instance, regime: Regime) -> RhoTable {
    match regime {
        Regime::Fixture => {
            let mut t = RhoTable::new();
            for key in inst.offers() {
                t.insert(key, FIXTURE_RHO[key.service][key.price]);
            }
            t
        }
        Regime::PerfectInformation => RhoTable::constant(inst, 1.0),
        Regime::Uniform => RhoTable::constant(inst, 0.5),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureRow {
    pub regime: Regime,
    pub status: Status,
    pub objective: f64,
    pub revenue: f64,
    pub cost: f64,
    pub fixed_cost: f64,
    pub open: Vec<usize>,
    pub offers: Vec<Offer>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureReport {
    pub rows: Vec<FixtureRow>,
    /// Load on facility A if both of shipper 0's customers take service 1.
    pub shipper0_service1_load: f64,
    pub capacity_a: f64,
    pub shipper1_demand: f64,
    /// Minimum demand of service 1 at its lower price for shipper 1.
    pub shipper1_service1_min_demand: f64,
}

impl FixtureReport {
    pub fn row(&self, regime: Regime) -> &FixtureRow {
        self.rows.iter().find(|r| r.regime == regime).expect("every regime is solved")
    }
}

/// Solves the fixture under the three regimes.
pub fn run_fixture_example() -> Result<FixtureReport> {
    let inst = fixture_instance(true);
    let mut rows = Vec::new();
    for regime in [Regime::Fixture, Regime::PerfectInformation, Regime::Uniform] {
        let sol = solve_with_rho(&inst, &fixture_rho(&inst, regime), None)?;
        rows.push(FixtureRow {
            regime,
            status: sol.status,
            objective: sol.objective,
            revenue: sol.report.revenue,
            cost: sol.report.assignment_cost,
            fixed_cost: sol.report.fixed_cost,
            open: sol.open.clone(),
            offers: sol.offers.clone(),
        });
    }
    let gamma = inst.service_levels[1].gamma;
    Ok(FixtureReport {
        rows,
        shipper0_service1_load: gamma * (inst.category_demand(0, 0) + inst.category_demand(0, 1)),
        capacity_a: inst.facilities[0].capacity,
        shipper1_demand: inst.category_demand(1, 0) + inst.category_demand(1, 1),
        shipper1_service1_min_demand: inst.price(1, 1, 0)?.min_demand,
    })
}

fn offer_label(o: &Offer) -> String {
    format!("n{}k{}m{}@{}", o.shipper, o.category, o.service, o.price_value)
}

pub fn write_fixture_csv<W: Write>(report: &FixtureReport, mut out: W) -> Result<()> {
    writeln!(out, "{FIXTURE_CSV_VERSION}").map_err(|e| Error::io("<fixture csv>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["regime", "status", "objective", "revenue", "cost", "fixed_cost", "open", "offers"])?;
    for r in &report.rows {
        let open: Vec<&str> = r.open.iter().map(|&i| FACILITY_NAMES[i]).collect();
        let offers: Vec<String> = r.offers.iter().map(offer_label).collect();
        w.write_record([
            r.regime.to_string(),
            r.status.to_string(),
            r.objective.to_string(),
            r.revenue.to_string(),
            r.cost.to_string(),
            r.fixed_cost.to_string(),
            open.join(";"),
            offers.join(";"),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<fixture csv>", e))?;
    Ok(())
}
