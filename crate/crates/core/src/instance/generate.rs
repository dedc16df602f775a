//! Seeded CFLP-style instance generator.
//!
//! Facilities and customers are placed uniformly in the unit square. The
//! base assignment cost is `distance * haul_rate * d_j`, demands are integers
//! in `[5, 35]`, raw capacities are drawn uniformly in `[10, 160]` and then
//! rescaled so that total capacity over total demand equals `ratio`
//! exactly. Fixed costs follow `U[0.5, 1.5] * fixed_cost_scale * sqrt(u_i)`.
//! Service level `m` has `gamma = 1` and cost multiplier `1 + 0.05 m`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    Category, Customer, Facility, Instance, Meta, PriceEntry, PriceLadder, ServiceLevel, Shipper,
};
use crate::choice::ChoiceModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorParams {
    pub facilities: usize,
    pub customers: usize,
    pub shippers: usize,
    /// Categories per shipper.
    pub categories: usize,
    pub services: usize,
    pub prices: usize,
    /// Total capacity over total demand.
    pub ratio: f64,
    pub price_min: f64,
    pub price_max: f64,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    /// Service preference `L`, shared by every (shipper, category, service).
    pub preference: f64,
    /// Opt-out utility, shared by every (shipper, category).
    pub optout: f64,
    /// Cost per unit distance per unit demand.
    pub haul_rate: f64,
    /// Multiplier on `sqrt(capacity)` in the fixed cost.
    pub fixed_cost_scale: f64,
    /// Minimum demand `l` attached to every price level.
    pub min_demand: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            facilities: 4,
            customers: 48,
            shippers: 2,
            categories: 3,
            services: 3,
            prices: 5,
            ratio: 2.0,
            price_min: 15.0,
            price_max: 23.0,
            seed: 1,
            alpha: -0.1,
            beta: 1.0,
            preference: 4.5,
            optout: 3.0,
            haul_rate: 10.0,
            fixed_cost_scale: 105.0,
            min_demand: 0.0,
        }
    }
}

impl GeneratorParams {
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Parameter(msg));
        if self.facilities == 0 || self.shippers == 0 || self.categories == 0 {
            return fail("facility, shipper and category counts must be positive".into());
        }
        if self.services == 0 || self.prices == 0 {
            return fail("service and price counts must be positive".into());
        }
        if self.customers < self.shippers * self.categories {
            return fail(format!(
                "{} customers cannot populate {} shippers x {} categories",
                self.customers, self.shippers, self.categories
            ));
        }
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return fail(format!("ratio must be positive, got {}", self.ratio));
        }
        if !(self.price_min > 0.0 && self.price_min < self.price_max) {
            return fail(format!(
                "need 0 < price_min < price_max, got {} and {}",
                self.price_min, self.price_max
            ));
        }
        if !(self.beta > 0.0) {
            return fail(format!("beta must be positive, got {}", self.beta));
        }
        if self.haul_rate < 0.0 || self.fixed_cost_scale < 0.0 || self.min_demand < 0.0 {
            return fail("haul_rate, fixed_cost_scale and min_demand must be non-negative".into());
        }
        Ok(())
    }

    /// Equally spaced price levels from `price_min` to `price_max`.
    pub fn price_levels(&self) -> Vec<f64> {
        if self.prices == 1 {
            return vec![self.price_min];
        }
        let step = (self.price_max - self.price_min) / (self.prices - 1) as f64;
        (0..self.prices)
            .map(|p| {
                if p + 1 == self.prices {
                    self.price_max
                } else {
                    self.price_min + step * p as f64
                }
            })
            .collect()
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn generate(params: &GeneratorParams) -> Result<Instance> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let facility_loc: Vec<[f64; 2]> = (0..params.facilities)
        .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
        .collect();
    let raw_capacity: Vec<f64> = (0..params.facilities)
        .map(|_| rng.gen_range(10.0..=160.0))
        .collect();
    let fixed_noise: Vec<f64> = (0..params.facilities)
        .map(|_| rng.gen_range(0.5..=1.5))
        .collect();

    let customers: Vec<Customer> = (0..params.customers)
        .map(|j| Customer {
            shipper: j % params.shippers,
            category: (j / params.shippers) % params.categories,
            demand: rng.gen_range(5..=35) as f64,
            location: [rng.gen::<f64>(), rng.gen::<f64>()],
        })
        .collect();

    let total_demand: f64 = customers.iter().map(|c| c.demand).sum();
    let scale = params.ratio * total_demand / raw_capacity.iter().sum::<f64>();
    let facilities: Vec<Facility> = (0..params.facilities)
        .map(|i| {
            let capacity = raw_capacity[i] * scale;
            Facility {
                capacity,
                fixed_cost: fixed_noise[i] * params.fixed_cost_scale * capacity.sqrt(),
                location: facility_loc[i],
            }
        })
        .collect();

    let service_levels: Vec<ServiceLevel> = (0..params.services)
        .map(|m| ServiceLevel {
            gamma: 1.0,
            cost_multiplier: 1.0 + 0.05 * m as f64,
        })
        .collect();

    let costs = facilities
        .iter()
        .map(|f| {
            customers
                .iter()
                .map(|c| {
                    let base = distance(f.location, c.location) * params.haul_rate * c.demand;
                    service_levels
                        .iter()
                        .map(|s| s.cost_multiplier * base)
                        .collect()
                })
                .collect()
        })
        .collect();

    let all_services: Vec<usize> = (0..params.services).collect();
    let shippers = (0..params.shippers)
        .map(|_| Shipper {
            categories: (0..params.categories)
                .map(|_| Category {
                    services: all_services.clone(),
                })
                .collect(),
        })
        .collect();

    let levels = params.price_levels();
    let mut price_ladders = Vec::with_capacity(params.shippers * params.services);
    for n in 0..params.shippers {
        for m in 0..params.services {
            price_ladders.push(PriceLadder {
                shipper: n,
                service: m,
                entries: levels
                    .iter()
                    .map(|&price| PriceEntry {
                        price,
                        min_demand: params.min_demand,
                    })
                    .collect(),
            });
        }
    }

    let choice_model = ChoiceModel::uniform(
        params.alpha,
        params.beta,
        params.preference,
        params.optout,
        params.shippers,
        params.categories,
        params.services,
    );

    Ok(Instance {
        facilities,
        customers,
        shippers,
        service_levels,
        price_ladders,
        costs,
        choice_model,
        meta: Meta {
            seed: Some(params.seed),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{to_json_string, validate};
    use proptest::prelude::*;

    #[test]
    fn five_equal_price_steps() {
        let p = GeneratorParams::default();
        assert_eq!(p.price_levels(), vec![15.0, 17.0, 19.0, 21.0, 23.0]);
    }

    #[test]
    fn three_equal_price_steps() {
        let p = GeneratorParams {
            prices: 3,
            ..GeneratorParams::default()
        };
        assert_eq!(p.price_levels(), vec![15.0, 19.0, 23.0]);
    }

    #[test]
    fn ratio_is_hit() {
        let inst = generate(&GeneratorParams::default()).unwrap();
        let r = inst.total_capacity() / inst.total_demand();
        assert!((r - 2.0).abs() / 2.0 <= 1e-9);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = GeneratorParams::default();
        let a = to_json_string(&generate(&p).unwrap()).unwrap();
        let b = to_json_string(&generate(&p).unwrap()).unwrap();
        assert_eq!(a, b);
        let c = to_json_string(&generate(&GeneratorParams { seed: 2, ..p }).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn round_robin_membership() {
        let inst = generate(&GeneratorParams::default()).unwrap();
        assert_eq!(inst.customers[0].shipper, 0);
        assert_eq!(inst.customers[1].shipper, 1);
        assert_eq!(inst.customers[2].category, 1);
        assert_eq!(inst.category_customers(0, 0).len(), 8);
    }

    #[test]
    fn rejects_bad_params() {
        let base = GeneratorParams::default();
        for bad in [
            GeneratorParams { facilities: 0, ..base.clone() },
            GeneratorParams { ratio: 0.0, ..base.clone() },
            GeneratorParams { price_min: 23.0, price_max: 15.0, ..base.clone() },
            GeneratorParams { customers: 5, ..base.clone() },
        ] {
            assert!(matches!(generate(&bad), Err(Error::Parameter(_))));
        }
    }

    fn arb_params() -> impl Strategy<Value = GeneratorParams> {
        (
            1usize..6,
            1usize..4,
            1usize..4,
            1usize..4,
            1usize..6,
            0.1f64..6.0,
            any::<u64>(),
            0usize..20,
        )
            .prop_map(|(fac, shp, cat, srv, prc, ratio, seed, extra)| GeneratorParams {
                facilities: fac,
                shippers: shp,
                categories: cat,
                customers: shp * cat + extra,
                services: srv,
                prices: prc,
                ratio,
                seed,
                ..GeneratorParams::default()
            })
    }

    proptest! {
        #[test]
        fn generated_instances_are_valid(p in arb_params()) {
            let inst = generate(&p).unwrap();
            prop_assert!(validate(&inst).is_empty());
            let r = inst.capacity_ratio();
            prop_assert!((r - p.ratio).abs() / p.ratio <= 1e-9);
        }

        #[test]
        fn costs_monotone_in_service(p in arb_params()) {
            let inst = generate(&p).unwrap();
            for row in &inst.costs {
                for c in row {
                    prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
                }
            }
        }
    }
}
