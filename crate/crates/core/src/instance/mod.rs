//! Problem data: facilities, shippers with customer categories, service
//! levels, price ladders, assignment costs and the embedded choice model.
//!
//! Index conventions used throughout the crate:
//!
//! * `i` facility, `j` customer, `n` shipper,
//! * `k` customer category, local to its shipper (`0..shippers[n].categories.len()`),
//! * `m` service level (`0..service_levels.len()`); the opt-out is not a service index,
//! * `p` position in the price ladder of `(n, m)`.

mod generate;
mod io;
mod validate;

use serde::{Deserialize, Serialize};

use crate::choice::ChoiceModel;
use crate::error::{Error, Result};

pub use generate::{generate, GeneratorParams};
pub(crate) use io::parse_json;
pub use io::{from_json_str, load, save, to_json_string};
pub use validate::{validate, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Facility {
    pub capacity: f64,
    pub fixed_cost: f64,
    #[serde(default)]
    pub location: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Customer {
    pub shipper: usize,
    /// Category index local to the customer's shipper.
    pub category: usize,
    pub demand: f64,
    #[serde(default)]
    pub location: [f64; 2],
}

/// Customer category of a shipper; `services` is the availability set `M_nk`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Category {
    pub services: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shipper {
    pub categories: Vec<Category>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceLevel {
    /// Capacity usage scale, at least 1.
    pub gamma: f64,
    /// Factor applied to the base assignment cost by the generator.
    pub cost_multiplier: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceEntry {
    pub price: f64,
    pub min_demand: f64,
}

/// Prices `P_n^m` offered to shipper `n` for service `m`, in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceLadder {
    pub shipper: usize,
    pub service: usize,
    pub entries: Vec<PriceEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    #[serde(default)]
    pub seed: Option<u64>,
}

/// One (shipper, category, service, price) alternative the provider can offer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OfferKey {
    pub shipper: usize,
    pub category: usize,
    pub service: usize,
    pub price: usize,
}

impl OfferKey {
    pub fn new(shipper: usize, category: usize, service: usize, price: usize) -> Self {
        OfferKey {
            shipper,
            category,
            service,
            price,
        }
    }
}

impl std::fmt::Display for OfferKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(n={}, k={}, m={}, p={})",
            self.shipper, self.category, self.service, self.price
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub facilities: Vec<Facility>,
    pub customers: Vec<Customer>,
    pub shippers: Vec<Shipper>,
    pub service_levels: Vec<ServiceLevel>,
    pub price_ladders: Vec<PriceLadder>,
    /// Assignment costs `c_ij^m`, indexed `[facility][customer][service]`.
    pub costs: Vec<Vec<Vec<f64>>>,
    pub choice_model: ChoiceModel,
    #[serde(default)]
    pub meta: Meta,
}

impl Instance {
    pub fn num_facilities(&self) -> usize {
        self.facilities.len()
    }

    pub fn num_customers(&self) -> usize {
        self.customers.len()
    }

    pub fn num_shippers(&self) -> usize {
        self.shippers.len()
    }

    pub fn num_categories(&self, shipper: usize) -> usize {
        self.shippers[shipper].categories.len()
    }

    /// `M_nk`.
    pub fn category_services(&self, shipper: usize, category: usize) -> &[usize] {
        &self.shippers[shipper].categories[category].services
    }

    /// `M_j`, the services available to customer `j` through its category.
    pub fn customer_services(&self, customer: usize) -> &[usize] {
        let c = &self.customers[customer];
        self.category_services(c.shipper, c.category)
    }

    /// Customers of category `(n, k)`, i.e. `J_k`.
    pub fn category_customers(&self, shipper: usize, category: usize) -> Vec<usize> {
        self.customers
            .iter()
            .enumerate()
            .filter(|(_, c)| c.shipper == shipper && c.category == category)
            .map(|(j, _)| j)
            .collect()
    }

    /// Category demand `d_k`, always derived from the customers.
    pub fn category_demand(&self, shipper: usize, category: usize) -> f64 {
        self.customers
            .iter()
            .filter(|c| c.shipper == shipper && c.category == category)
            .map(|c| c.demand)
            .sum()
    }

    pub fn ladder(&self, shipper: usize, service: usize) -> Option<&PriceLadder> {
        self.price_ladders
            .iter()
            .find(|l| l.shipper == shipper && l.service == service)
    }

    /// `M_n`: services with a price ladder for shipper `n`, in increasing order.
    pub fn shipper_services(&self, shipper: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .price_ladders
            .iter()
            .filter(|l| l.shipper == shipper)
            .map(|l| l.service)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn price(&self, shipper: usize, service: usize, price: usize) -> Result<PriceEntry> {
        self.ladder(shipper, service)
            .and_then(|l| l.entries.get(price).copied())
            .ok_or_else(|| {
                Error::Index(format!(
                    "no price level {price} for shipper {shipper}, service {service}"
                ))
            })
    }

    pub fn cost(&self, facility: usize, customer: usize, service: usize) -> f64 {
        self.costs[facility][customer][service]
    }

    /// Every offerable `(n, k, m, p)` with `m ∈ M_nk` and `p ∈ P_n^m`, in
    /// lexicographic order.
    pub fn offers(&self) -> Vec<OfferKey> {
        let mut out = Vec::new();
        for (n, s) in self.shippers.iter().enumerate() {
            for (k, cat) in s.categories.iter().enumerate() {
                let mut services = cat.services.clone();
                services.sort_unstable();
                for m in services {
                    if let Some(l) = self.ladder(n, m) {
                        for p in 0..l.entries.len() {
                            out.push(OfferKey::new(n, k, m, p));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn total_capacity(&self) -> f64 {
        self.facilities.iter().map(|f| f.capacity).sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.customers.iter().map(|c| c.demand).sum()
    }

    /// Total capacity over total demand.
    pub fn capacity_ratio(&self) -> f64 {
        self.total_capacity() / self.total_demand()
    }

    /// Returns a copy whose capacities are all multiplied by a common factor
    /// so that total capacity over total demand equals `ratio`. Demands,
    /// fixed costs and everything else are left unchanged.
    pub fn scale_to_ratio(&self, ratio: f64) -> Result<Instance> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::Parameter(format!("ratio must be positive, got {ratio}")));
        }
        let factor = ratio / self.capacity_ratio();
        let mut out = self.clone();
        if factor != 1.0 {
            for f in &mut out.facilities {
                f.capacity *= factor;
            }
        }
        Ok(out)
    }
}
