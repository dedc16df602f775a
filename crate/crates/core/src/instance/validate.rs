use std::fmt;

use super::Instance;

/// A broken invariant in an [`Instance`]. Violations are data, not errors:
/// [`validate`] collects all of them.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveCapacity { facility: usize, value: f64 },
    NegativeFixedCost { facility: usize, value: f64 },
    NonPositiveDemand { customer: usize, value: f64 },
    UnknownShipper { customer: usize, shipper: usize },
    UnknownCategory { customer: usize, shipper: usize, category: usize },
    UnknownService { shipper: usize, category: usize, service: usize },
    GammaBelowOne { service: usize, value: f64 },
    MissingLadder { shipper: usize, service: usize },
    LadderIndex { ladder: usize, shipper: usize, service: usize },
    DuplicateLadder { shipper: usize, service: usize },
    NonIncreasingPrices { shipper: usize, service: usize },
    InvalidPriceEntry { shipper: usize, service: usize, price: usize },
    CostShape { detail: String },
    NegativeCost { facility: usize, customer: usize, service: usize, value: f64 },
    ChoiceModel { detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NonPositiveCapacity { facility, value } => {
                write!(f, "facility {facility}: capacity {value} is not positive")
            }
            NegativeFixedCost { facility, value } => {
                write!(f, "facility {facility}: fixed cost {value} is negative")
            }
            NonPositiveDemand { customer, value } => {
                write!(f, "customer {customer}: demand {value} is not positive")
            }
            UnknownShipper { customer, shipper } => {
                write!(f, "customer {customer}: shipper {shipper} does not exist")
            }
            UnknownCategory { customer, shipper, category } => write!(
                f,
                "customer {customer}: category {category} does not exist for shipper {shipper}"
            ),
            UnknownService { shipper, category, service } => write!(
                f,
                "category ({shipper}, {category}): service {service} does not exist"
            ),
            GammaBelowOne { service, value } => {
                write!(f, "service {service}: gamma {value} is below 1")
            }
            MissingLadder { shipper, service } => write!(
                f,
                "service {service} is available to shipper {shipper} but has no price ladder"
            ),
            LadderIndex { ladder, shipper, service } => write!(
                f,
                "price ladder {ladder} references shipper {shipper} / service {service} out of range"
            ),
            DuplicateLadder { shipper, service } => {
                write!(f, "duplicate price ladder for shipper {shipper}, service {service}")
            }
            NonIncreasingPrices { shipper, service } => write!(
                f,
                "prices for shipper {shipper}, service {service} are not strictly increasing"
            ),
            InvalidPriceEntry { shipper, service, price } => write!(
                f,
                "price level {price} for shipper {shipper}, service {service} needs price > 0 and min_demand >= 0"
            ),
            CostShape { detail } => write!(f, "cost array: {detail}"),
            NegativeCost { facility, customer, service, value } => write!(
                f,
                "cost (i={facility}, j={customer}, m={service}) = {value} is negative"
            ),
            ChoiceModel { detail } => write!(f, "choice model: {detail}"),
        }
    }
}

/// Checks every structural invariant of an instance. Returns an empty list
/// iff the instance is well formed.
pub fn validate(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n_srv = inst.service_levels.len();

    for (i, f) in inst.facilities.iter().enumerate() {
        if !(f.capacity > 0.0) {
            out.push(Violation::NonPositiveCapacity { facility: i, value: f.capacity });
        }
        if !(f.fixed_cost >= 0.0) {
            out.push(Violation::NegativeFixedCost { facility: i, value: f.fixed_cost });
        }
    }

    for (m, s) in inst.service_levels.iter().enumerate() {
        if !(s.gamma >= 1.0) {
            out.push(Violation::GammaBelowOne { service: m, value: s.gamma });
        }
    }

    for (n, s) in inst.shippers.iter().enumerate() {
        for (k, cat) in s.categories.iter().enumerate() {
            for &m in &cat.services {
                if m >= n_srv {
                    out.push(Violation::UnknownService { shipper: n, category: k, service: m });
                } else if inst.ladder(n, m).is_none() {
                    out.push(Violation::MissingLadder { shipper: n, service: m });
                }
            }
        }
    }

    let mut seen = std::collections::BTreeSet::new();
    for (idx, l) in inst.price_ladders.iter().enumerate() {
        if l.shipper >= inst.shippers.len() || l.service >= n_srv {
            out.push(Violation::LadderIndex { ladder: idx, shipper: l.shipper, service: l.service });
            continue;
        }
        if !seen.insert((l.shipper, l.service)) {
            out.push(Violation::DuplicateLadder { shipper: l.shipper, service: l.service });
        }
        if l.entries.windows(2).any(|w| !(w[0].price < w[1].price)) {
            out.push(Violation::NonIncreasingPrices { shipper: l.shipper, service: l.service });
        }
        for (p, e) in l.entries.iter().enumerate() {
            if !(e.price > 0.0 && e.min_demand >= 0.0) {
                out.push(Violation::InvalidPriceEntry {
                    shipper: l.shipper,
                    service: l.service,
                    price: p,
                });
            }
        }
    }

    let mut customer_ok = vec![false; inst.customers.len()];
    for (j, c) in inst.customers.iter().enumerate() {
        if !(c.demand > 0.0) {
            out.push(Violation::NonPositiveDemand { customer: j, value: c.demand });
        }
        match inst.shippers.get(c.shipper) {
            None => out.push(Violation::UnknownShipper { customer: j, shipper: c.shipper }),
            Some(s) if c.category >= s.categories.len() => out.push(Violation::UnknownCategory {
                customer: j,
                shipper: c.shipper,
                category: c.category,
            }),
            Some(_) => customer_ok[j] = true,
        }
    }

    if inst.costs.len() != inst.facilities.len() {
        out.push(Violation::CostShape {
            detail: format!(
                "{} facility rows for {} facilities",
                inst.costs.len(),
                inst.facilities.len()
            ),
        });
    } else {
        for (i, row) in inst.costs.iter().enumerate() {
            if row.len() != inst.customers.len() {
                out.push(Violation::CostShape {
                    detail: format!("facility {i} has {} customer entries", row.len()),
                });
                continue;
            }
            for (j, per_service) in row.iter().enumerate() {
                if per_service.len() != n_srv {
                    out.push(Violation::CostShape {
                        detail: format!("(i={i}, j={j}) has {} service entries", per_service.len()),
                    });
                    continue;
                }
                if !customer_ok[j] {
                    continue;
                }
                for &m in inst.customer_services(j) {
                    if m < n_srv && !(per_service[m] >= 0.0) {
                        out.push(Violation::NegativeCost {
                            facility: i,
                            customer: j,
                            service: m,
                            value: per_service[m],
                        });
                    }
                }
            }
        }
    }

    for detail in inst.choice_model.shape_problems(inst) {
        out.push(Violation::ChoiceModel { detail });
    }
    out
}
