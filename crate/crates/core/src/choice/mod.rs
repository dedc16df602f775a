//! Random-utility demand layer.
//!
//! Each (shipper, category) compares one offered alternative `(m, p)`
//! against the opt-out. Deterministic utilities are `alpha * q + L` for an
//! offer and `L_optout` for the opt-out; both receive independent
//! Gumbel(0, beta) noise. The difference of two such draws is logistic with
//! scale `beta`, which gives the closed-form acceptance probability.

mod scenario;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, OfferKey};
use crate::par::{self, Exec};

pub use scenario::{gumbel_from_uniform, ScenarioSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceModel {
    /// Price sensitivity.
    pub alpha: f64,
    /// Gumbel scale, strictly positive.
    pub beta: f64,
    /// Service preference `L_nk^m`, indexed `[shipper][category][service]`.
    #[serde(rename = "L")]
    pub preference: Vec<Vec<Vec<f64>>>,
    /// Opt-out utility `L_nk^0`, indexed `[shipper][category]`.
    #[serde(rename = "L_optout")]
    pub optout: Vec<Vec<f64>>,
    /// Zero-noise limit: acceptance is the indicator `V_offer > V_optout`.
    #[serde(default)]
    pub deterministic: bool,
}

/// Follower response to a single offer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Accept,
    Reject,
}

/// Accept iff the offer is strictly better than the opt-out. Exact ties
/// reject.
pub fn accept_rule(u_offer: f64, u_optout: f64) -> Response {
    if u_offer - u_optout > 0.0 {
        Response::Accept
    } else {
        Response::Reject
    }
}

/// Logistic acceptance probability for a deterministic utility gap.
pub fn logit_probability(v_offer: f64, v_optout: f64, beta: f64) -> f64 {
    1.0 / (1.0 + ((v_optout - v_offer) / beta).exp())
}

impl ChoiceModel {
    /// Same `L` for every (shipper, category, service) and the same opt-out
    /// utility everywhere.
    pub fn uniform(
        alpha: f64,
        beta: f64,
        preference: f64,
        optout: f64,
        shippers: usize,
        categories: usize,
        services: usize,
    ) -> Self {
        ChoiceModel {
            alpha,
            beta,
            preference: vec![vec![vec![preference; services]; categories]; shippers],
            optout: vec![vec![optout; categories]; shippers],
            deterministic: false,
        }
    }

    pub fn preference(&self, shipper: usize, category: usize, service: usize) -> Result<f64> {
        self.preference
            .get(shipper)
            .and_then(|v| v.get(category))
            .and_then(|v| v.get(service))
            .copied()
            .ok_or_else(|| {
                Error::Index(format!(
                    "no preference L for (n={shipper}, k={category}, m={service})"
                ))
            })
    }

    pub fn optout_utility(&self, shipper: usize, category: usize) -> Result<f64> {
        self.optout
            .get(shipper)
            .and_then(|v| v.get(category))
            .copied()
            .ok_or_else(|| Error::Index(format!("no opt-out utility for (n={shipper}, k={category})")))
    }

    /// `alpha * price + L_nk^m`.
    pub fn offer_utility(&self, shipper: usize, category: usize, service: usize, price: f64) -> Result<f64> {
        Ok(self.alpha * price + self.preference(shipper, category, service)?)
    }

    /// Acceptance probability for a given offer utility.
    pub fn probability(&self, v_offer: f64, v_optout: f64) -> f64 {
        if self.deterministic {
            match accept_rule(v_offer, v_optout) {
                Response::Accept => 1.0,
                Response::Reject => 0.0,
            }
        } else {
            logit_probability(v_offer, v_optout, self.beta)
        }
    }

    /// Problems with the array shapes relative to `inst`, for validation.
    pub(crate) fn shape_problems(&self, inst: &Instance) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.beta > 0.0) {
            out.push(format!("beta must be positive, got {}", self.beta));
        }
        if self.preference.len() != inst.shippers.len() || self.optout.len() != inst.shippers.len() {
            out.push("L / L_optout must have one entry per shipper".into());
            return out;
        }
        let n_srv = inst.service_levels.len();
        for (n, s) in inst.shippers.iter().enumerate() {
            if self.preference[n].len() != s.categories.len() || self.optout[n].len() != s.categories.len() {
                out.push(format!("shipper {n}: wrong number of categories in L / L_optout"));
                continue;
            }
            for k in 0..s.categories.len() {
                if self.preference[n][k].len() != n_srv {
                    out.push(format!("(n={n}, k={k}): L needs one value per service level"));
                }
            }
        }
        out
    }
}

impl Instance {
    /// Deterministic utility of offer `(n, k, m, p)`.
    pub fn deterministic_utility(&self, key: OfferKey) -> Result<f64> {
        if !self.category_services(key.shipper, key.category).contains(&key.service) {
            return Err(Error::Index(format!("service {} not available to {key}", key.service)));
        }
        let price = self.price(key.shipper, key.service, key.price)?.price;
        self.choice_model
            .offer_utility(key.shipper, key.category, key.service, price)
    }

    /// Deterministic utility of the opt-out for `(n, k)`.
    pub fn optout_utility(&self, shipper: usize, category: usize) -> Result<f64> {
        self.choice_model.optout_utility(shipper, category)
    }
}

/// Closed-form probability that offer `key` beats the opt-out.
pub fn rho_closed_form(inst: &Instance, key: OfferKey) -> Result<f64> {
    let v = inst.deterministic_utility(key)?;
    let v0 = inst.optout_utility(key.shipper, key.category)?;
    Ok(inst.choice_model.probability(v, v0))
}

/// Fraction of scenarios in which offer `key` strictly beats the opt-out.
pub fn rho_saa(inst: &Instance, key: OfferKey, scenarios: &ScenarioSet, exec: Exec) -> Result<f64> {
    if scenarios.count == 0 {
        return Err(Error::Parameter("scenario set is empty".into()));
    }
    let v = inst.deterministic_utility(key)?;
    let v0 = inst.optout_utility(key.shipper, key.category)?;
    let counts = par::block_reduce(exec, scenarios.count, |range| {
        range
            .filter(|&s| {
                let e = scenarios.offer_noise(s, key.shipper, key.category, key.service);
                let e0 = scenarios.optout_noise(s, key.shipper, key.category);
                accept_rule(v + e, v0 + e0) == Response::Accept
            })
            .count()
    });
    Ok(counts.iter().sum::<usize>() as f64 / scenarios.count as f64)
}

/// Solves for the price sensitivity giving acceptance probability `rho`
/// to an offer at `price` with preference `l` against opt-out utility `v0`.
pub fn alpha_for_target_rho(rho: f64, price: f64, l: f64, v0: f64, beta: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Parameter(format!("target probability must lie in (0, 1), got {rho}")));
    }
    if price == 0.0 {
        return Err(Error::Parameter("price must be non-zero".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::Parameter(format!("beta must be positive, got {beta}")));
    }
    Ok((v0 - l - beta * (1.0 / rho - 1.0).ln()) / price)
}

/// `count` equally spaced values from `first` to 0 inclusive.
pub fn alpha_sweep_values(first: f64, count: usize) -> Result<Vec<f64>> {
    if !(first < 0.0) {
        return Err(Error::Parameter(format!("first alpha must be negative, got {first}")));
    }
    if count < 2 {
        return Err(Error::Parameter("an alpha sweep needs at least two values".into()));
    }
    let step = -first / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { 0.0 } else { first + step * i as f64 })
        .collect())
}

/// `2^l` for `l` in `lo..=hi`.
pub fn beta_sweep_values(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|l| 2f64.powi(l)).collect()
}

/// Acceptance probabilities for every offer of an instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RhoTable {
    entries: BTreeMap<OfferKey, f64>,
}

impl RhoTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn closed_form(inst: &Instance) -> Result<RhoTable> {
        inst.offers()
            .into_iter()
            .map(|key| Ok((key, rho_closed_form(inst, key)?)))
            .collect()
    }

    pub fn saa(inst: &Instance, scenarios: &ScenarioSet, exec: Exec) -> Result<RhoTable> {
        let offers = inst.offers();
        let values = par::map_slice(exec, &offers, |&key| rho_saa(inst, key, scenarios, Exec::Sequential));
        offers
            .into_iter()
            .zip(values)
            .map(|(key, v)| Ok((key, v?)))
            .collect()
    }

    /// The same probability for every offer (perfect information at 1,
    /// no information at 0.5, no demand at 0).
    pub fn constant(inst: &Instance, value: f64) -> RhoTable {
        inst.offers().into_iter().map(|k| (k, value)).collect()
    }

    pub fn insert(&mut self, key: OfferKey, value: f64) {
        self.entries.insert(key, value);
    }

    pub fn get(&self, key: OfferKey) -> Option<f64> {
        self.entries.get(&key).copied()
    }

    pub fn require(&self, key: OfferKey) -> Result<f64> {
        self.get(key)
            .ok_or_else(|| Error::Build(format!("missing acceptance probability for offer {key}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (OfferKey, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(OfferKey, f64)> for RhoTable {
    fn from_iter<T: IntoIterator<Item = (OfferKey, f64)>>(iter: T) -> Self {
        RhoTable {
            entries: iter.into_iter().collect(),
        }
    }
}
