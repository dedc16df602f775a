//! Structured view of the reduced single-level model.
//!
//! A [`ReducedProblem`] holds exactly the numbers that appear in the MILP:
//! fixed costs, capacities, offer caps, minimum demands, ρ-weighted revenues
//! and ρ-weighted assignment costs. [`ReducedProblem::to_model`] emits the
//! MILP; [`ReducedProblem::from_model`] recovers the structure from a model's
//! tags and coefficients so that specialised solvers can run on any model
//! that round-trips exactly.

use std::collections::HashMap;

use super::model::{Constraint, MilpModel, ObjSense, RowTag, Sense, VarKind, VarTag, Variable};
use crate::choice::RhoTable;
use crate::error::{Error, Result};
use crate::instance::{Instance, OfferKey};

#[derive(Debug, Clone, PartialEq)]
pub struct Facility {
    pub id: usize,
    pub fixed_cost: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub service: usize,
    /// `l_n^{mp}` for each price level `p`.
    pub min_demand: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shipper {
    pub id: usize,
    /// Right-hand side of the per-shipper offer cap, `|K_n|`.
    pub offer_cap: f64,
    /// Ladders in increasing service order.
    pub ladders: Vec<Ladder>,
    /// Indices into [`ReducedProblem::categories`].
    pub categories: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryService {
    pub service: usize,
    /// Index into the shipper's `ladders`.
    pub ladder: usize,
    /// `ρ d_k q` for each price level.
    pub revenue: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Category {
    pub shipper: usize,
    pub id: usize,
    /// `d_k`, the coefficient of `z` in the minimum-demand rows.
    pub demand: f64,
    pub services: Vec<CategoryService>,
    /// Indices into [`ReducedProblem::customers`].
    pub customers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceUse {
    /// `γ^m d_j`.
    pub usage: f64,
    /// `ρ c_ij^m`, indexed `[p][i]`.
    pub cost: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Customer {
    pub id: usize,
    /// Index into [`ReducedProblem::categories`].
    pub category: usize,
    /// Aligned with the category's `services`.
    pub uses: Vec<ServiceUse>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedProblem {
    pub facilities: Vec<Facility>,
    pub shippers: Vec<Shipper>,
    pub categories: Vec<Category>,
    pub customers: Vec<Customer>,
}

impl ReducedProblem {
    pub fn from_instance(inst: &Instance, rho: &RhoTable) -> Result<ReducedProblem> {
        let facilities = inst
            .facilities
            .iter()
            .enumerate()
            .map(|(i, f)| Facility { id: i, fixed_cost: f.fixed_cost, capacity: f.capacity })
            .collect();

        let mut shippers = Vec::new();
        let mut categories = Vec::new();
        let mut customers = Vec::new();
        for (n, s) in inst.shippers.iter().enumerate() {
            let services = inst.shipper_services(n);
            let ladders: Vec<Ladder> = services
                .iter()
                .map(|&m| Ladder {
                    service: m,
                    min_demand: inst.ladder(n, m).map(|l| l.entries.iter().map(|e| e.min_demand).collect()).unwrap_or_default(),
                })
                .collect();
            let mut cat_ids = Vec::new();
            for k in 0..s.categories.len() {
                let mut cat_services: Vec<usize> = inst.category_services(n, k).to_vec();
                cat_services.sort_unstable();
                cat_services.dedup();
                let demand = inst.category_demand(n, k);
                let mut cs = Vec::new();
                for &m in &cat_services {
                    let ladder = services.iter().position(|&x| x == m).ok_or_else(|| {
                        Error::Build(format!("service {m} of (n={n}, k={k}) has no price ladder"))
                    })?;
                    let revenue = (0..ladders[ladder].min_demand.len())
                        .map(|p| {
                            let r = rho.require(OfferKey::new(n, k, m, p))?;
                            Ok(r * demand * inst.price(n, m, p)?.price)
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    cs.push(CategoryService { service: m, ladder, revenue });
                }
                let cat_idx = categories.len();
                let mut cust_ids = Vec::new();
                for j in inst.category_customers(n, k) {
                    let d = inst.customers[j].demand;
                    let uses = cs
                        .iter()
                        .map(|c| {
                            let gamma = inst.service_levels[c.service].gamma;
                            let cost = (0..c.revenue.len())
                                .map(|p| {
                                    let r = rho.require(OfferKey::new(n, k, c.service, p))?;
                                    Ok((0..inst.num_facilities()).map(|i| r * inst.cost(i, j, c.service)).collect())
                                })
                                .collect::<Result<Vec<Vec<f64>>>>()?;
                            Ok(ServiceUse { usage: gamma * d, cost })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    cust_ids.push(customers.len());
                    customers.push(Customer { id: j, category: cat_idx, uses });
                }
                cat_ids.push(cat_idx);
                categories.push(Category { shipper: n, id: k, demand, services: cs, customers: cust_ids });
            }
            shippers.push(Shipper {
                id: n,
                offer_cap: s.categories.len() as f64,
                ladders,
                categories: cat_ids,
            });
        }
        // customers are listed per category above; the model orders them by id
        let mut order: Vec<usize> = (0..customers.len()).collect();
        order.sort_by_key(|&c| customers[c].id);
        let mut remap = vec![0; customers.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let customers: Vec<Customer> = order.iter().map(|&c| customers[c].clone()).collect();
        for c in &mut categories {
            for x in &mut c.customers {
                *x = remap[*x];
            }
        }
        Ok(ReducedProblem { facilities, shippers, categories, customers })
    }

    pub fn num_facilities(&self) -> usize {
        self.facilities.len()
    }

    /// Emits the linearized MILP. Rows with no terms are omitted.
    pub fn to_model(&self) -> MilpModel {
        let mut model = MilpModel { sense: ObjSense::Maximize, ..MilpModel::default() };
        let bin = |tag: VarTag| Variable::new(tag.name(), VarKind::Binary, 0.0, 1.0);
        let cont = |tag: VarTag, upper: f64| Variable::new(tag.name(), VarKind::Continuous, 0.0, upper);
        let nf = self.facilities.len();

        let r: Vec<usize> = self
            .facilities
            .iter()
            .map(|f| model.add_variable(bin(VarTag::Open { i: f.id })))
            .collect();
        // y[shipper][ladder][p]
        let y: Vec<Vec<Vec<usize>>> = self
            .shippers
            .iter()
            .map(|s| {
                s.ladders
                    .iter()
                    .map(|l| {
                        (0..l.min_demand.len())
                            .map(|p| model.add_variable(bin(VarTag::Price { n: s.id, m: l.service, p })))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        // z[category][service slot]
        let z: Vec<Vec<usize>> = self
            .categories
            .iter()
            .map(|c| {
                c.services
                    .iter()
                    .map(|cs| {
                        model.add_variable(bin(VarTag::Service { n: self.shippers[c.shipper].id, k: c.id, m: cs.service }))
                    })
                    .collect()
            })
            .collect();
        // w[facility][customer][service slot]
        let w: Vec<Vec<Vec<usize>>> = (0..nf)
            .map(|i| {
                self.customers
                    .iter()
                    .map(|cu| {
                        self.categories[cu.category]
                            .services
                            .iter()
                            .map(|cs| {
                                let tag = VarTag::Assign { i: self.facilities[i].id, j: cu.id, m: cs.service };
                                model.add_variable(cont(tag, 1.0))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        // pi[category][service slot][p]
        let pi: Vec<Vec<Vec<usize>>> = self
            .categories
            .iter()
            .map(|c| {
                let n = self.shippers[c.shipper].id;
                c.services
                    .iter()
                    .map(|cs| {
                        (0..cs.revenue.len())
                            .map(|p| {
                                let tag = VarTag::OfferLink { n, k: c.id, m: cs.service, p };
                                model.add_variable(cont(tag, f64::INFINITY))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        // nu[facility][customer][service slot][p]
        let nu: Vec<Vec<Vec<Vec<usize>>>> = (0..nf)
            .map(|i| {
                self.customers
                    .iter()
                    .map(|cu| {
                        self.categories[cu.category]
                            .services
                            .iter()
                            .map(|cs| {
                                (0..cs.revenue.len())
                                    .map(|p| {
                                        let tag = VarTag::CostLink { i: self.facilities[i].id, j: cu.id, m: cs.service, p };
                                        model.add_variable(cont(tag, f64::INFINITY))
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();

        // objective
        for (i, f) in self.facilities.iter().enumerate() {
            if f.fixed_cost != 0.0 {
                model.objective.push((r[i], -f.fixed_cost));
            }
        }
        for (c, cat) in self.categories.iter().enumerate() {
            for (s, cs) in cat.services.iter().enumerate() {
                for (p, &rev) in cs.revenue.iter().enumerate() {
                    if rev != 0.0 {
                        model.objective.push((pi[c][s][p], rev));
                    }
                }
            }
        }
        for i in 0..nf {
            for (j, cu) in self.customers.iter().enumerate() {
                for (s, u) in cu.uses.iter().enumerate() {
                    for (p, row) in u.cost.iter().enumerate() {
                        if row[i] != 0.0 {
                            model.objective.push((nu[i][j][s][p], -row[i]));
                        }
                    }
                }
            }
        }

        let push = |model: &mut MilpModel, tag: RowTag, terms: Vec<(usize, f64)>, sense, rhs| {
            if !terms.is_empty() {
                model.add_constraint(Constraint::new(tag.name(), terms, sense, rhs));
            }
        };

        for (sn, s) in self.shippers.iter().enumerate() {
            for (l, ladder) in s.ladders.iter().enumerate() {
                let terms = y[sn][l].iter().map(|&v| (v, 1.0)).collect();
                push(&mut model, RowTag::OnePrice { n: s.id, m: ladder.service }, terms, Sense::Le, 1.0);
            }
        }
        for (sn, s) in self.shippers.iter().enumerate() {
            let terms = y[sn].iter().flatten().map(|&v| (v, 1.0)).collect();
            push(&mut model, RowTag::OfferCap { n: s.id }, terms, Sense::Le, s.offer_cap);
        }
        for (c, cat) in self.categories.iter().enumerate() {
            let n = self.shippers[cat.shipper].id;
            let terms = z[c].iter().map(|&v| (v, 1.0)).collect();
            push(&mut model, RowTag::OneService { n, k: cat.id }, terms, Sense::Le, 1.0);
        }
        for (c, cat) in self.categories.iter().enumerate() {
            let n = self.shippers[cat.shipper].id;
            for (s, cs) in cat.services.iter().enumerate() {
                let mut terms = vec![(z[c][s], 1.0)];
                terms.extend(y[cat.shipper][cs.ladder].iter().map(|&v| (v, -1.0)));
                push(&mut model, RowTag::Priced { n, k: cat.id, m: cs.service }, terms, Sense::Le, 0.0);
            }
        }
        for (i, f) in self.facilities.iter().enumerate() {
            let mut terms = Vec::new();
            for (j, cu) in self.customers.iter().enumerate() {
                for (s, u) in cu.uses.iter().enumerate() {
                    terms.push((w[i][j][s], u.usage));
                }
            }
            terms.push((r[i], -f.capacity));
            push(&mut model, RowTag::Capacity { i: f.id }, terms, Sense::Le, 0.0);
        }
        for (i, f) in self.facilities.iter().enumerate() {
            for (j, cu) in self.customers.iter().enumerate() {
                if w[i][j].is_empty() {
                    continue;
                }
                let mut terms: Vec<(usize, f64)> = w[i][j].iter().map(|&v| (v, 1.0)).collect();
                terms.push((r[i], -1.0));
                push(&mut model, RowTag::OpenLink { i: f.id, j: cu.id }, terms, Sense::Le, 0.0);
            }
        }
        for (j, cu) in self.customers.iter().enumerate() {
            let cat = &self.categories[cu.category];
            for (s, cs) in cat.services.iter().enumerate() {
                let mut terms: Vec<(usize, f64)> = (0..nf).map(|i| (w[i][j][s], 1.0)).collect();
                terms.push((z[cu.category][s], -1.0));
                push(&mut model, RowTag::Assign { j: cu.id, m: cs.service }, terms, Sense::Eq, 0.0);
            }
        }
        for (sn, s) in self.shippers.iter().enumerate() {
            for (l, ladder) in s.ladders.iter().enumerate() {
                let mut terms = Vec::new();
                for &c in &s.categories {
                    let cat = &self.categories[c];
                    if let Some(slot) = cat.services.iter().position(|cs| cs.ladder == l) {
                        terms.push((z[c][slot], cat.demand));
                    }
                }
                for (p, &lmin) in ladder.min_demand.iter().enumerate() {
                    terms.push((y[sn][l][p], -lmin));
                }
                push(&mut model, RowTag::MinDemand { n: s.id, m: ladder.service }, terms, Sense::Ge, 0.0);
            }
        }

        // π linearization, one family at a time
        type PiRow = fn(usize, usize, usize, usize) -> RowTag;
        let pi_families: [(PiRow, u8); 4] = [
            (|n, k, m, p| RowTag::PiLeZ { n, k, m, p }, 0),
            (|n, k, m, p| RowTag::PiLeY { n, k, m, p }, 1),
            (|n, k, m, p| RowTag::PiGeYz { n, k, m, p }, 2),
            (|n, k, m, p| RowTag::PiNonneg { n, k, m, p }, 3),
        ];
        for (make, family) in pi_families {
            for (c, cat) in self.categories.iter().enumerate() {
                let n = self.shippers[cat.shipper].id;
                for (s, cs) in cat.services.iter().enumerate() {
                    for p in 0..cs.revenue.len() {
                        let (v, zv, yv) = (pi[c][s][p], z[c][s], y[cat.shipper][cs.ladder][p]);
                        let (terms, sense, rhs) = match family {
                            0 => (vec![(v, 1.0), (zv, -1.0)], Sense::Le, 0.0),
                            1 => (vec![(v, 1.0), (yv, -1.0)], Sense::Le, 0.0),
                            2 => (vec![(v, 1.0), (zv, -1.0), (yv, -1.0)], Sense::Ge, -1.0),
                            _ => (vec![(v, 1.0)], Sense::Ge, 0.0),
                        };
                        push(&mut model, make(n, cat.id, cs.service, p), terms, sense, rhs);
                    }
                }
            }
        }

        // ν linearization
        let nu_families: [(PiRow, u8); 4] = [
            (|i, j, m, p| RowTag::NuLeW { i, j, m, p }, 0),
            (|i, j, m, p| RowTag::NuLeY { i, j, m, p }, 1),
            (|i, j, m, p| RowTag::NuGeWy { i, j, m, p }, 2),
            (|i, j, m, p| RowTag::NuNonneg { i, j, m, p }, 3),
        ];
        for (make, family) in nu_families {
            for (i, f) in self.facilities.iter().enumerate() {
                for (j, cu) in self.customers.iter().enumerate() {
                    let cat = &self.categories[cu.category];
                    for (s, cs) in cat.services.iter().enumerate() {
                        for p in 0..cs.revenue.len() {
                            let (v, wv, yv) = (nu[i][j][s][p], w[i][j][s], y[cat.shipper][cs.ladder][p]);
                            let (terms, sense, rhs) = match family {
                                0 => (vec![(v, 1.0), (wv, -1.0)], Sense::Le, 0.0),
                                1 => (vec![(v, 1.0), (yv, -1.0)], Sense::Le, 0.0),
                                2 => (vec![(v, 1.0), (wv, -1.0), (yv, -1.0)], Sense::Ge, -1.0),
                                _ => (vec![(v, 1.0)], Sense::Ge, 0.0),
                            };
                            push(&mut model, make(f.id, cu.id, cs.service, p), terms, sense, rhs);
                        }
                    }
                }
            }
        }
        model
    }

    /// Recovers the structure of a model produced by [`Self::to_model`].
    /// Returns `None` unless rebuilding from the recovered structure yields a
    /// model identical to `model`.
    pub fn from_model(model: &MilpModel) -> Option<ReducedProblem> {
        let rp = Self::recover(model)?;
        (rp.to_model() == *model).then_some(rp)
    }

    fn recover(model: &MilpModel) -> Option<ReducedProblem> {
        if model.sense != ObjSense::Maximize {
            return None;
        }
        let obj = model.objective_dense();
        let row_of: HashMap<RowTag, usize> =
            model.constraints.iter().enumerate().map(|(r, c)| (c.tag, r)).collect();
        let coef = |tag: RowTag, var: usize| -> Option<f64> {
            let row = &model.constraints[*row_of.get(&tag)?];
            row.terms.iter().find(|t| t.0 == var).map(|t| t.1)
        };
        let coef_or_zero = |tag: RowTag, var: usize| -> f64 {
            match row_of.get(&tag) {
                Some(&r) => model.constraints[r].terms.iter().find(|t| t.0 == var).map_or(0.0, |t| t.1),
                None => 0.0,
            }
        };

        let mut facilities: Vec<Facility> = Vec::new();
        let mut fac_pos: HashMap<usize, usize> = HashMap::new();
        let mut shippers: Vec<Shipper> = Vec::new();
        let mut ship_pos: HashMap<usize, usize> = HashMap::new();
        let mut categories: Vec<Category> = Vec::new();
        let mut cat_pos: HashMap<(usize, usize), usize> = HashMap::new();
        let mut customers: Vec<Customer> = Vec::new();
        let mut cust_pos: HashMap<usize, usize> = HashMap::new();

        let shipper_slot = |shippers: &mut Vec<Shipper>, ship_pos: &mut HashMap<usize, usize>, n: usize| {
            *ship_pos.entry(n).or_insert_with(|| {
                shippers.push(Shipper {
                    id: n,
                    offer_cap: 0.0,
                    ladders: Vec::new(),
                    categories: Vec::new(),
                });
                shippers.len() - 1
            })
        };

        for (v, var) in model.variables.iter().enumerate() {
            match var.tag {
                VarTag::Open { i } => {
                    let capacity = -coef_or_zero(RowTag::Capacity { i }, v);
                    fac_pos.insert(i, facilities.len());
                    facilities.push(Facility { id: i, fixed_cost: -obj[v], capacity });
                }
                VarTag::Price { n, m, p } => {
                    let s = shipper_slot(&mut shippers, &mut ship_pos, n);
                    let sh = &mut shippers[s];
                    if sh.ladders.last().map(|l| l.service) != Some(m) {
                        if p != 0 {
                            return None;
                        }
                        sh.ladders.push(Ladder { service: m, min_demand: Vec::new() });
                    }
                    let ladder = sh.ladders.last_mut()?;
                    if ladder.min_demand.len() != p {
                        return None;
                    }
                    ladder.min_demand.push(-coef_or_zero(RowTag::MinDemand { n, m }, v));
                }
                VarTag::Service { n, k, m } => {
                    let s = *ship_pos.get(&n)?;
                    let c = *cat_pos.entry((n, k)).or_insert_with(|| {
                        categories.push(Category {
                            shipper: s,
                            id: k,
                            demand: f64::NAN,
                            services: Vec::new(),
                            customers: Vec::new(),
                        });
                        shippers[s].categories.push(categories.len() - 1);
                        categories.len() - 1
                    });
                    let ladder = shippers[s].ladders.iter().position(|l| l.service == m)?;
                    let d = coef(RowTag::MinDemand { n, m }, v)?;
                    let cat = &mut categories[c];
                    if !cat.demand.is_nan() && cat.demand.to_bits() != d.to_bits() {
                        return None;
                    }
                    cat.demand = d;
                    let levels = shippers[s].ladders[ladder].min_demand.len();
                    cat.services.push(CategoryService { service: m, ladder, revenue: vec![0.0; levels] });
                }
                VarTag::Assign { i, j, m } => {
                    if fac_pos.get(&i) != Some(&0) {
                        // customers are discovered from the first facility's block
                        continue;
                    }
                    let row = &model.constraints[*row_of.get(&RowTag::Assign { j, m })?];
                    let zv = row.terms.iter().find(|t| matches!(model.variables[t.0].tag, VarTag::Service { .. }))?.0;
                    let VarTag::Service { n, k, .. } = model.variables[zv].tag else { return None };
                    let c = *cat_pos.get(&(n, k))?;
                    let cu = *cust_pos.entry(j).or_insert_with(|| {
                        customers.push(Customer { id: j, category: c, uses: Vec::new() });
                        categories[c].customers.push(customers.len() - 1);
                        customers.len() - 1
                    });
                    let slot = categories[c].services.iter().position(|cs| cs.service == m)?;
                    if customers[cu].uses.len() != slot {
                        return None;
                    }
                    let usage = coef(RowTag::Capacity { i }, v)?;
                    let levels = categories[c].services[slot].revenue.len();
                    customers[cu].uses.push(ServiceUse { usage, cost: vec![vec![0.0; facilities.len()]; levels] });
                }
                VarTag::OfferLink { n, k, m, p } => {
                    let c = *cat_pos.get(&(n, k))?;
                    let cs = categories[c].services.iter_mut().find(|cs| cs.service == m)?;
                    *cs.revenue.get_mut(p)? = obj[v];
                }
                VarTag::CostLink { i, j, m, p } => {
                    let f = *fac_pos.get(&i)?;
                    let cu = *cust_pos.get(&j)?;
                    let slot = categories[customers[cu].category].services.iter().position(|cs| cs.service == m)?;
                    *customers[cu].uses.get_mut(slot)?.cost.get_mut(p)?.get_mut(f)? = -obj[v];
                }
                VarTag::Other => return None,
            }
        }
        for s in &mut shippers {
            s.offer_cap = row_of
                .get(&RowTag::OfferCap { n: s.id })
                .map_or(0.0, |&r| model.constraints[r].rhs);
        }
        Some(ReducedProblem { facilities, shippers, categories, customers })
    }

    /// Relaxation bound ignoring capacities, offer caps and minimum demands:
    /// every category takes its best single option served at the cheapest
    /// facility, and at least one facility must be paid for if anything is
    /// earned.
    pub fn profit_upper_bound(&self) -> f64 {
        let per_category: f64 = self
            .categories
            .iter()
            .map(|cat| {
                let mut best = 0.0f64;
                for (s, cs) in cat.services.iter().enumerate() {
                    for (p, &rev) in cs.revenue.iter().enumerate() {
                        let cost: f64 = cat
                            .customers
                            .iter()
                            .map(|&cu| {
                                self.customers[cu].uses[s].cost[p].iter().copied().fold(f64::INFINITY, f64::min)
                            })
                            .sum();
                        best = best.max(rev - cost);
                    }
                }
                best
            })
            .sum();
        let min_fixed = self.facilities.iter().map(|f| f.fixed_cost).fold(f64::INFINITY, f64::min);
        if self.facilities.is_empty() {
            return if per_category > 0.0 { per_category } else { 0.0 };
        }
        per_category - min_fixed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, GeneratorParams};

    fn inst() -> Instance {
        generate(&GeneratorParams {
            facilities: 3,
            customers: 10,
            shippers: 2,
            categories: 2,
            services: 2,
            prices: 3,
            ..GeneratorParams::default()
        })
        .unwrap()
    }

    #[test]
    fn model_round_trips_through_structure() {
        let inst = inst();
        let rho = RhoTable::closed_form(&inst).unwrap();
        let rp = ReducedProblem::from_instance(&inst, &rho).unwrap();
        let model = rp.to_model();
        let back = ReducedProblem::from_model(&model).expect("structure recovered");
        assert_eq!(back, rp);
    }

    #[test]
    fn perturbed_model_is_not_structured() {
        let inst = inst();
        let rho = RhoTable::closed_form(&inst).unwrap();
        let mut model = ReducedProblem::from_instance(&inst, &rho).unwrap().to_model();
        model.constraints[0].rhs = 2.0;
        assert!(ReducedProblem::from_model(&model).is_none());
        let mut model2 = ReducedProblem::from_instance(&inst, &rho).unwrap().to_model();
        model2.constraints.pop();
        assert!(ReducedProblem::from_model(&model2).is_none());
    }
}
