//! Solver-agnostic MILP representation.
//!
//! Variable and row names carry their semantic tag, e.g. `y_n2_m1_p0` or
//! `capacity_i3`, so a model read back from an LP file keeps its structure.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarTag {
    /// `r_i`
    Open { i: usize },
    /// `y_n^{mp}`
    Price { n: usize, m: usize, p: usize },
    /// `z_nk^m`
    Service { n: usize, k: usize, m: usize },
    /// `w_ij^m`
    Assign { i: usize, j: usize, m: usize },
    /// `π_nk^{mp} = y_n^{mp} z_nk^m`
    OfferLink { n: usize, k: usize, m: usize, p: usize },
    /// `ν_ij^{mp} = w_ij^m y_{n_j}^{mp}`
    CostLink { i: usize, j: usize, m: usize, p: usize },
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowTag {
    OnePrice { n: usize, m: usize },
    OfferCap { n: usize },
    OneService { n: usize, k: usize },
    Priced { n: usize, k: usize, m: usize },
    Capacity { i: usize },
    OpenLink { i: usize, j: usize },
    Assign { j: usize, m: usize },
    MinDemand { n: usize, m: usize },
    PiLeZ { n: usize, k: usize, m: usize, p: usize },
    PiLeY { n: usize, k: usize, m: usize, p: usize },
    PiGeYz { n: usize, k: usize, m: usize, p: usize },
    PiNonneg { n: usize, k: usize, m: usize, p: usize },
    NuLeW { i: usize, j: usize, m: usize, p: usize },
    NuLeY { i: usize, j: usize, m: usize, p: usize },
    NuGeWy { i: usize, j: usize, m: usize, p: usize },
    NuNonneg { i: usize, j: usize, m: usize, p: usize },
    Other,
}

fn encode(prefix: &str, parts: &[(char, usize)]) -> String {
    let mut s = prefix.to_string();
    for (c, v) in parts {
        s.push('_');
        s.push(*c);
        s.push_str(&v.to_string());
    }
    s
}

/// Splits `prefix_a1_b2` into `("prefix", [('a', 1), ('b', 2)])`.
fn decode(name: &str) -> (&str, Vec<(char, usize)>) {
    let mut parts = Vec::new();
    let mut rest = name;
    while let Some(pos) = rest.rfind('_') {
        let seg = &rest[pos + 1..];
        let mut chars = seg.chars();
        let Some(c) = chars.next() else { break };
        let digits = chars.as_str();
        if !c.is_ascii_lowercase() || digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            break;
        }
        let Ok(v) = digits.parse() else { break };
        parts.push((c, v));
        rest = &rest[..pos];
    }
    parts.reverse();
    (rest, parts)
}

fn fields<const N: usize>(parts: &[(char, usize)], keys: [char; N]) -> Option<[usize; N]> {
    if parts.len() != N {
        return None;
    }
    let mut out = [0; N];
    for (slot, (&(c, v), key)) in out.iter_mut().zip(parts.iter().zip(keys)) {
        if c != key {
            return None;
        }
        *slot = v;
    }
    Some(out)
}

impl VarTag {
    pub fn name(self) -> String {
        use VarTag::*;
        match self {
            Open { i } => encode("r", &[('i', i)]),
            Price { n, m, p } => encode("y", &[('n', n), ('m', m), ('p', p)]),
            Service { n, k, m } => encode("z", &[('n', n), ('k', k), ('m', m)]),
            Assign { i, j, m } => encode("w", &[('i', i), ('j', j), ('m', m)]),
            OfferLink { n, k, m, p } => encode("pi", &[('n', n), ('k', k), ('m', m), ('p', p)]),
            CostLink { i, j, m, p } => encode("nu", &[('i', i), ('j', j), ('m', m), ('p', p)]),
            Other => "x".into(),
        }
    }

    pub fn from_name(name: &str) -> VarTag {
        let (prefix, parts) = decode(name);
        let tag = match prefix {
            "r" => fields(&parts, ['i']).map(|[i]| VarTag::Open { i }),
            "y" => fields(&parts, ['n', 'm', 'p']).map(|[n, m, p]| VarTag::Price { n, m, p }),
            "z" => fields(&parts, ['n', 'k', 'm']).map(|[n, k, m]| VarTag::Service { n, k, m }),
            "w" => fields(&parts, ['i', 'j', 'm']).map(|[i, j, m]| VarTag::Assign { i, j, m }),
            "pi" => fields(&parts, ['n', 'k', 'm', 'p']).map(|[n, k, m, p]| VarTag::OfferLink { n, k, m, p }),
            "nu" => fields(&parts, ['i', 'j', 'm', 'p']).map(|[i, j, m, p]| VarTag::CostLink { i, j, m, p }),
            _ => None,
        };
        tag.unwrap_or(VarTag::Other)
    }
}

impl RowTag {
    pub fn name(self) -> String {
        use RowTag::*;
        let nkmp = |pre: &str, n, k, m, p| encode(pre, &[('n', n), ('k', k), ('m', m), ('p', p)]);
        let ijmp = |pre: &str, i, j, m, p| encode(pre, &[('i', i), ('j', j), ('m', m), ('p', p)]);
        match self {
            OnePrice { n, m } => encode("one_price", &[('n', n), ('m', m)]),
            OfferCap { n } => encode("offer_cap", &[('n', n)]),
            OneService { n, k } => encode("one_service", &[('n', n), ('k', k)]),
            Priced { n, k, m } => encode("priced", &[('n', n), ('k', k), ('m', m)]),
            Capacity { i } => encode("capacity", &[('i', i)]),
            OpenLink { i, j } => encode("open", &[('i', i), ('j', j)]),
            Assign { j, m } => encode("assign", &[('j', j), ('m', m)]),
            MinDemand { n, m } => encode("min_demand", &[('n', n), ('m', m)]),
            PiLeZ { n, k, m, p } => nkmp("pi_le_z", n, k, m, p),
            PiLeY { n, k, m, p } => nkmp("pi_le_y", n, k, m, p),
            PiGeYz { n, k, m, p } => nkmp("pi_ge_yz", n, k, m, p),
            PiNonneg { n, k, m, p } => nkmp("pi_nonneg", n, k, m, p),
            NuLeW { i, j, m, p } => ijmp("nu_le_w", i, j, m, p),
            NuLeY { i, j, m, p } => ijmp("nu_le_y", i, j, m, p),
            NuGeWy { i, j, m, p } => ijmp("nu_ge_wy", i, j, m, p),
            NuNonneg { i, j, m, p } => ijmp("nu_nonneg", i, j, m, p),
            Other => "c".into(),
        }
    }

    pub fn from_name(name: &str) -> RowTag {
        use RowTag::*;
        let (prefix, parts) = decode(name);
        let nkmp = |f: fn(usize, usize, usize, usize) -> RowTag| {
            fields(&parts, ['n', 'k', 'm', 'p']).map(|[n, k, m, p]| f(n, k, m, p))
        };
        let ijmp = |f: fn(usize, usize, usize, usize) -> RowTag| {
            fields(&parts, ['i', 'j', 'm', 'p']).map(|[i, j, m, p]| f(i, j, m, p))
        };
        let tag = match prefix {
            "one_price" => fields(&parts, ['n', 'm']).map(|[n, m]| OnePrice { n, m }),
            "offer_cap" => fields(&parts, ['n']).map(|[n]| OfferCap { n }),
            "one_service" => fields(&parts, ['n', 'k']).map(|[n, k]| OneService { n, k }),
            "priced" => fields(&parts, ['n', 'k', 'm']).map(|[n, k, m]| Priced { n, k, m }),
            "capacity" => fields(&parts, ['i']).map(|[i]| Capacity { i }),
            "open" => fields(&parts, ['i', 'j']).map(|[i, j]| OpenLink { i, j }),
            "assign" => fields(&parts, ['j', 'm']).map(|[j, m]| Assign { j, m }),
            "min_demand" => fields(&parts, ['n', 'm']).map(|[n, m]| MinDemand { n, m }),
            "pi_le_z" => nkmp(|n, k, m, p| PiLeZ { n, k, m, p }),
            "pi_le_y" => nkmp(|n, k, m, p| PiLeY { n, k, m, p }),
            "pi_ge_yz" => nkmp(|n, k, m, p| PiGeYz { n, k, m, p }),
            "pi_nonneg" => nkmp(|n, k, m, p| PiNonneg { n, k, m, p }),
            "nu_le_w" => ijmp(|i, j, m, p| NuLeW { i, j, m, p }),
            "nu_le_y" => ijmp(|i, j, m, p| NuLeY { i, j, m, p }),
            "nu_ge_wy" => ijmp(|i, j, m, p| NuGeWy { i, j, m, p }),
            "nu_nonneg" => ijmp(|i, j, m, p| NuNonneg { i, j, m, p }),
            _ => None,
        };
        tag.unwrap_or(Other)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub tag: VarTag,
}

impl Variable {
    pub fn new(name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> Self {
        let name = name.into();
        let tag = VarTag::from_name(&name);
        Variable { name, kind, lower, upper, tag }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub tag: RowTag,
    /// `(variable index, coefficient)` pairs.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(name: impl Into<String>, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        let name = name.into();
        let tag = RowTag::from_name(&name);
        Constraint { name, tag, terms, sense, rhs }
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v]).sum()
    }

    /// Amount by which `values` violate this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ObjSense {
    #[default]
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Sparse objective, `(variable index, coefficient)`.
    pub objective: Vec<(usize, f64)>,
    pub sense: ObjSense,
}

/// A row or bound not satisfied by a candidate point.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: String,
    pub amount: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated by {:e}", self.constraint, self.amount)
    }
}

/// Variable counts by semantic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VarCounts {
    pub r: usize,
    pub y: usize,
    pub z: usize,
    pub w: usize,
    pub pi: usize,
    pub nu: usize,
    pub other: usize,
}

impl MilpModel {
    pub fn add_variable(&mut self, var: Variable) -> usize {
        self.variables.push(var);
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, row: Constraint) -> usize {
        self.constraints.push(row);
        self.constraints.len() - 1
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn counts(&self) -> VarCounts {
        let mut c = VarCounts::default();
        for v in &self.variables {
            match v.tag {
                VarTag::Open { .. } => c.r += 1,
                VarTag::Price { .. } => c.y += 1,
                VarTag::Service { .. } => c.z += 1,
                VarTag::Assign { .. } => c.w += 1,
                VarTag::OfferLink { .. } => c.pi += 1,
                VarTag::CostLink { .. } => c.nu += 1,
                VarTag::Other => c.other += 1,
            }
        }
        c
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Dense objective vector.
    pub fn objective_dense(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.variables.len()];
        for &(v, a) in &self.objective {
            c[v] += a;
        }
        c
    }

    pub fn find_variable(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Rows, bounds and integrality not met by `values` at tolerance `tol`.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        for (v, x) in self.variables.iter().zip(values) {
            let amount = (v.lower - x).max(x - v.upper).max(0.0);
            if amount > tol {
                out.push(Violation { constraint: format!("bounds of {}", v.name), amount });
            }
            if v.kind == VarKind::Binary && (x - x.round()).abs() > tol {
                out.push(Violation {
                    constraint: format!("integrality of {}", v.name),
                    amount: (x - x.round()).abs(),
                });
            }
        }
        for row in &self.constraints {
            let amount = row.violation(values);
            if amount > tol {
                out.push(Violation { constraint: row.name.clone(), amount });
            }
        }
        out
    }
}
