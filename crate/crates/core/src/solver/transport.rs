//! Capacitated assignment of offered customers to open facilities.
//!
//! Every offered customer `c` must be fully assigned (fractions summing to
//! one); assigning it entirely to facility `f` uses `usage[c]` capacity and
//! costs `cost[c][f]`. The cost is linear in the fraction. When every
//! customer fits at its cheapest facility that assignment is optimal;
//! otherwise the problem is solved as a min-cost flow by successive
//! shortest paths found with Bellman-Ford.

use crate::choice::RhoTable;
use crate::error::{Error, Result};
use crate::instance::{Instance, OfferKey};

#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    pub cost: f64,
    /// `fraction[c][f]`.
    pub fraction: Vec<Vec<f64>>,
}

/// Relative tolerance on unmet demand.
const FLOW_TOL: f64 = 1e-9;

/// Minimum-cost full assignment, or `None` when capacity is insufficient.
pub fn assign(usage: &[f64], capacity: &[f64], cost: &[Vec<f64>]) -> Option<Transport> {
    let nc = usage.len();
    let nf = capacity.len();
    if nc == 0 {
        return Some(Transport { cost: 0.0, fraction: Vec::new() });
    }
    if nf == 0 {
        return None;
    }

    // fast path: everyone at the cheapest facility
    let mut load = vec![0.0; nf];
    let mut choice = Vec::with_capacity(nc);
    for c in 0..nc {
        let best = (0..nf)
            .min_by(|&a, &b| cost[c][a].total_cmp(&cost[c][b]))
            .expect("at least one facility");
        load[best] += usage[c];
        choice.push(best);
    }
    if load.iter().zip(capacity).all(|(l, u)| *l <= *u) {
        let mut fraction = vec![vec![0.0; nf]; nc];
        let mut total = 0.0;
        for (c, &f) in choice.iter().enumerate() {
            fraction[c][f] = 1.0;
            total += cost[c][f];
        }
        return Some(Transport { cost: total, fraction });
    }

    let demand: f64 = usage.iter().sum();
    if capacity.iter().sum::<f64>() < demand * (1.0 - FLOW_TOL) {
        return None;
    }
    min_cost_flow(usage, capacity, cost)
}

#[derive(Clone, Copy)]
struct Edge {
    to: usize,
    rev: usize,
    cap: f64,
    cost: f64,
}

fn min_cost_flow(usage: &[f64], capacity: &[f64], cost: &[Vec<f64>]) -> Option<Transport> {
    let nc = usage.len();
    let nf = capacity.len();
    let source = nc + nf;
    let sink = source + 1;
    let nodes = sink + 1;
    let mut graph: Vec<Vec<Edge>> = vec![Vec::new(); nodes];
    let add = |g: &mut Vec<Vec<Edge>>, a: usize, b: usize, cap: f64, cost: f64| {
        let ra = g[b].len();
        let rb = g[a].len();
        g[a].push(Edge { to: b, rev: ra, cap, cost });
        g[b].push(Edge { to: a, rev: rb, cap: 0.0, cost: -cost });
    };
    for c in 0..nc {
        add(&mut graph, source, c, usage[c], 0.0);
        for f in 0..nf {
            add(&mut graph, c, nc + f, f64::INFINITY, cost[c][f] / usage[c]);
        }
    }
    for f in 0..nf {
        add(&mut graph, nc + f, sink, capacity[f], 0.0);
    }

    let demand: f64 = usage.iter().sum();
    let eps = FLOW_TOL * demand.max(1.0);
    let mut flow = 0.0;
    let residual = eps * 1e-3;
    let mut dist = vec![0.0; nodes];
    let mut prev: Vec<(usize, usize)> = vec![(usize::MAX, 0); nodes];
    while flow < demand - eps {
        // Bellman-Ford: residual costs can be negative
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        dist[source] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if !dist[u].is_finite() {
                    continue;
                }
                for (k, e) in graph[u].iter().enumerate() {
                    if e.cap <= residual {
                        continue;
                    }
                    let nd = dist[u] + e.cost;
                    if nd < dist[e.to] - 1e-12 * (1.0 + nd.abs()) {
                        dist[e.to] = nd;
                        prev[e.to] = (u, k);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if !dist[sink].is_finite() {
            return None;
        }
        let mut push = demand - flow;
        let mut v = sink;
        let mut steps = 0;
        while v != source {
            let (u, k) = prev[v];
            push = push.min(graph[u][k].cap);
            v = u;
            steps += 1;
            if steps > nodes {
                // rounding produced a cycle in the predecessor tree
                return None;
            }
        }
        let mut v = sink;
        while v != source {
            let (u, k) = prev[v];
            graph[u][k].cap -= push;
            let rev = graph[u][k].rev;
            graph[v][rev].cap += push;
            v = u;
        }
        flow += push;
    }

    let mut fraction = vec![vec![0.0; nf]; nc];
    let mut total = 0.0;
    for c in 0..nc {
        let mut sum = 0.0;
        for e in &graph[c] {
            if e.to >= nc && e.to < nc + nf {
                // reverse edge capacity holds the flow
                let f = e.to - nc;
                let sent = graph[e.to][e.rev].cap;
                let x = (sent / usage[c]).clamp(0.0, 1.0);
                fraction[c][f] = x;
                sum += x;
            }
        }
        // renormalise rounding drift so assignments sum to exactly one
        if sum > 0.0 {
            for f in 0..nf {
                fraction[c][f] /= sum;
                total += fraction[c][f] * cost[c][f];
            }
        }
    }
    Some(Transport { cost: total, fraction })
}

/// Result of [`transportation`] on instance data.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub feasible: bool,
    pub cost: f64,
    /// `(facility, customer, service, fraction)` for non-zero fractions.
    pub allocation: Vec<(usize, usize, usize, f64)>,
}

/// Cheapest ρ-weighted assignment of the customers of the offered
/// categories to the open facilities. `offers` lists `(n, k, m, p)`.
pub fn transportation(inst: &Instance, rho: &RhoTable, open: &[usize], offers: &[OfferKey]) -> Result<TransportResult> {
    let mut usage = Vec::new();
    let mut cost = Vec::new();
    let mut who = Vec::new();
    for key in offers {
        let r = rho.require(*key)?;
        if !inst.category_services(key.shipper, key.category).contains(&key.service) {
            return Err(Error::Index(format!("service not available for offer {key}")));
        }
        let gamma = inst.service_levels[key.service].gamma;
        for j in inst.category_customers(key.shipper, key.category) {
            usage.push(gamma * inst.customers[j].demand);
            cost.push(open.iter().map(|&i| r * inst.cost(i, j, key.service)).collect());
            who.push((j, key.service));
        }
    }
    let capacity: Vec<f64> = open.iter().map(|&i| inst.facilities[i].capacity).collect();
    Ok(match assign(&usage, &capacity, &cost) {
        None => TransportResult { feasible: false, cost: f64::INFINITY, allocation: Vec::new() },
        Some(t) => {
            let mut allocation = Vec::new();
            for (c, &(j, m)) in who.iter().enumerate() {
                for (f, &x) in t.fraction[c].iter().enumerate() {
                    if x > 0.0 {
                        allocation.push((open[f], j, m, x));
                    }
                }
            }
            TransportResult { feasible: true, cost: t.cost, allocation }
        }
    })
}
