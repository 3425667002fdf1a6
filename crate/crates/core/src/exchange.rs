//! Exchange graphs and flows between points of a base polytope.
//!
//! * `D(x)`: arc `(e, e')` when load can move from `e` to `e'` at `x`,
//!   capacity `c_x(e, e')`.
//! * `D(x, y)`: arc `(e, e')` when the move is feasible at `x` and the
//!   reverse move is feasible at `y`, capacity
//!   `min(c_x(e, e'), c_y(e', e))`.
//!
//! A bidirectional flow is a transshipment in `D(x, y)` where `e` supplies
//! `x_e - y_e`. Feasibility is decided exactly by an integer max-flow on
//! capacities scaled by [`FLOW_SCALE`].

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::ground::{GroundSet, LoadVector, Subset};
use crate::polymatroid::{greedy_vertex, slack_table, CapacityMatrix, SubmodularOracle, DEFAULT_TOL};

/// Capacities and supplies are multiplied by this and rounded before max-flow.
pub const FLOW_SCALE: f64 = 1e9;

/// Unmet demand above this makes a pair conflicting.
pub const CONFLICT_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Directed,
    Bidirectional,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExchangeArc {
    pub from: usize,
    pub to: usize,
    pub capacity: f64,
}

#[derive(Clone, Debug)]
pub struct ExchangeGraph {
    pub kind: GraphKind,
    pub ground: GroundSet,
    /// Arcs with capacity above tolerance, ordered by `(from, to)`.
    pub arcs: Vec<ExchangeArc>,
    /// `x_e - y_e` when a second point is involved.
    pub supply: Option<Vec<f64>>,
}

impl ExchangeGraph {
    fn from_matrix(kind: GraphKind, ground: &GroundSet, cap: impl Fn(usize, usize) -> f64) -> Self {
        let m = ground.len();
        let mut arcs = Vec::new();
        for from in 0..m {
            for to in (0..m).filter(|&t| t != from) {
                let capacity = cap(from, to);
                if capacity > DEFAULT_TOL {
                    arcs.push(ExchangeArc { from, to, capacity });
                }
            }
        }
        Self { kind, ground: ground.clone(), arcs, supply: None }
    }

    pub fn capacity(&self, from: usize, to: usize) -> f64 {
        self.arcs
            .iter()
            .find(|a| a.from == from && a.to == to)
            .map_or(0.0, |a| a.capacity)
    }

    /// Arcs as element-name pairs.
    pub fn arc_names(&self) -> Vec<(String, String)> {
        self.arcs
            .iter()
            .map(|a| (self.ground.name(a.from).to_string(), self.ground.name(a.to).to_string()))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let name = |i: usize| self.ground.name(i).to_string();
        let arcs: Vec<_> = self
            .arcs
            .iter()
            .map(|a| serde_json::json!({"from": name(a.from), "to": name(a.to), "capacity": a.capacity}))
            .collect();
        let mut doc = serde_json::json!({
            "schema_version": crate::SCHEMA_VERSION,
            "kind": self.kind,
            "ground": self.ground.names(),
            "arcs": arcs,
        });
        if let Some(s) = &self.supply {
            let supply: BTreeMap<String, f64> = self.ground.names().iter().cloned().zip(s.iter().copied()).collect();
            doc["supply"] = serde_json::json!(supply);
        }
        doc
    }

    pub fn to_dot(&self) -> String {
        let name = match self.kind {
            GraphKind::Directed => "D_x",
            GraphKind::Bidirectional => "D_xy",
        };
        let mut out = format!("digraph {name} {{\n");
        write_resource_nodes(&mut out, &self.ground, self.supply.as_deref());
        for a in &self.arcs {
            let _ = writeln!(
                out,
                "  {:?} -> {:?} [label=\"{}\"];",
                self.ground.name(a.from),
                self.ground.name(a.to),
                fmt_num(a.capacity)
            );
        }
        out.push_str("}\n");
        out
    }
}

fn write_resource_nodes(out: &mut String, ground: &GroundSet, supply: Option<&[f64]>) {
    for (i, n) in ground.names().iter().enumerate() {
        match supply {
            Some(s) if s[i].abs() > DEFAULT_TOL => {
                let _ = writeln!(out, "  {n:?} [label=\"{n}\\nsupply={}\"];", fmt_num(s[i]));
            }
            _ => {
                let _ = writeln!(out, "  {n:?};");
            }
        }
    }
}

fn fmt_num(v: f64) -> String {
    let r = (v * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

/// `D(x)`.
pub fn build_directed(oracle: &SubmodularOracle, x: &LoadVector) -> Result<ExchangeGraph> {
    let caps = CapacityMatrix::compute(oracle, x)?;
    Ok(ExchangeGraph::from_matrix(GraphKind::Directed, oracle.ground(), |a, b| caps.get(a, b)))
}

/// `D(x, y)` with supplies `x - y`.
pub fn build_bidirectional(oracle: &SubmodularOracle, x: &LoadVector, y: &LoadVector) -> Result<ExchangeGraph> {
    let cx = CapacityMatrix::compute(oracle, x)?;
    let cy = CapacityMatrix::compute(oracle, y)?;
    Ok(bidirectional_from(oracle.ground(), &cx, &cy, x, y))
}

fn bidirectional_from(
    ground: &GroundSet,
    cx: &CapacityMatrix,
    cy: &CapacityMatrix,
    x: &LoadVector,
    y: &LoadVector,
) -> ExchangeGraph {
    let mut g = ExchangeGraph::from_matrix(GraphKind::Bidirectional, ground, |a, b| cx.get(a, b).min(cy.get(b, a)));
    g.supply = Some(supply_of(x, y));
    g
}

fn supply_of(x: &LoadVector, y: &LoadVector) -> Vec<f64> {
    x.values().iter().zip(y.values()).map(|(a, b)| a - b).collect()
}

/// One elementary exchange of the directed-flow procedure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exchange {
    pub from: usize,
    pub to: usize,
    pub amount: f64,
}

/// Arc flows on a resource graph, optionally with the exchange trace that
/// produced them.
#[derive(Clone, Debug)]
pub struct Flow {
    pub ground: GroundSet,
    pub arc_flows: BTreeMap<(usize, usize), f64>,
    pub trace: Vec<Exchange>,
}

impl Flow {
    fn empty(ground: &GroundSet) -> Self {
        Self { ground: ground.clone(), arc_flows: BTreeMap::new(), trace: Vec::new() }
    }

    pub fn on(&self, from: usize, to: usize) -> f64 {
        self.arc_flows.get(&(from, to)).copied().unwrap_or(0.0)
    }

    /// Outflow minus inflow per resource.
    pub fn net_outflow(&self) -> Vec<f64> {
        let mut bal = vec![0.0; self.ground.len()];
        for (&(a, b), &f) in &self.arc_flows {
            bal[a] += f;
            bal[b] -= f;
        }
        bal
    }

    /// Largest deviation of the node balance from `x - y`.
    pub fn balance_error(&self, x: &LoadVector, y: &LoadVector) -> f64 {
        self.net_outflow()
            .iter()
            .zip(supply_of(x, y))
            .map(|(b, s)| (b - s).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let name = |i: usize| self.ground.name(i).to_string();
        let arcs: Vec<_> = self
            .arc_flows
            .iter()
            .map(|(&(a, b), &f)| serde_json::json!({"from": name(a), "to": name(b), "flow": f}))
            .collect();
        let trace: Vec<_> = self
            .trace
            .iter()
            .map(|t| serde_json::json!({"from": name(t.from), "to": name(t.to), "amount": t.amount}))
            .collect();
        serde_json::json!({"schema_version": crate::SCHEMA_VERSION, "arcs": arcs, "trace": trace})
    }
}

/// Flow in `D(x)` meeting supplies `x - y`, built by repeated strong
/// exchanges that move `y` towards `x`.
///
/// The supply element is the smallest index with `x_e > y_e`; its partner is
/// the smallest index `e'` with `x_{e'} < y_{e'}`, `c_x(e, e') > 0` and
/// `c_y(e', e) > 0` at the current `y`. The step size is
/// `min(c_x(e, e'), c_y(e', e), x_e - y_e, y_{e'} - x_{e'})`.
pub fn directed_flow(oracle: &SubmodularOracle, x: &LoadVector, y: &LoadVector) -> Result<Flow> {
    let cx = CapacityMatrix::compute(oracle, x)?;
    CapacityMatrix::compute(oracle, y)?;
    let m = oracle.len();
    let tol = DEFAULT_TOL;
    let mut cur = y.clone();
    let mut flow = Flow::empty(oracle.ground());
    let max_steps = 4 * m * m + 16;
    while let Some(e) = (0..m).find(|&e| x.get(e) - cur.get(e) > tol) {
        loop {
            if flow.trace.len() >= max_steps {
                return Err(Error::NoConvergence {
                    iterations: flow.trace.len(),
                    residual: x.max_abs_diff(&cur),
                });
            }
            let slack = slack_table(oracle, &cur)?;
            let reverse_cap = |ep: usize| {
                let mut c = cur.get(ep);
                for u in Subset::all(m).filter(|u| u.contains(e) && !u.contains(ep)) {
                    c = c.min(slack[u.0 as usize]);
                }
                c.max(0.0)
            };
            let room = |ep: usize| cx.get(e, ep) - flow.on(e, ep);
            let (partner, cy) = (0..m)
                .filter(|&ep| ep != e && cur.get(ep) - x.get(ep) > tol && room(ep) > tol)
                .map(|ep| (ep, reverse_cap(ep)))
                .find(|&(_, c)| c > tol)
                .ok_or_else(|| Error::ExchangeNotFound { element: oracle.ground().name(e).to_string() })?;
            let alpha = room(partner)
                .min(cy)
                .min(x.get(e) - cur.get(e))
                .min(cur.get(partner) - x.get(partner));
            cur = cur.exchanged(partner, e, alpha);
            *flow.arc_flows.entry((e, partner)).or_insert(0.0) += alpha;
            flow.trace.push(Exchange { from: e, to: partner, amount: alpha });
            if x.get(e) - cur.get(e) <= tol {
                break;
            }
        }
    }
    Ok(flow)
}

/// Minimum-cut certificate for a conflicting pair: the resources on the
/// source side of a minimum cut have more net supply than capacity leaving
/// them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutCertificate {
    pub side: Vec<String>,
    pub supply_nodes: Vec<String>,
    pub demand_nodes: Vec<String>,
    pub net_supply: f64,
    pub outgoing_capacity: f64,
    pub shortfall: f64,
}

#[derive(Clone, Debug)]
pub enum BidirectionalOutcome {
    Feasible(Flow),
    Conflicting(CutCertificate),
}

impl BidirectionalOutcome {
    pub fn is_conflicting(&self) -> bool {
        matches!(self, Self::Conflicting(_))
    }
}

struct Transshipment {
    /// Scaled integer flow per arc of the input arc list.
    flows: Vec<i64>,
    shortfall: f64,
    reachable: Vec<bool>,
}

fn scaled(v: f64) -> i64 {
    (v * FLOW_SCALE).round() as i64
}

fn solve_transshipment(m: usize, arcs: &[ExchangeArc], supply: &[f64]) -> Transshipment {
    let (s, t) = (m, m + 1);
    let mut net = FlowNetwork::new(m + 2);
    let ids: Vec<usize> = arcs.iter().map(|a| net.add_edge(a.from, a.to, scaled(a.capacity))).collect();
    let (mut total_supply, mut total_demand) = (0i64, 0i64);
    for (e, &b) in supply.iter().enumerate() {
        let q = scaled(b.abs());
        if b > DEFAULT_TOL {
            net.add_edge(s, e, q);
            total_supply += q;
        } else if b < -DEFAULT_TOL {
            net.add_edge(e, t, q);
            total_demand += q;
        }
    }
    let value = net.max_flow(s, t);
    let shortfall = (total_supply.max(total_demand) - value) as f64 / FLOW_SCALE;
    let mut reachable = net.residual_reachable(s);
    reachable.truncate(m);
    Transshipment { flows: ids.iter().map(|&id| net.flow(id)).collect(), shortfall, reachable }
}

/// Decides whether a bidirectional flow exists between `x` and `y`.
pub fn bidirectional_flow(oracle: &SubmodularOracle, x: &LoadVector, y: &LoadVector) -> Result<BidirectionalOutcome> {
    let g = build_bidirectional(oracle, x, y)?;
    Ok(solve_bidirectional(&g, x, y))
}

fn solve_bidirectional(g: &ExchangeGraph, x: &LoadVector, y: &LoadVector) -> BidirectionalOutcome {
    let supply = supply_of(x, y);
    let m = g.ground.len();
    let sol = solve_transshipment(m, &g.arcs, &supply);
    if sol.shortfall > CONFLICT_THRESHOLD {
        let side: Vec<usize> = (0..m).filter(|&e| sol.reachable[e]).collect();
        let inside = Subset::from_indices(side.iter().copied());
        let names = |f: &dyn Fn(usize) -> bool| -> Vec<String> {
            side.iter().filter(|&&e| f(e)).map(|&e| g.ground.name(e).to_string()).collect()
        };
        let outgoing_capacity = g
            .arcs
            .iter()
            .filter(|a| inside.contains(a.from) && !inside.contains(a.to))
            .map(|a| a.capacity)
            .sum::<f64>()
            + 0.0;
        return BidirectionalOutcome::Conflicting(CutCertificate {
            side: names(&|_| true),
            supply_nodes: names(&|e| supply[e] > DEFAULT_TOL),
            demand_nodes: names(&|e| supply[e] < -DEFAULT_TOL),
            net_supply: side.iter().map(|&e| supply[e]).sum(),
            outgoing_capacity,
            shortfall: sol.shortfall,
        });
    }
    let mut flow = Flow::empty(&g.ground);
    for (a, &f) in g.arcs.iter().zip(&sol.flows) {
        if f > 0 {
            flow.arc_flows.insert((a.from, a.to), f as f64 / FLOW_SCALE);
        }
    }
    BidirectionalOutcome::Feasible(flow)
}

#[derive(Clone, Copy, Debug)]
pub struct ProbeConfig {
    /// Random interior pairs on top of all vertex pairs.
    pub samples: usize,
    pub seed: u64,
    /// All orders are enumerated when `m!` is at most this; otherwise this
    /// many random orders are sampled.
    pub max_orders: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { samples: 200, seed: 42, max_orders: 5040 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Conflict {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub certificate: CutCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub vertices: usize,
    pub vertex_pairs: usize,
    pub interior_pairs: usize,
    pub pairs_tested: usize,
    pub conflicts: Vec<Conflict>,
}

impl ProbeReport {
    pub fn is_clean(&self) -> bool {
        self.conflicts.is_empty()
    }
}

/// Base-polytope vertices reached by greedy over all (or sampled) orders,
/// deduplicated and sorted.
pub fn collect_vertices(oracle: &SubmodularOracle, max_orders: usize, rng: &mut impl Rng) -> Vec<LoadVector> {
    let m = oracle.len();
    let factorial = (1..=m).try_fold(1usize, |acc, k| acc.checked_mul(k));
    let orders: Vec<Vec<usize>> = match factorial {
        Some(f) if f <= max_orders => all_orders(m),
        _ => (0..max_orders)
            .map(|_| {
                let mut p: Vec<usize> = (0..m).collect();
                p.shuffle(rng);
                p
            })
            .collect(),
    };
    let mut seen: HashMap<Vec<u64>, LoadVector> = HashMap::new();
    for order in &orders {
        let v = greedy_vertex(oracle, order);
        let key = v.values().iter().map(|f| (f + 0.0).to_bits()).collect();
        seen.entry(key).or_insert(v);
    }
    let mut out: Vec<LoadVector> = seen.into_values().collect();
    out.sort_by(|a, b| {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

fn all_orders(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..m).collect();
    permute(&mut perm, 0, &mut out);
    out
}

fn permute(p: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == p.len() {
        out.push(p.clone());
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, out);
        p.swap(k, i);
    }
}

/// Random convex combination of 1 to 4 vertices with flat Dirichlet weights.
pub fn random_interior_point(vertices: &[LoadVector], rng: &mut impl Rng) -> LoadVector {
    let k = rng.random_range(1..=4.min(vertices.len()));
    let picks: Vec<&LoadVector> = vertices.choose_multiple(rng, k).collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + 1e-12).collect();
    let total: f64 = raw.iter().sum();
    let mut values = vec![0.0; vertices[0].len()];
    for (v, w) in picks.iter().zip(&raw) {
        for (acc, val) in values.iter_mut().zip(v.values()) {
            *acc += w / total * val;
        }
    }
    LoadVector::new(vertices[0].ground(), values).expect("same ground")
}

/// Searches for conflicting pairs among all vertex pairs and `samples` random
/// interior pairs. A clean report is evidence, not proof.
pub fn probe_bidirectional_property(oracle: &SubmodularOracle, config: &ProbeConfig) -> Result<ProbeReport> {
    oracle.table()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vertices = collect_vertices(oracle, config.max_orders, &mut rng);
    let caps: Vec<CapacityMatrix> =
        vertices.par_iter().map(|v| CapacityMatrix::compute(oracle, v)).collect::<Result<_>>()?;

    let vertex_pairs: Vec<(usize, usize)> =
        (0..vertices.len()).flat_map(|i| (i + 1..vertices.len()).map(move |j| (i, j))).collect();
    let interior: Vec<(LoadVector, LoadVector)> = (0..config.samples)
        .map(|_| (random_interior_point(&vertices, &mut rng), random_interior_point(&vertices, &mut rng)))
        .collect();

    let ground = oracle.ground();
    let conflict = |x: &LoadVector, y: &LoadVector, g: ExchangeGraph| match solve_bidirectional(&g, x, y) {
        BidirectionalOutcome::Conflicting(certificate) => {
            Some(Conflict { x: x.values().to_vec(), y: y.values().to_vec(), certificate })
        }
        BidirectionalOutcome::Feasible(_) => None,
    };
    let mut conflicts: Vec<Conflict> = vertex_pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let g = bidirectional_from(ground, &caps[i], &caps[j], &vertices[i], &vertices[j]);
            conflict(&vertices[i], &vertices[j], g)
        })
        .collect();
    let interior_conflicts: Vec<Conflict> = interior
        .par_iter()
        .map(|(x, y)| {
            let g = build_bidirectional(oracle, x, y)?;
            Ok(conflict(x, y, g))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    conflicts.extend(interior_conflicts);
    Ok(ProbeReport {
        vertices: vertices.len(),
        vertex_pairs: vertex_pairs.len(),
        interior_pairs: interior.len(),
        pairs_tested: vertex_pairs.len() + interior.len(),
        conflicts,
    })
}

/// An `s_i -> t_i` path of the diagnostic flow decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticPath {
    /// Resources visited between the super-source and the super-sink.
    pub resources: Vec<usize>,
    pub amount: f64,
}

/// `D(x_i, y_i)` plus a super-source feeding `E^{i,+}` and a super-sink
/// draining `E^{i,-}`, with the bidirectional flow installed and decomposed.
#[derive(Clone, Debug)]
pub struct DiagnosticGraph {
    pub inner: ExchangeGraph,
    /// `(e, x_e - y_e)` for `e` in `E^{i,+}`.
    pub source_arcs: Vec<(usize, f64)>,
    /// `(e, y_e - x_e)` for `e` in `E^{i,-}`.
    pub sink_arcs: Vec<(usize, f64)>,
    pub flow: Flow,
    pub paths: Vec<DiagnosticPath>,
}

impl DiagnosticGraph {
    pub fn overloaded(&self) -> Subset {
        Subset::from_indices(self.source_arcs.iter().map(|a| a.0))
    }

    pub fn underloaded(&self) -> Subset {
        Subset::from_indices(self.sink_arcs.iter().map(|a| a.0))
    }

    pub fn to_dot(&self) -> String {
        let g = &self.inner.ground;
        let mut out = String::from("digraph G_xy {\n  \"s\" [shape=doublecircle];\n  \"t\" [shape=doublecircle];\n");
        write_resource_nodes(&mut out, g, self.inner.supply.as_deref());
        for &(e, c) in &self.source_arcs {
            let _ = writeln!(out, "  \"s\" -> {:?} [label=\"{}\"];", g.name(e), fmt_num(c));
        }
        for a in &self.inner.arcs {
            let f = self.flow.on(a.from, a.to);
            let _ = writeln!(
                out,
                "  {:?} -> {:?} [label=\"{}/{}\"];",
                g.name(a.from),
                g.name(a.to),
                fmt_num(f),
                fmt_num(a.capacity)
            );
        }
        for &(e, c) in &self.sink_arcs {
            let _ = writeln!(out, "  {:?} -> \"t\" [label=\"{}\"];", g.name(e), fmt_num(c));
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the diagnostic graph of one player and decomposes the installed
/// flow into source-to-sink paths.
pub fn build_diagnostic(oracle: &SubmodularOracle, x: &LoadVector, y: &LoadVector) -> Result<DiagnosticGraph> {
    let inner = build_bidirectional(oracle, x, y)?;
    let supply = supply_of(x, y);
    let m = inner.ground.len();
    let sol = solve_transshipment(m, &inner.arcs, &supply);
    if sol.shortfall > CONFLICT_THRESHOLD {
        return Err(Error::ConflictingStrategies);
    }
    let source_arcs: Vec<(usize, f64)> =
        (0..m).filter(|&e| supply[e] > DEFAULT_TOL).map(|e| (e, supply[e])).collect();
    let sink_arcs: Vec<(usize, f64)> =
        (0..m).filter(|&e| supply[e] < -DEFAULT_TOL).map(|e| (e, -supply[e])).collect();

    // integer flow f' on nodes 0..m, s = m, t = m + 1
    let (s, t) = (m, m + 1);
    let mut residual: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for (a, &f) in inner.arcs.iter().zip(&sol.flows) {
        if f > 0 {
            residual.insert((a.from, a.to), f);
        }
    }
    // node balances of the integer inner flow decide the terminal arcs so
    // that decomposition is exact despite rounding of the supplies
    let mut balance = vec![0i64; m];
    for (&(a, b), &f) in &residual {
        balance[a] += f;
        balance[b] -= f;
    }
    for (e, &b) in balance.iter().enumerate() {
        if b > 0 {
            residual.insert((s, e), b);
        } else if b < 0 {
            residual.insert((e, t), -b);
        }
    }
    let mut flow = Flow::empty(&inner.ground);
    for (&(a, b), &f) in &residual {
        if a < m && b < m {
            flow.arc_flows.insert((a, b), f as f64 / FLOW_SCALE);
        }
    }
    let paths = decompose(&mut residual, s, t)
        .into_iter()
        .map(|(nodes, amount)| DiagnosticPath { resources: nodes, amount: amount as f64 / FLOW_SCALE })
        .collect();
    Ok(DiagnosticGraph { inner, source_arcs, sink_arcs, flow, paths })
}

/// Path decomposition of an integer flow; cycles met on the way are cancelled.
fn decompose(flow: &mut BTreeMap<(usize, usize), i64>, s: usize, t: usize) -> Vec<(Vec<usize>, i64)> {
    let next = |flow: &BTreeMap<(usize, usize), i64>, u: usize| {
        flow.range((u, 0)..=(u, usize::MAX)).find(|(_, &f)| f > 0).map(|(&(_, v), _)| v)
    };
    let mut paths = Vec::new();
    while next(flow, s).is_some() {
        let mut walk = vec![s];
        let mut pos: HashMap<usize, usize> = HashMap::from([(s, 0)]);
        while let Some(&u) = walk.last() {
            if u == t {
                break;
            }
            let v = next(flow, u).expect("flow conservation");
            if let Some(&k) = pos.get(&v) {
                // cancel the cycle walk[k..] -> v
                let cycle: Vec<(usize, usize)> =
                    walk[k..].windows(2).map(|w| (w[0], w[1])).chain([(u, v)]).collect();
                let amount = cycle.iter().map(|e| flow[e]).min().unwrap();
                for e in &cycle {
                    *flow.get_mut(e).unwrap() -= amount;
                }
                for w in walk.drain(k + 1..) {
                    pos.remove(&w);
                }
                continue;
            }
            pos.insert(v, walk.len());
            walk.push(v);
        }
        let edges: Vec<(usize, usize)> = walk.windows(2).map(|w| (w[0], w[1])).collect();
        let amount = edges.iter().map(|e| flow[e]).min().unwrap();
        for e in &edges {
            *flow.get_mut(e).unwrap() -= amount;
        }
        paths.push((walk[1..walk.len() - 1].to_vec(), amount));
    }
    paths
}
