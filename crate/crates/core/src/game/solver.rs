use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Game, StrategyProfile, StrategySpace};
use crate::error::{Error, Result};
use crate::ground::LoadVector;
use crate::polymatroid::{greedy_vertex, minimize_linear, CapacityMatrix};

/// Loads are kept this far below a queue's service rate.
pub const QUEUE_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Step `lambda` of the damped dynamics; a lone player always uses 1.
    pub damping: f64,
    /// Optimality gap at which a best response is accepted: the Frank-Wolfe
    /// gap for polymatroid players, the pairwise gap for set-system players.
    pub gap_tol: f64,
    /// Largest per-player movement in a sweep that counts as converged.
    pub move_tol: f64,
    /// Frank-Wolfe iterations per best response.
    pub max_iters: usize,
    /// Round-robin sweeps of the dynamics.
    pub max_sweeps: usize,
    /// Tolerance of the final equilibrium check.
    pub verify_tol: f64,
    /// L-infinity distance above which two equilibria count as distinct.
    pub tol_distinct: f64,
    /// Width at which the line-search bisection stops.
    pub line_search_tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            damping: 0.5,
            gap_tol: 1e-9,
            move_tol: 1e-8,
            max_iters: 100_000,
            max_sweeps: 20_000,
            verify_tol: 1e-6,
            tol_distinct: 1e-4,
            line_search_tol: 1e-12,
        }
    }
}

fn overload(game: &Game, e: usize, load: f64, mu: f64) -> Error {
    Error::QueueOverload { element: game.ground.name(e).to_string(), load, mu }
}

fn check_domain(game: &Game, i: usize, agg: &[f64]) -> Result<()> {
    for (e, c) in game.players[i].costs.iter().enumerate() {
        if agg[e] >= c.capacity() {
            return Err(overload(game, e, agg[e], c.capacity()));
        }
    }
    Ok(())
}

/// `pi_i = sum_e c_{i,e}(x_e) x_{i,e}`.
pub fn total_cost(game: &Game, profile: &StrategyProfile, i: usize) -> Result<f64> {
    let agg = profile.aggregate();
    check_domain(game, i, &agg)?;
    let x = &profile.loads[i];
    Ok(game.players[i].costs.iter().enumerate().map(|(e, c)| c.value(agg[e]) * x.get(e)).sum())
}

/// `mu_{i,e} = c_{i,e}(x_e) + x_{i,e} c'_{i,e}(x_e)`.
pub fn marginal_cost(game: &Game, profile: &StrategyProfile, i: usize, e: usize) -> Result<f64> {
    let agg = profile.aggregate();
    let c = &game.players[i].costs[e];
    if agg[e] >= c.capacity() {
        return Err(overload(game, e, agg[e], c.capacity()));
    }
    Ok(c.value(agg[e]) + profile.loads[i].get(e) * c.derivative(agg[e]))
}

fn marginals(game: &Game, profile: &StrategyProfile, i: usize) -> Result<Vec<f64>> {
    let agg = profile.aggregate();
    check_domain(game, i, &agg)?;
    let x = &profile.loads[i];
    Ok(game.players[i]
        .costs
        .iter()
        .enumerate()
        .map(|(e, c)| c.value(agg[e]) + x.get(e) * c.derivative(agg[e]))
        .collect())
}

/// Result of one best-response computation.
#[derive(Clone, Debug)]
pub struct BestResponse {
    pub load: LoadVector,
    pub distribution: Option<Vec<f64>>,
    /// Optimality gap at the returned point (see [`SolverParams::gap_tol`]).
    pub gap: f64,
    pub iterations: usize,
}

/// Objective `sum_e c_e(o_e + z_e) z_e` of one player against fixed opponents.
struct Objective<'a> {
    game: &'a Game,
    i: usize,
    others: Vec<f64>,
}

impl Objective<'_> {
    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        let costs = &self.game.players[self.i].costs;
        z.iter()
            .enumerate()
            .map(|(e, &ze)| {
                let c = &costs[e];
                let load = self.others[e] + ze;
                if load >= c.capacity() {
                    return Err(overload(self.game, e, load, c.capacity()));
                }
                Ok(c.value(load) + ze * c.derivative(load))
            })
            .collect()
    }

    /// Largest step along `dir` keeping every queue below its margin.
    fn domain_step(&self, z: &[f64], dir: &[f64]) -> f64 {
        let costs = &self.game.players[self.i].costs;
        let mut cap = f64::INFINITY;
        for e in 0..z.len() {
            let mu = costs[e].capacity();
            if dir[e] > 0.0 && mu.is_finite() {
                cap = cap.min(((mu - QUEUE_MARGIN - self.others[e] - z[e]) / dir[e]).max(0.0));
            }
        }
        cap
    }

    /// Exact line search on `[0, hi]` by bisection on the derivative.
    fn line_search(&self, z: &[f64], dir: &[f64], hi: f64, tol: f64) -> Result<f64> {
        let slope = |t: f64| -> Result<f64> {
            let p: Vec<f64> = z.iter().zip(dir).map(|(a, d)| a + t * d).collect();
            Ok(self.gradient(&p)?.iter().zip(dir).map(|(g, d)| g * d).sum())
        };
        if slope(hi)? <= 0.0 {
            return Ok(hi);
        }
        let (mut lo, mut up) = (0.0, hi);
        while up - lo > tol * hi.max(1.0) {
            let mid = 0.5 * (lo + up);
            if slope(mid)? > 0.0 {
                up = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + up))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-element marginal `c(o + z) + z c'(o + z)` and the largest admissible `z`.
impl Objective<'_> {
    fn element_marginal(&self, e: usize, z: f64) -> f64 {
        let c = &self.game.players[self.i].costs[e];
        let load = self.others[e] + z;
        c.value(load) + z * c.derivative(load)
    }

    fn element_bound(&self, e: usize, total: f64) -> f64 {
        let mu = self.game.players[self.i].costs[e].capacity();
        if mu.is_finite() {
            (mu - QUEUE_MARGIN - self.others[e]).clamp(0.0, total)
        } else {
            total
        }
    }

    /// `z_e(lambda)`: the point where the marginal of `e` crosses `lambda`.
    fn level_point(&self, e: usize, lambda: f64, bound: f64) -> f64 {
        if self.element_marginal(e, 0.0) >= lambda {
            return 0.0;
        }
        if self.element_marginal(e, bound) <= lambda {
            return bound;
        }
        let (mut lo, mut hi) = (0.0, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.element_marginal(e, mid) < lambda {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Minimiser of the objective over `{ z >= 0 on elems, sum z = total }`.
    fn relaxed(&self, elems: &[usize], total: f64) -> Result<Vec<f64>> {
        let bounds: Vec<f64> = elems.iter().map(|&e| self.element_bound(e, total)).collect();
        if total <= 0.0 {
            return Ok(vec![0.0; elems.len()]);
        }
        if bounds.iter().sum::<f64>() < total {
            let &e = elems
                .iter()
                .zip(&bounds)
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(e, _)| e)
                .expect("nonempty element set");
            let c = &self.game.players[self.i].costs[e];
            return Err(overload(self.game, e, self.others[e] + total, c.capacity()));
        }
        let at = |lambda: f64| -> Vec<f64> {
            elems.iter().zip(&bounds).map(|(&e, &b)| self.level_point(e, lambda, b)).collect()
        };
        let mut lo = elems.iter().map(|&e| self.element_marginal(e, 0.0)).fold(f64::INFINITY, f64::min);
        let mut hi = elems
            .iter()
            .zip(&bounds)
            .map(|(&e, &b)| self.element_marginal(e, b))
            .fold(f64::NEG_INFINITY, f64::max);
        if !hi.is_finite() {
            // a queue sits exactly at its margin; back off until finite
            hi = lo.abs().max(1.0);
            while at(hi).iter().sum::<f64>() < total {
                hi *= 2.0;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if at(mid).iter().sum::<f64>() < total {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // interpolate between the two brackets so the sum is exact
        let (zl, zh) = (at(lo), at(hi));
        let (sl, sh): (f64, f64) = (zl.iter().sum(), zh.iter().sum());
        let t = if sh > sl { ((total - sl) / (sh - sl)).clamp(0.0, 1.0) } else { 1.0 };
        Ok(zl.iter().zip(&zh).map(|(a, b)| a + t * (b - a)).collect())
    }

    /// Decomposition algorithm on the minor `rho(C + .) - rho(C)` over `rest`.
    fn decompose(&self, rho: &[f64], base: usize, rest: usize, z: &mut [f64]) -> Result<()> {
        let elems: Vec<usize> = (0..z.len()).filter(|e| rest >> e & 1 == 1).collect();
        let total = rho[base | rest] - rho[base];
        let local = self.relaxed(&elems, total)?;
        for (&e, &v) in elems.iter().zip(&local) {
            z[e] = v;
        }
        let eps = 1e-11 * total.abs().max(1.0);
        let (mut best, mut best_val) = (0usize, -eps);
        let mut a = rest;
        while a != 0 {
            let load: f64 = elems.iter().filter(|&&e| a >> e & 1 == 1).map(|&e| z[e]).sum();
            let val = rho[base | a] - rho[base] - load;
            if val < best_val {
                best = a;
                best_val = val;
            }
            a = (a - 1) & rest;
        }
        if best == 0 || best == rest {
            return Ok(());
        }
        self.decompose(rho, base, best, z)?;
        self.decompose(rho, base | best, rest & !best, z)
    }
}

/// Best response of player `i` against the other players' loads.
///
/// Polymatroid players are solved by the decomposition algorithm for
/// separable convex minimisation over a base polytope. Set-system players use
/// pairwise (away-step) Frank-Wolfe with exact line search, warm-started at
/// the current distribution.
pub fn best_response(game: &Game, profile: &StrategyProfile, i: usize, params: &SolverParams) -> Result<BestResponse> {
    let player = &game.players[i];
    let m = game.ground.len();
    let agg = profile.aggregate();
    let current = &profile.loads[i];
    let others: Vec<f64> = (0..m).map(|e| (agg[e] - current.get(e)).max(0.0)).collect();
    if player.total_load() <= 0.0 {
        let distribution = profile.distributions[i].clone();
        return Ok(BestResponse { load: current.clone(), distribution, gap: 0.0, iterations: 0 });
    }
    let obj = Objective { game, i, others };
    let sets = match &player.space {
        StrategySpace::Polymatroid { oracle, .. } => {
            let rho = oracle.table()?;
            let mut z = vec![0.0; m];
            obj.decompose(rho, 0, (1usize << m) - 1, &mut z)?;
            let g = obj.gradient(&z)?;
            let gap = (dot(&g, &z) - dot(&g, minimize_linear(oracle, &g).values())).max(0.0);
            return Ok(BestResponse { load: LoadVector::new(&game.ground, z)?, distribution: None, gap, iterations: 1 });
        }
        StrategySpace::SetSystem { sets } => sets,
    };

    // atoms with convex weights; the point is sum_a w_a * atom_a
    let d = player.demand;
    let atoms: Vec<Vec<f64>> =
        sets.iter().map(|s| (0..m).map(|e| if s.contains(e) { d } else { 0.0 }).collect()).collect();
    let mut weights: Vec<f64> = match &profile.distributions[i] {
        Some(w) => w.iter().map(|v| v.max(0.0) / d).collect(),
        None => {
            let mut w = vec![0.0; sets.len()];
            w[0] = 1.0;
            w
        }
    };
    let norm: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= norm);

    let point = |weights: &[f64]| {
        let mut z = vec![0.0; m];
        for (a, &w) in atoms.iter().zip(weights).filter(|(_, w)| **w > 0.0) {
            for (zi, ai) in z.iter_mut().zip(a) {
                *zi += w * ai;
            }
        }
        z
    };
    let finish = |z: Vec<f64>, weights: &[f64], gap: f64, iterations: usize| {
        let distribution = Some(weights.iter().map(|w| w * d).collect());
        Ok(BestResponse { load: LoadVector::new(&game.ground, z)?, distribution, gap, iterations })
    };

    let mut z = point(&weights);
    for it in 0..params.max_iters {
        let g = obj.gradient(&z)?;
        let s = (0..atoms.len())
            .min_by(|&a, &b| dot(&g, &atoms[a]).total_cmp(&dot(&g, &atoms[b])).then(a.cmp(&b)))
            .expect("nonempty set system");
        let v = (0..atoms.len())
            .filter(|&a| weights[a] > 0.0)
            .max_by(|&a, &b| dot(&g, &atoms[a]).total_cmp(&dot(&g, &atoms[b])).then(b.cmp(&a)))
            .expect("some atom carries weight");
        // unweighted, so tiny leftover weights on costly sets are removed too
        let pair_gap = dot(&g, &atoms[v]) - dot(&g, &atoms[s]);
        if pair_gap <= params.gap_tol {
            return finish(z, &weights, pair_gap.max(0.0), it);
        }
        let dir: Vec<f64> = atoms[s].iter().zip(&atoms[v]).map(|(a, b)| a - b).collect();
        let hi = weights[v].min(obj.domain_step(&z, &dir));
        let step = obj.line_search(&z, &dir, hi, params.line_search_tol)?;
        if step <= 0.0 {
            // the queue clamp blocks progress along the best direction
            return finish(z, &weights, pair_gap, it);
        }
        weights[s] += step;
        weights[v] -= step;
        if weights[v] < 1e-15 {
            weights[s] += weights[v];
            weights[v] = 0.0;
        }
        z = point(&weights);
    }
    let g = obj.gradient(&z)?;
    let residual = dot(&g, &z) - g.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Err(Error::NoConvergence { iterations: params.max_iters, residual })
}

/// Player-wise verdict of the first-order equilibrium conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub is_equilibrium: bool,
    pub worst_violation: f64,
    pub tol: f64,
    pub residuals: BTreeMap<String, f64>,
    pub aggregate: BTreeMap<String, f64>,
    pub loads: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Checks the marginal-cost conditions: no positive exchange (polymatroid
/// players) or alternative set (set-system players) lowers the marginal cost
/// of a used resource or set by more than `tol`.
pub fn is_equilibrium(game: &Game, profile: &StrategyProfile, tol: f64) -> Result<EquilibriumReport> {
    game.check_profile(profile, tol.max(1e-9))?;
    let mut residuals = BTreeMap::new();
    let mut worst = 0.0f64;
    for (i, p) in game.players.iter().enumerate() {
        let mu = marginals(game, profile, i)?;
        let x = &profile.loads[i];
        let r = match &p.space {
            StrategySpace::SetSystem { sets } => {
                let w = profile.distributions[i].as_ref().expect("checked above");
                let path: Vec<f64> = sets.iter().map(|s| s.iter().map(|e| mu[e]).sum()).collect();
                let cheapest = path.iter().copied().fold(f64::INFINITY, f64::min);
                (0..sets.len()).filter(|&k| w[k] > tol).map(|k| path[k] - cheapest).fold(0.0, f64::max)
            }
            StrategySpace::Polymatroid { oracle, .. } => {
                let caps = CapacityMatrix::compute(oracle, x)?;
                let m = x.len();
                let mut r = 0.0f64;
                for e in (0..m).filter(|&e| x.get(e) > tol) {
                    for f in (0..m).filter(|&f| f != e && caps.get(e, f) > tol) {
                        r = r.max(mu[e] - mu[f]);
                    }
                }
                r
            }
        };
        worst = worst.max(r);
        residuals.insert(p.id.clone(), r);
    }
    let names = game.ground.names();
    let aggregate = names.iter().cloned().zip(profile.aggregate()).collect();
    let loads = game
        .players
        .iter()
        .zip(&profile.loads)
        .map(|(p, x)| (p.id.clone(), x.named().into_iter().collect()))
        .collect();
    Ok(EquilibriumReport { is_equilibrium: worst <= tol, worst_violation: worst, tol, residuals, aggregate, loads })
}

/// Damped round-robin best-response dynamics from `start`.
pub fn find_equilibrium(game: &Game, start: &StrategyProfile, params: &SolverParams) -> Result<StrategyProfile> {
    game.check_profile(start, params.verify_tol)?;
    let lambda = if game.players.len() == 1 { 1.0 } else { params.damping };
    let mut profile = start.clone();
    let mut movement = f64::INFINITY;
    for _ in 0..params.max_sweeps {
        movement = 0.0;
        for i in 0..game.players.len() {
            let br = best_response(game, &profile, i, params)?;
            let next = profile.loads[i].lerp(&br.load, lambda);
            movement = movement.max(next.max_abs_diff(&profile.loads[i]));
            profile.loads[i] = next;
            if let (Some(old), Some(new)) = (&mut profile.distributions[i], &br.distribution) {
                for (a, b) in old.iter_mut().zip(new) {
                    *a = (1.0 - lambda) * *a + lambda * b;
                }
            }
        }
        if movement <= params.move_tol {
            let report = is_equilibrium(game, &profile, params.verify_tol)?;
            if report.is_equilibrium {
                return Ok(profile);
            }
            return Err(Error::NoConvergence { iterations: params.max_sweeps, residual: report.worst_violation });
        }
    }
    Err(Error::NoConvergence { iterations: params.max_sweeps, residual: movement })
}

#[derive(Clone, Debug)]
pub struct MultiplicityReport {
    /// Distinct equilibria in order of first discovery.
    pub equilibria: Vec<StrategyProfile>,
    /// Index into `equilibria` per start, `None` when the start failed.
    pub start_class: Vec<Option<usize>>,
    /// `(start index, error)` for starts that did not converge.
    pub failures: Vec<(usize, String)>,
    /// Number of equilibria that are distinct in aggregate loads.
    pub distinct_aggregates: usize,
}

/// Runs [`find_equilibrium`] from every start in parallel and groups the
/// results by load-matrix distance.
pub fn probe_multiplicity(game: &Game, starts: &[StrategyProfile], params: &SolverParams) -> MultiplicityReport {
    let results: Vec<Result<StrategyProfile>> = starts.par_iter().map(|s| find_equilibrium(game, s, params)).collect();
    let mut equilibria: Vec<StrategyProfile> = Vec::new();
    let mut start_class = Vec::with_capacity(starts.len());
    let mut failures = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) => {
                let class = match equilibria.iter().position(|q| q.distance(&p) <= params.tol_distinct) {
                    Some(c) => c,
                    None => {
                        equilibria.push(p);
                        equilibria.len() - 1
                    }
                };
                start_class.push(Some(class));
            }
            Err(e) => {
                start_class.push(None);
                failures.push((k, e.to_string()));
            }
        }
    }
    let mut reps: Vec<&StrategyProfile> = Vec::new();
    for p in &equilibria {
        if reps.iter().all(|q| q.aggregate_distance(p) > params.tol_distinct) {
            reps.push(p);
        }
    }
    let distinct_aggregates = reps.len();
    MultiplicityReport { equilibria, start_class, failures, distinct_aggregates }
}

fn dirichlet(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + 1e-12).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Random feasible profile: flat-Dirichlet weights over the sets of each
/// set-system player, and a Dirichlet mix of up to 4 random greedy vertices
/// for each polymatroid player. Resampled while some queue is overloaded.
pub fn random_profile(game: &Game, rng: &mut impl Rng) -> Result<StrategyProfile> {
    const ATTEMPTS: usize = 1000;
    let m = game.ground.len();
    for _ in 0..ATTEMPTS {
        let mut loads = Vec::with_capacity(game.players.len());
        let mut dists = Vec::with_capacity(game.players.len());
        for (i, p) in game.players.iter().enumerate() {
            match &p.space {
                StrategySpace::SetSystem { sets } => {
                    let w: Vec<f64> = dirichlet(sets.len(), rng).into_iter().map(|v| v * p.demand).collect();
                    loads.push(game.induced_load(i, &w)?);
                    dists.push(Some(w));
                }
                StrategySpace::Polymatroid { oracle, .. } => {
                    let k = rng.random_range(1..=4);
                    let mut x = vec![0.0; m];
                    for w in dirichlet(k, rng) {
                        let mut order: Vec<usize> = (0..m).collect();
                        order.shuffle(rng);
                        for (a, b) in x.iter_mut().zip(greedy_vertex(oracle, &order).values()) {
                            *a += w * b;
                        }
                    }
                    loads.push(LoadVector::new(&game.ground, x)?);
                    dists.push(None);
                }
            }
        }
        let profile = StrategyProfile { loads, distributions: dists };
        let agg = profile.aggregate();
        let stable = game
            .players
            .iter()
            .all(|p| p.costs.iter().zip(&agg).all(|(c, &x)| x < c.capacity() - QUEUE_MARGIN));
        if stable {
            return Ok(profile);
        }
    }
    Err(Error::InfeasibleProfile(format!("no stable random profile in {ATTEMPTS} attempts")))
}

/// `n` random starts from a seeded generator.
pub fn random_starts(game: &Game, n: usize, seed: u64) -> Result<Vec<StrategyProfile>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_profile(game, &mut rng)).collect()
}
