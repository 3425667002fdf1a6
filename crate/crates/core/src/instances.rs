//! Concrete games and counterexamples.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::game::{CostFunction, Game, Player, StrategyProfile, StrategySpace};
use crate::ground::{GroundSet, LoadVector, Subset};
use crate::matroid::{is_base_family, Matroid, MultiGraph};
use crate::polymatroid::SubmodularOracle;

/// Large constant cost used to keep players off a resource.
pub const BIG_M: f64 = 100.0;

/// Ground-size limit for brute-force set-system checks.
pub const SET_SYSTEM_GROUND_LIMIT: usize = 10;

/// Index of the direct route in every builder below.
pub const DIRECT: usize = 0;
/// Index of the indirect route.
pub const INDIRECT: usize = 1;

fn cube() -> CostFunction {
    CostFunction::monomial(1.0, 3)
}

/// Three players on the resources `e`, `f`, `g` of a triangle. Player `i`
/// has a direct route (its own resource) and an indirect route (the other
/// two); it pays `x^3` on its own resource and `x + 1` elsewhere.
pub fn triangle_game() -> Game {
    let ground = GroundSet::new(["e", "f", "g"]).expect("valid names");
    let players = (0..3)
        .map(|i| {
            let direct = Subset::singleton(i);
            Player {
                id: (i + 1).to_string(),
                demand: 1.0,
                space: StrategySpace::SetSystem { sets: vec![direct, Subset::full(3).difference(direct)] },
                costs: (0..3).map(|e| if e == i { cube() } else { CostFunction::linear_plus_one() }).collect(),
            }
        })
        .collect();
    Game::new(ground, players).expect("triangle game is well formed")
}

/// Every set-system player on the same route index.
pub fn uniform_route_profile(game: &Game, route: usize) -> Result<StrategyProfile> {
    game.pure_profile(&vec![route; game.players.len()])
}

/// Three players on a `k`-cycle with edges `c1 .. ck`, `c_i = (v_i, v_{i+1})`.
/// Player 1 routes `v1 -> v2`, player 2 `v2 -> v3`, player 3 `v3 -> v1`, each
/// either clockwise (route 0) or counterclockwise (route 1). Off-cycle edges
/// are not modelled; `big_m` is only validated.
pub fn cycle_game(k: usize, big_m: f64) -> Result<Game> {
    if k < 3 || !(big_m >= BIG_M) {
        return Err(Error::InvalidK { k, big_m });
    }
    let names: Vec<String> = (1..=k).map(|i| format!("c{i}")).collect();
    let ground = GroundSet::new(names.iter().cloned())?;
    let edge = |i: usize| ground.index_of(&names[i - 1]).expect("cycle edge");
    let arc = |from: usize, to: usize| Subset::from_indices((from..=to).map(edge));
    let (c1, c2) = (Subset::singleton(edge(1)), Subset::singleton(edge(2)));
    let rest = arc(3, k);
    let routes = [[c1, c2.union(rest)], [c2, rest.union(c1)], [rest, c1.union(c2)]];
    let scale = 1.0 / (k - 2) as f64;
    let players = routes
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let costs = (0..k)
                .map(|e| {
                    if e == edge(1) {
                        if i == 0 { cube() } else { CostFunction::linear_plus_one() }
                    } else if e == edge(2) {
                        if i == 1 { cube() } else { CostFunction::linear_plus_one() }
                    } else if i == 2 {
                        CostFunction::monomial(scale, 3)
                    } else {
                        CostFunction::AffineScaled { c: scale, b: 1.0 }
                    }
                })
                .collect();
            Player {
                id: (i + 1).to_string(),
                demand: 1.0,
                space: StrategySpace::SetSystem { sets: r.to_vec() },
                costs,
            }
        })
        .collect();
    Game::new(ground, players)
}

/// Parallel M/M/1 queues `q1 .. qn`; player `i` splits `demands[i]` over the
/// queues in `allowed[i]` (a scaled uniform rank-1 matroid).
///
/// Every group of players must fit: their total demand stays below the total
/// service rate of the queues they can reach together.
pub fn queueing_game(mus: &[f64], demands: &[f64], allowed: &[Vec<usize>]) -> Result<Game> {
    let n = mus.len();
    if demands.len() != allowed.len() {
        return Err(Error::InvalidSpec("one allowed set per demand".into()));
    }
    if allowed.iter().flatten().any(|&q| q >= n) || allowed.iter().any(|a| a.is_empty()) {
        return Err(Error::InvalidSpec("allowed sets must be nonempty lists of queue indices".into()));
    }
    if demands.len() > 16 {
        return Err(Error::InvalidSpec("at most 16 players in a queueing game".into()));
    }
    let reach: Vec<Subset> = allowed.iter().map(|a| Subset::from_indices(a.iter().copied())).collect();
    for group in (1..1u64 << demands.len()).map(Subset) {
        let load: f64 = group.iter().map(|i| demands[i]).sum();
        let queues = group.iter().fold(Subset::EMPTY, |acc, i| acc.union(reach[i]));
        let service: f64 = queues.iter().map(|q| mus[q]).sum();
        if load >= service {
            return Err(Error::Unstable(format!(
                "players {:?} need {load} but their queues serve {service}",
                group.iter().map(|i| i + 1).collect::<Vec<_>>()
            )));
        }
    }
    let ground = GroundSet::new((1..=n).map(|q| format!("q{q}")))?;
    let mut players = Vec::with_capacity(demands.len());
    for (i, (&d, &a)) in demands.iter().zip(&reach).enumerate() {
        let elements = ground.subset_names(a);
        let rank = Matroid::uniform_on(&GroundSet::new(elements.iter().cloned())?, 1)?.rank_oracle();
        let source = json!({"kind": "matroid", "class": "uniform", "elements": elements, "k": 1, "scale": d});
        let costs = (0..n)
            .map(|q| if a.contains(q) { CostFunction::Queue { mu: mus[q] } } else { CostFunction::zero() })
            .collect();
        players.push(Player {
            id: (i + 1).to_string(),
            demand: d,
            space: StrategySpace::Polymatroid { oracle: rank.extend_to(&ground)?.scale(d), source: Some(source) },
            costs,
        });
    }
    Game::new(ground, players)
}

/// `K4` with vertices `v1` (bottom left), `v2` (bottom right), `v3` (top),
/// `v4` (centre) and edges `1 = v1v2`, `2 = v2v3`, `3 = v3v1`, `4 = v1v4`,
/// `5 = v2v4`, `6 = v3v4`.
pub fn k4_graph() -> MultiGraph {
    MultiGraph::new(
        &["v1", "v2", "v3", "v4"],
        &[
            ("1", "v1", "v2"),
            ("2", "v2", "v3"),
            ("3", "v3", "v1"),
            ("4", "v1", "v4"),
            ("5", "v2", "v4"),
            ("6", "v3", "v4"),
        ],
    )
    .expect("K4 is well formed")
}

/// Graphic rank of [`k4_graph`] with the spanning trees `{1,2,6}` and `{3,4,5}`.
pub fn k4_conflict_pair() -> (SubmodularOracle, LoadVector, LoadVector) {
    let oracle = k4_graph().graphic_matroid().expect("small graph").rank_oracle();
    let g = oracle.ground().clone();
    let x = LoadVector::indicator(&g, g.subset(&["1", "2", "6"]).expect("edges"));
    let y = LoadVector::indicator(&g, g.subset(&["3", "4", "5"]).expect("edges"));
    (oracle, x, y)
}

/// A family of subsets of its own ground set (the union of the members).
#[derive(Clone, Debug, PartialEq)]
pub struct SetSystem {
    pub ground: GroundSet,
    pub sets: Vec<Subset>,
}

impl SetSystem {
    pub fn new<S: AsRef<str>>(sets: &[Vec<S>]) -> Result<Self> {
        let mut names: Vec<String> = sets.iter().flatten().map(|s| s.as_ref().to_string()).collect();
        names.sort();
        names.dedup();
        let ground = GroundSet::new(names)?;
        let sets = sets.iter().map(|s| ground.subset(s)).collect::<Result<_>>()?;
        Ok(Self { ground, sets })
    }

    pub fn from_subsets(ground: GroundSet, sets: Vec<Subset>) -> Self {
        Self { ground, sets }
    }

    pub fn is_antichain(&self) -> bool {
        self.sets.iter().enumerate().all(|(i, a)| {
            self.sets.iter().enumerate().all(|(j, b)| i == j || !a.is_subset_of(*b))
        })
    }

    pub fn names(&self) -> Vec<Vec<String>> {
        self.sets.iter().map(|s| self.ground.subset_names(*s)).collect()
    }

    fn check_size(&self) -> Result<()> {
        let used = self.sets.iter().fold(Subset::EMPTY, |acc, s| acc.union(*s)).len();
        if used > SET_SYSTEM_GROUND_LIMIT {
            return Err(Error::GroundTooLarge { size: used, limit: SET_SYSTEM_GROUND_LIMIT });
        }
        Ok(())
    }
}

/// True iff the sets are the bases of a matroid (equicardinal and closed
/// under base exchange), by brute force.
pub fn is_matroid_base_family(system: &SetSystem) -> Result<bool> {
    system.check_size()?;
    if system.sets.is_empty() {
        return Err(Error::InvalidSpec("empty set system".into()));
    }
    Ok(is_base_family(&system.sets))
}

/// `X, Y` in the system and `a, b, c` in their symmetric difference such
/// that every member inside `X ∪ Y` contains `a` or both `b` and `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NonMatroidWitness {
    pub x: Subset,
    pub y: Subset,
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl NonMatroidWitness {
    /// Whichever of `X`, `Y` contains `a`.
    pub fn direct(&self) -> Subset {
        if self.x.contains(self.a) { self.x } else { self.y }
    }

    /// The other one; it contains `b` and `c`.
    pub fn indirect(&self) -> Subset {
        if self.x.contains(self.a) { self.y } else { self.x }
    }

    pub fn to_json(&self, ground: &GroundSet) -> serde_json::Value {
        json!({
            "x": ground.subset_names(self.x),
            "y": ground.subset_names(self.y),
            "a": ground.name(self.a),
            "b": ground.name(self.b),
            "c": ground.name(self.c),
        })
    }
}

fn witness_for(sets: &[Subset], x: Subset, y: Subset) -> Option<NonMatroidWitness> {
    let both = x.union(y);
    let inside: Vec<Subset> = sets.iter().copied().filter(|z| z.is_subset_of(both)).collect();
    let diff: Vec<usize> = x.symmetric_difference(y).iter().collect();
    for &a in &diff {
        for (k, &b) in diff.iter().enumerate() {
            for &c in &diff[k + 1..] {
                if b == a || c == a {
                    continue;
                }
                if inside.iter().all(|z| z.contains(a) || (z.contains(b) && z.contains(c))) {
                    return Some(NonMatroidWitness { x, y, a, b, c });
                }
            }
        }
    }
    None
}

/// First witness in lexicographic order of `(X, Y, a, b, c)`, with `X` and
/// `Y` ranging over the system in input order and `b < c`.
pub fn find_nonmatroid_witness(system: &SetSystem) -> Result<NonMatroidWitness> {
    system.check_size()?;
    let n = system.sets.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .find_map_first(|&(i, j)| witness_for(&system.sets, system.sets[i], system.sets[j]))
        .ok_or(Error::WitnessNotFound)
}

/// Per-player injective maps from the player's own elements into the shared
/// ground set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Embedding {
    pub maps: Vec<BTreeMap<String, String>>,
}

impl Embedding {
    pub fn image(&self, player: usize, system: &SetSystem, s: Subset) -> Vec<String> {
        let mut v: Vec<String> =
            system.ground.subset_names(s).iter().map(|n| self.maps[player][n].clone()).collect();
        v.sort();
        v
    }
}

#[derive(Clone, Debug)]
pub struct EmbeddedCounterexample {
    pub game: Game,
    pub embedding: Embedding,
    /// Witnesses of players 1 to 3.
    pub witnesses: [NonMatroidWitness; 3],
    /// Players 1 to 3 on the images of their `a`-sets.
    pub direct: StrategyProfile,
    /// Players 1 to 3 on the images of their `{b, c}`-sets.
    pub indirect: StrategyProfile,
}

/// Names of the three shared resources.
pub const SHARED: [&str; 3] = ["e", "f", "g"];

/// Embeds three or more non-matroid systems into one game with two
/// equilibria. Players 1 to 3 have demand 1 and share the resources `e`,
/// `f`, `g` in rotation: `e` is the `a` of player 1, the `b` of player 2 and
/// the `c` of player 3, and `f`, `g` follow by shifting one player. Their
/// remaining elements are private. Elements outside a player's `X ∪ Y` cost
/// `x + big_m`, other private elements cost nothing, and `e`, `f`, `g` carry
/// the triangle costs. Later players have demand 0, private elements only
/// and zero costs.
pub fn embed_counterexample(systems: &[SetSystem], big_m: f64) -> Result<EmbeddedCounterexample> {
    if systems.len() < 3 {
        return Err(Error::InvalidSpec("need at least three set systems".into()));
    }
    let mut witnesses = Vec::with_capacity(3);
    for s in systems {
        if is_matroid_base_family(s)? {
            return Err(Error::NotNonMatroid);
        }
    }
    for s in &systems[..3] {
        witnesses.push(find_nonmatroid_witness(s)?);
    }

    let mut maps: Vec<BTreeMap<String, String>> = Vec::with_capacity(systems.len());
    for (i, s) in systems.iter().enumerate() {
        let mut map = BTreeMap::new();
        for (e, name) in s.ground.names().iter().enumerate() {
            let target = match witnesses.get(i) {
                Some(w) if e == w.a => Some(SHARED[i]),
                Some(w) if e == w.b => Some(SHARED[(i + 2) % 3]),
                Some(w) if e == w.c => Some(SHARED[(i + 1) % 3]),
                _ => None,
            };
            let target = target.map_or_else(|| format!("p{}.{name}", i + 1), str::to_string);
            map.insert(name.clone(), target);
        }
        maps.push(map);
    }

    let mut names: Vec<String> = maps.iter().flat_map(|m| m.values().cloned()).collect();
    names.sort();
    names.dedup();
    let ground = GroundSet::new(names)?;
    let mut players = Vec::with_capacity(systems.len());
    for (i, s) in systems.iter().enumerate() {
        let sets = s
            .sets
            .iter()
            .map(|set| ground.subset(&Embedding { maps: maps.clone() }.image(i, s, *set)))
            .collect::<Result<Vec<_>>>()?;
        let mut costs = vec![CostFunction::zero(); ground.len()];
        if let Some(w) = witnesses.get(i) {
            let span = w.x.union(w.y);
            for (e, name) in s.ground.names().iter().enumerate() {
                let t = ground.index_of(&maps[i][name])?;
                if !span.contains(e) {
                    costs[t] = CostFunction::Poly(vec![big_m, 1.0]);
                }
            }
            for (k, shared) in SHARED.iter().enumerate() {
                let t = ground.index_of(shared)?;
                costs[t] = if k == i { cube() } else { CostFunction::linear_plus_one() };
            }
        }
        players.push(Player {
            id: (i + 1).to_string(),
            demand: if i < 3 { 1.0 } else { 0.0 },
            space: StrategySpace::SetSystem { sets },
            costs,
        });
    }
    let game = Game::new(ground, players)?;
    let witnesses: [NonMatroidWitness; 3] = witnesses.try_into().expect("three witnesses");

    let profile = |pick: &dyn Fn(&NonMatroidWitness) -> Subset| -> Result<StrategyProfile> {
        let mut loads = Vec::new();
        let mut dists = Vec::new();
        for (i, s) in systems.iter().enumerate() {
            let mut w = vec![0.0; s.sets.len()];
            if let Some(wit) = witnesses.get(i) {
                let k = s.sets.iter().position(|t| *t == pick(wit)).expect("witness sets belong to the system");
                w[k] = 1.0;
            }
            loads.push(game.induced_load(i, &w)?);
            dists.push(Some(w));
        }
        Ok(StrategyProfile { loads, distributions: dists })
    };
    let direct = profile(&|w| w.direct())?;
    let indirect = profile(&|w| w.indirect())?;
    Ok(EmbeddedCounterexample { game, embedding: Embedding { maps }, witnesses, direct, indirect })
}

/// True iff every simple cycle of `g` has at most two vertices, i.e. the
/// graph is a forest once parallel edges and loops are merged.
pub fn graph_uniqueness_property(g: &MultiGraph) -> bool {
    g.simple_quotient_is_forest()
}

/// Players routing over a graph whose simple quotient is a forest: each
/// player picks a source and sink, its route is the unique vertex path, and
/// it splits its demand over the parallel edges of every hop. Modelled as a
/// product of rank-1 matroids (one unit per hop), scaled by the demand.
pub fn parallel_link_game(
    g: &MultiGraph,
    terminals: &[(String, String)],
    demands: &[f64],
    costs: impl Fn(usize, usize) -> CostFunction,
) -> Result<Game> {
    if !graph_uniqueness_property(g) {
        return Err(Error::InvalidSpec("graph has a cycle through three vertices".into()));
    }
    if terminals.len() != demands.len() {
        return Err(Error::InvalidSpec("one terminal pair per demand".into()));
    }
    let ground = GroundSet::new(g.edges().iter().map(|e| e.id.clone()))?;
    let mut players = Vec::with_capacity(demands.len());
    for (i, ((s, t), &d)) in terminals.iter().zip(demands).enumerate() {
        let hops = g.path_hops(s, t)?;
        let blocks: Vec<Subset> =
            hops.iter().map(|ids| ground.subset(ids)).collect::<Result<_>>()?;
        let oracle = SubmodularOracle::from_fn(&ground, move |u| {
            d * blocks.iter().filter(|b| !b.intersection(u).is_empty()).count() as f64
        });
        players.push(Player {
            id: (i + 1).to_string(),
            demand: d,
            space: StrategySpace::polymatroid(oracle),
            costs: (0..ground.len()).map(|e| costs(i, e)).collect(),
        });
    }
    Game::new(ground, players)
}
