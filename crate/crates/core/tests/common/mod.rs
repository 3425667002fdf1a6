//! Random instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use polygame_core::matroid::LaminarFamily;
use polygame_core::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("x{i}")).collect()
}

pub fn random_subset(rng: &mut ChaCha8Rng, m: usize, p: f64) -> Vec<usize> {
    (0..m).filter(|_| rng.random_bool(p)).collect()
}

pub fn random_uniform(rng: &mut ChaCha8Rng, m: usize) -> Matroid {
    Matroid::uniform_on(&GroundSet::new(names(m)).unwrap(), rng.random_range(1..=m)).unwrap()
}

pub fn random_partition(rng: &mut ChaCha8Rng, m: usize) -> Matroid {
    let n = names(m);
    let k = rng.random_range(1..=m.min(3));
    let mut blocks: Vec<(Vec<String>, usize)> = vec![(Vec::new(), 0); k];
    for e in &n {
        blocks[rng.random_range(0..k)].0.push(e.clone());
    }
    blocks.retain(|b| !b.0.is_empty());
    for b in &mut blocks {
        b.1 = rng.random_range(1..=b.0.len());
    }
    Matroid::partition(&blocks).unwrap()
}

/// Random laminar family on `m` named elements, built by recursive splitting.
pub fn random_laminar_family(rng: &mut ChaCha8Rng, m: usize) -> LaminarFamily {
    fn split(rng: &mut ChaCha8Rng, elems: Vec<String>, depth: usize, out: &mut Vec<(Vec<String>, usize)>) {
        if elems.is_empty() {
            return;
        }
        if depth == 0 || rng.random_bool(0.7) {
            out.push((elems.clone(), rng.random_range(0..=elems.len())));
        }
        if elems.len() == 1 || depth >= 3 {
            return;
        }
        let cut = rng.random_range(1..elems.len());
        let (a, b) = elems.split_at(cut);
        for part in [a, b] {
            if rng.random_bool(0.6) {
                split(rng, part.to_vec(), depth + 1, out);
            }
        }
    }
    let mut elems = names(m);
    elems.shuffle(rng);
    let mut family = Vec::new();
    split(rng, elems.clone(), 0, &mut family);
    LaminarFamily::new(&family, &elems).unwrap()
}

pub fn random_transversal(rng: &mut ChaCha8Rng, m: usize) -> Matroid {
    Matroid::transversal(&random_transversal_sets(rng, m)).unwrap()
}

pub fn random_transversal_sets(rng: &mut ChaCha8Rng, m: usize) -> Vec<Vec<String>> {
    let n = names(m);
    let k = rng.random_range(1..=m.min(4));
    let mut sets: Vec<Vec<String>> = (0..k)
        .map(|_| {
            let mut s: Vec<String> = random_subset(rng, m, 0.4).into_iter().map(|i| n[i].clone()).collect();
            if s.is_empty() {
                s.push(n[rng.random_range(0..m)].clone());
            }
            s
        })
        .collect();
    // every element must occur somewhere so the ground set has size m
    for e in &n {
        if !sets.iter().any(|s| s.contains(e)) {
            let k = rng.random_range(0..sets.len());
            sets[k].push(e.clone());
        }
    }
    sets
}

/// Gammoid on a random acyclic digraph: elements `x*`, helper vertices `h*`,
/// arcs only from lower to higher position in a random order.
pub fn random_gammoid(rng: &mut ChaCha8Rng, m: usize) -> Matroid {
    let extra = rng.random_range(1..=3);
    let mut vertices: Vec<String> = names(m);
    vertices.extend((0..extra).map(|i| format!("h{i}")));
    let mut order = vertices.clone();
    order.shuffle(rng);
    let mut arcs = Vec::new();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if rng.random_bool(0.3) {
                arcs.push((order[i].clone(), order[j].clone()));
            }
        }
    }
    let mut targets: Vec<String> = vertices.iter().filter(|_| rng.random_bool(0.35)).cloned().collect();
    if targets.is_empty() {
        targets.push(order[order.len() - 1].clone());
    }
    let spec = GammoidSpec::new(vertices, arcs, names(m), targets).unwrap();
    Matroid::gammoid(&spec).unwrap()
}

/// Random instance of one of the base-orderable classes, cycling through them.
pub fn random_orderable(rng: &mut ChaCha8Rng, class: usize, m: usize) -> Matroid {
    match class % 5 {
        0 => random_uniform(rng, m),
        1 => random_partition(rng, m),
        2 => Matroid::laminar(&random_laminar_family(rng, m)),
        3 => random_transversal(rng, m),
        _ => random_gammoid(rng, m),
    }
}

/// Nonnegative combination of a matroid rank, a weighted coverage function
/// and a concave function of a modular weight.
pub fn random_submodular(rng: &mut ChaCha8Rng, m: usize) -> SubmodularOracle {
    let ground = GroundSet::new(names(m)).unwrap();
    let class = rng.random_range(0..5);
    let rank = random_orderable(rng, class, m).rank_oracle();
    let items = rng.random_range(1..=6);
    let item_w: Vec<f64> = (0..items).map(|_| rng.random_range(0.1..2.0)).collect();
    let covers: Vec<Subset> =
        (0..m).map(|_| Subset::from_indices(random_subset(rng, items, 0.4))).collect();
    let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.5)).collect();
    let (a, b, c) = (rng.random_range(0.0..2.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
    SubmodularOracle::from_fn(&ground, move |u| {
        let covered = u.iter().fold(Subset::EMPTY, |acc, e| acc.union(covers[e]));
        let cov: f64 = covered.iter().map(|k| item_w[k]).sum();
        let lin: f64 = u.iter().map(|e| w[e]).sum();
        a * rank.value(u) + b * cov + c * lin.sqrt()
    })
}

/// Membership in the base polytope by direct enumeration.
pub fn brute_in_polytope(oracle: &SubmodularOracle, x: &[f64], tol: f64) -> bool {
    let m = oracle.len();
    x.iter().all(|&v| v >= -tol)
        && Subset::all(m).all(|u| u.iter().map(|e| x[e]).sum::<f64>() <= oracle.value(u) + tol)
        && (x.iter().sum::<f64>() - oracle.total()).abs() <= tol
}

pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Greedy vertex computed directly from the prefix definition.
pub fn brute_greedy(oracle: &SubmodularOracle, order: &[usize]) -> Vec<f64> {
    let mut x = vec![0.0; oracle.len()];
    let mut prefix = Subset::EMPTY;
    for &e in order {
        let next = prefix.with(e);
        x[e] = oracle.value(next) - oracle.value(prefix);
        prefix = next;
    }
    x
}

/// Random point of the base polytope: a convex mix of a few greedy vertices.
pub fn random_point(rng: &mut ChaCha8Rng, oracle: &SubmodularOracle) -> LoadVector {
    let m = oracle.len();
    let k = rng.random_range(1..=3);
    let mut x = vec![0.0; m];
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        for (xi, v) in x.iter_mut().zip(brute_greedy(oracle, &order)) {
            *xi += w / total * v;
        }
    }
    LoadVector::new(oracle.ground(), x).unwrap()
}

pub fn random_vertex(rng: &mut ChaCha8Rng, oracle: &SubmodularOracle) -> LoadVector {
    let mut order: Vec<usize> = (0..oracle.len()).collect();
    order.shuffle(rng);
    greedy_vertex(oracle, &order)
}

/// `max alpha` on a grid of step `h` with `x + alpha (chi_to - chi_from)` in
/// the polytope, checked by [`brute_in_polytope`].
pub fn grid_capacity(oracle: &SubmodularOracle, x: &[f64], from: usize, to: usize, h: f64) -> f64 {
    let mut best = 0.0;
    let mut k = 1usize;
    loop {
        let alpha = k as f64 * h;
        if alpha > x[from] + h {
            return best;
        }
        let mut y = x.to_vec();
        y[from] -= alpha;
        y[to] += alpha;
        if !brute_in_polytope(oracle, &y, 1e-9) {
            return best;
        }
        best = alpha;
        k += 1;
    }
}

/// Four pairwise disjoint connected vertex sets that are pairwise adjacent.
pub fn brute_has_k4_minor(n: usize, edges: &[(usize, usize)]) -> bool {
    let adjacent = |a: u32, b: u32| edges.iter().any(|&(u, v)| (a >> u & 1 == 1 && b >> v & 1 == 1) || (a >> v & 1 == 1 && b >> u & 1 == 1));
    let connected = |s: u32| {
        if s == 0 {
            return false;
        }
        let mut seen = 1u32 << s.trailing_zeros();
        loop {
            let mut next = seen;
            for &(u, v) in edges {
                if s >> u & 1 == 1 && s >> v & 1 == 1 && (seen >> u & 1 == 1 || seen >> v & 1 == 1) {
                    next |= 1 << u | 1 << v;
                }
            }
            if next == seen {
                return seen == s;
            }
            seen = next;
        }
    };
    let sets: Vec<u32> = (1..1u32 << n).filter(|&s| connected(s)).collect();
    // label each vertex 0..=4 (4 = unused) and test the branch sets
    let mut labels = vec![0usize; n];
    loop {
        let mut branch = [0u32; 4];
        for (v, &l) in labels.iter().enumerate() {
            if l < 4 {
                branch[l] |= 1 << v;
            }
        }
        if branch[0] != 0
            && branch.iter().all(|b| sets.contains(b))
            && (0..4).all(|i| (i + 1..4).all(|j| adjacent(branch[i], branch[j])))
        {
            return true;
        }
        let mut i = 0;
        loop {
            if i == n {
                return false;
            }
            labels[i] += 1;
            if labels[i] <= 4 {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}
