use polygame_core::game::random_starts;
use polygame_core::instances::*;
use polygame_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sys(sets: &[&[&str]]) -> SetSystem {
    SetSystem::new(&sets.iter().map(|s| s.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Matroid recognition through independent sets: the down-closure of the
/// family must satisfy augmentation and its maximal members must be exactly
/// the family.
fn is_matroid_by_augmentation(sets: &[Subset], m: usize) -> bool {
    let indep: Vec<Subset> = Subset::all(m).filter(|s| sets.iter().any(|b| s.is_subset_of(*b))).collect();
    let is_indep = |s: Subset| indep.contains(&s);
    for &i in &indep {
        for &j in &indep {
            if i.len() < j.len() && !j.difference(i).iter().any(|e| is_indep(i.union(Subset::singleton(e)))) {
                return false;
            }
        }
    }
    let maximal: Vec<Subset> = indep
        .iter()
        .copied()
        .filter(|&s| (0..m).all(|e| s.contains(e) || !is_indep(s.union(Subset::singleton(e)))))
        .collect();
    maximal.len() == sets.len() && sets.iter().all(|s| maximal.contains(s))
}

fn witness_holds(sets: &[Subset], w: &NonMatroidWitness) -> bool {
    let diff = w.x.symmetric_difference(w.y);
    sets.contains(&w.x)
        && sets.contains(&w.y)
        && [w.a, w.b, w.c].iter().all(|&e| diff.contains(e))
        && w.a != w.b
        && w.a != w.c
        && w.b != w.c
        && sets
            .iter()
            .filter(|z| z.is_subset_of(w.x.union(w.y)))
            .all(|z| z.contains(w.a) || (z.contains(w.b) && z.contains(w.c)))
}

/// All nonempty antichains of subsets of an `m`-set, by backtracking over
/// subsets in increasing bitmask order.
fn antichains(m: usize) -> Vec<Vec<Subset>> {
    fn go(all: &[Subset], from: usize, cur: &mut Vec<Subset>, out: &mut Vec<Vec<Subset>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for k in from..all.len() {
            let s = all[k];
            if cur.iter().all(|t| !s.is_subset_of(*t) && !t.is_subset_of(s)) {
                cur.push(s);
                go(all, k + 1, cur, out);
                cur.pop();
            }
        }
    }
    let all: Vec<Subset> = Subset::all(m).collect();
    let mut out = Vec::new();
    go(&all, 0, &mut Vec::new(), &mut out);
    out
}

fn two_route_profiles(g: &Game) -> [StrategyProfile; 2] {
    [uniform_route_profile(g, DIRECT).unwrap(), uniform_route_profile(g, INDIRECT).unwrap()]
}

#[test]
fn triangle_game_matches_its_description() {
    let g = triangle_game();
    assert_eq!(g.ground.names(), ["e", "f", "g"]);
    for (i, p) in g.players.iter().enumerate() {
        assert_eq!(p.demand, 1.0);
        let StrategySpace::SetSystem { sets } = &p.space else { panic!() };
        assert_eq!(sets[DIRECT], Subset::singleton(i));
        assert_eq!(sets[INDIRECT], Subset::full(3).difference(Subset::singleton(i)));
        for e in 0..3 {
            let x: f64 = 1.7;
            let want = if e == i { x.powi(3) } else { x + 1.0 };
            assert!((p.costs[e].value(x) - want).abs() < 1e-12);
        }
    }
}

#[test]
fn triangle_two_equilibria_with_distinct_aggregates() {
    let g = triangle_game();
    let [direct, indirect] = two_route_profiles(&g);
    for p in [&direct, &indirect] {
        let r = is_equilibrium(&g, p, 1e-9).unwrap();
        assert!(r.is_equilibrium);
        assert!(r.worst_violation <= 1e-9);
    }
    // marginal of a used route equals that of the alternative: 1+3 <= 2+2 and 3+1+3+1 <= 8
    assert_eq!(marginal_cost(&g, &direct, 0, 0).unwrap(), 4.0);
    assert_eq!(marginal_cost(&g, &direct, 0, 1).unwrap() + marginal_cost(&g, &direct, 0, 2).unwrap(), 4.0);
    assert_eq!(marginal_cost(&g, &indirect, 0, 1).unwrap() + marginal_cost(&g, &indirect, 0, 2).unwrap(), 8.0);
    assert_eq!(marginal_cost(&g, &indirect, 0, 0).unwrap(), 8.0);
    let r = probe_multiplicity(&g, &[direct, indirect], &SolverParams::default());
    assert_eq!(r.distinct_aggregates, 2);
}

#[test]
fn cycle_of_three_is_the_triangle() {
    let t = triangle_game();
    let c = cycle_game(3, 100.0).unwrap();
    assert_eq!(c.ground.names(), ["c1", "c2", "c3"]);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for x in [0.0, 0.5, 1.0, 2.0, 3.0] {
        for i in 0..3 {
            for e in 0..3 {
                assert!((t.players[i].costs[e].value(x) - c.players[i].costs[e].value(x)).abs() < 1e-12);
            }
        }
    }
    let mut profiles: Vec<StrategyProfile> = (0..8)
        .map(|mask: usize| t.pure_profile(&(0..3).map(|i| (mask >> i) & 1).collect::<Vec<_>>()).unwrap())
        .collect();
    profiles.extend((0..10).map(|_| random_profile(&t, &mut rng).unwrap()));
    for p in &profiles {
        let q = StrategyProfile {
            loads: p.loads.iter().map(|l| LoadVector::new(&c.ground, l.values().to_vec()).unwrap()).collect(),
            distributions: p.distributions.clone(),
        };
        let a = is_equilibrium(&t, p, 1e-9).unwrap();
        let b = is_equilibrium(&c, &q, 1e-9).unwrap();
        assert_eq!(a.is_equilibrium, b.is_equilibrium);
        for (k, v) in &a.residuals {
            assert!((v - b.residuals[k]).abs() < 1e-9);
        }
    }
}

#[test]
fn cycles_of_four_and_five_have_two_equilibria() {
    for k in [4, 5] {
        let g = cycle_game(k, 100.0).unwrap();
        assert_eq!(g.ground.len(), k);
        let [cw, ccw] = two_route_profiles(&g);
        for p in [&cw, &ccw] {
            assert!(is_equilibrium(&g, p, 1e-9).unwrap().is_equilibrium, "k = {k}");
        }
        let params = SolverParams::default();
        let r = probe_multiplicity(&g, &[cw, ccw], &params);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert_eq!(r.distinct_aggregates, 2, "k = {k}");
        let starts = random_starts(&g, 4, 3).unwrap();
        let r = probe_multiplicity(&g, &starts, &params);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        for eq in &r.equilibria {
            assert!(is_equilibrium(&g, eq, params.verify_tol).unwrap().is_equilibrium);
        }
    }
}

#[test]
fn cycle_game_rejects_bad_parameters() {
    assert!(matches!(cycle_game(2, 100.0), Err(Error::InvalidK { .. })));
    assert!(matches!(cycle_game(4, 50.0), Err(Error::InvalidK { .. })));
    assert!(matches!(cycle_game(4, f64::NAN), Err(Error::InvalidK { .. })));
}

#[test]
fn single_queueing_player_splits_evenly() {
    let g = queueing_game(&[2.0, 2.0], &[1.0], &[vec![0, 1]]).unwrap();
    let start = random_starts(&g, 1, 1).unwrap().remove(0);
    let eq = find_equilibrium(&g, &start, &SolverParams::default()).unwrap();
    assert!((eq.loads[0].get(0) - 0.5).abs() < 1e-6);
    assert!((eq.loads[0].get(1) - 0.5).abs() < 1e-6);
}

#[test]
fn disjoint_queueing_players_solve_alone() {
    let g = queueing_game(&[2.0, 3.0, 4.0, 1.0], &[1.0, 2.0], &[vec![0, 1], vec![2, 3]]).unwrap();
    let start = random_starts(&g, 1, 2).unwrap().remove(0);
    let eq = find_equilibrium(&g, &start, &SolverParams::default()).unwrap();
    for (i, (mus, d, qs)) in [([2.0, 3.0], 1.0, [0, 1]), ([4.0, 1.0], 2.0, [2, 3])].into_iter().enumerate() {
        let alone = queueing_game(&mus, &[d], &[vec![0, 1]]).unwrap();
        let s = random_starts(&alone, 1, 5).unwrap().remove(0);
        let solo = find_equilibrium(&alone, &s, &SolverParams::default()).unwrap();
        for (k, &q) in qs.iter().enumerate() {
            assert!((eq.loads[i].get(q) - solo.loads[0].get(k)).abs() < 1e-5);
        }
    }
}

#[test]
fn two_identical_queueing_players_have_one_equilibrium() {
    let g = queueing_game(&[3.0, 3.0], &[1.0, 1.0], &[vec![0, 1], vec![0, 1]]).unwrap();
    let starts = random_starts(&g, 8, 7).unwrap();
    let r = probe_multiplicity(&g, &starts, &SolverParams::default());
    assert!(r.failures.is_empty());
    assert_eq!(r.equilibria.len(), 1);
}

#[test]
fn unstable_queueing_game_is_rejected() {
    assert!(matches!(queueing_game(&[1.0, 1.0], &[2.5], &[vec![0, 1]]), Err(Error::Unstable(_))));
    // each player fits alone, together they do not
    assert!(matches!(queueing_game(&[2.0], &[1.0, 1.0], &[vec![0], vec![0]]), Err(Error::Unstable(_))));
}

#[test]
fn k4_pair_is_two_spanning_trees() {
    let (oracle, x, y) = k4_conflict_pair();
    assert_eq!(x.values(), [1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    assert_eq!(y.values(), [0.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
    assert!(in_base_polytope(&oracle, &x, 1e-12).unwrap());
    assert!(in_base_polytope(&oracle, &y, 1e-12).unwrap());
}

#[test]
fn base_family_examples() {
    assert!(!is_matroid_base_family(&sys(&[&["e"], &["f", "g"]])).unwrap());
    assert!(is_matroid_base_family(&sys(&[&["a", "b"], &["a", "c"], &["b", "c"]])).unwrap());
    assert!(!is_matroid_base_family(&sys(&[&["a", "b"], &["c", "d"]])).unwrap());
    let big: Vec<String> = (0..11).map(|i| format!("x{i}")).collect();
    let s = SetSystem::new(&[big]).unwrap();
    assert!(matches!(is_matroid_base_family(&s), Err(Error::GroundTooLarge { .. })));
}

#[test]
fn witness_examples() {
    let s = sys(&[&["e"], &["f", "g"]]);
    let w = find_nonmatroid_witness(&s).unwrap();
    let n = |e: usize| s.ground.name(e).to_string();
    assert_eq!(s.ground.subset_names(w.x), ["e"]);
    assert_eq!(s.ground.subset_names(w.y), ["f", "g"]);
    assert_eq!((n(w.a), n(w.b), n(w.c)), ("e".into(), "f".into(), "g".into()));
    let u = sys(&[&["a"], &["b"]]);
    assert!(matches!(find_nonmatroid_witness(&u), Err(Error::WitnessNotFound)));
}

#[test]
fn every_small_nonmatroid_antichain_has_a_witness() {
    let all = antichains(5);
    // Dedekind number M(5) counts the empty antichain as well
    assert_eq!(all.len() + 1, 7581);
    let names = ["a", "b", "c", "d", "e"];
    let mut nonmatroids = 0;
    for family in all.iter().filter(|f| **f != [Subset::EMPTY]) {
        let lists: Vec<Vec<&str>> = family.iter().map(|s| s.iter().map(|e| names[e]).collect()).collect();
        let s = SetSystem::new(&lists).unwrap();
        assert!(s.is_antichain());
        let m = s.ground.len();
        let matroid = is_matroid_by_augmentation(&s.sets, m);
        assert_eq!(is_matroid_base_family(&s).unwrap(), matroid, "{lists:?}");
        if !matroid {
            nonmatroids += 1;
            let w = find_nonmatroid_witness(&s).unwrap_or_else(|e| panic!("{lists:?}: {e}"));
            assert!(witness_holds(&s.sets, &w), "{lists:?}");
        }
    }
    assert!(nonmatroids > 0);
}

#[test]
fn three_triangle_systems_embed_to_the_triangle() {
    let s = sys(&[&["e"], &["f", "g"]]);
    let ce = embed_counterexample(&[s.clone(), s.clone(), s], BIG_M).unwrap();
    let t = triangle_game();
    assert_eq!(ce.game.ground.names(), t.ground.names());
    for i in 0..3 {
        let StrategySpace::SetSystem { sets } = &ce.game.players[i].space else { panic!() };
        let StrategySpace::SetSystem { sets: want } = &t.players[i].space else { panic!() };
        assert_eq!(sets, want);
        for e in 0..3 {
            assert_eq!(ce.game.players[i].costs[e], t.players[i].costs[e]);
        }
    }
    for p in [&ce.direct, &ce.indirect] {
        assert!(is_equilibrium(&ce.game, p, 1e-9).unwrap().is_equilibrium);
    }
    let r = probe_multiplicity(&ce.game, &[ce.direct.clone(), ce.indirect.clone()], &SolverParams::default());
    assert_eq!(r.distinct_aggregates, 2);
}

#[test]
fn embedding_follows_the_role_rotation() {
    let s = sys(&[&["e"], &["f", "g"]]);
    let ce = embed_counterexample(&[s.clone(), s.clone(), s], BIG_M).unwrap();
    let role = |i: usize, r: usize| {
        let w = &ce.witnesses[i];
        let x = [w.a, w.b, w.c][r];
        ce.embedding.maps[i][&["e", "f", "g"][x].to_string()].clone()
    };
    assert_eq!([role(0, 0), role(1, 1), role(2, 2)], ["e", "e", "e"]);
    assert_eq!([role(1, 0), role(2, 1), role(0, 2)], ["f", "f", "f"]);
    assert_eq!([role(2, 0), role(0, 1), role(1, 2)], ["g", "g", "g"]);
}

#[test]
fn expensive_extra_elements_stay_empty() {
    // {h} lies outside X and Y, so it costs x + M and carries no load
    let a = sys(&[&["e"], &["f", "g"], &["h"]]);
    let b = sys(&[&["u", "v"], &["w"], &["u", "z"]]);
    let c = sys(&[&["p"], &["q", "r"]]);
    let ce = embed_counterexample(&[a, b, c], BIG_M).unwrap();
    for p in [&ce.direct, &ce.indirect] {
        let r = is_equilibrium(&ce.game, p, 1e-9).unwrap();
        assert!(r.is_equilibrium, "{:?}", r.residuals);
        let agg = p.aggregate();
        for (e, name) in ce.game.ground.names().iter().enumerate() {
            if !SHARED.contains(&name.as_str()) && ce.game.players.iter().any(|pl| pl.costs[e].value(0.0) >= BIG_M) {
                assert_eq!(agg[e], 0.0, "{name}");
            }
        }
    }
    assert!(ce.game.ground.names().iter().any(|n| n == "p1.h"));
    let ph = ce.game.ground.index_of("p1.h").unwrap();
    assert_eq!(ce.game.players[0].costs[ph], CostFunction::Poly(vec![BIG_M, 1.0]));
}

#[test]
fn fourth_player_has_no_demand() {
    let s = sys(&[&["e"], &["f", "g"]]);
    let ce = embed_counterexample(&[s.clone(), s.clone(), s.clone(), s], BIG_M).unwrap();
    assert_eq!(ce.game.players.len(), 4);
    assert_eq!(ce.game.players[3].demand, 0.0);
    let names = ce.game.ground.names();
    assert!(names.iter().any(|n| n == "p4.e"));
    for p in [&ce.direct, &ce.indirect] {
        assert!(is_equilibrium(&ce.game, p, 1e-9).unwrap().is_equilibrium);
    }
    let r = probe_multiplicity(&ce.game, &[ce.direct.clone(), ce.indirect.clone()], &SolverParams::default());
    assert_eq!(r.distinct_aggregates, 2);
}

#[test]
fn embedding_rejects_matroids_and_short_lists() {
    let s = sys(&[&["e"], &["f", "g"]]);
    let u = sys(&[&["a"], &["b"]]);
    assert!(matches!(embed_counterexample(&[s.clone(), s.clone(), u], BIG_M), Err(Error::NotNonMatroid)));
    assert!(embed_counterexample(&[s.clone(), s], BIG_M).is_err());
}

fn random_tree_with_parallels(rng: &mut ChaCha8Rng, n: usize) -> MultiGraph {
    let vertices: Vec<String> = (0..n).map(|v| format!("v{v}")).collect();
    let mut edges = Vec::new();
    for v in 1..n {
        let parent = rng.random_range(0..v);
        for _ in 0..rng.random_range(1..=3) {
            edges.push((format!("e{}", edges.len()), vertices[parent].clone(), vertices[v].clone()));
        }
    }
    MultiGraph::new(&vertices, &edges).unwrap()
}

#[test]
fn graph_property_examples() {
    assert!(!graph_uniqueness_property(&MultiGraph::cycle(3)));
    assert!(!graph_uniqueness_property(&MultiGraph::cycle(5)));
    let parallels: Vec<(String, String, String)> =
        (0..5).map(|i| (format!("e{i}"), "s".to_string(), "t".to_string())).collect();
    assert!(graph_uniqueness_property(&MultiGraph::new(&["s".to_string(), "t".to_string()], &parallels).unwrap()));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        assert!(graph_uniqueness_property(&random_tree_with_parallels(&mut rng, 6)));
    }
}

#[test]
fn parallel_link_games_on_trees_have_one_equilibrium() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..3 {
        let g = random_tree_with_parallels(&mut rng, 4);
        let coefs: Vec<[f64; 3]> =
            (0..6).map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.5..2.0), rng.random_range(0.0..1.0)]).collect();
        let m = g.edges().len();
        let coefs: Vec<Vec<[f64; 3]>> = (0..2).map(|_| (0..m).map(|e| coefs[e % 6]).collect()).collect();
        let terminals = vec![("v0".to_string(), "v3".to_string()), ("v1".to_string(), "v2".to_string())];
        let game = parallel_link_game(&g, &terminals, &[1.0, 1.5], |i, e| CostFunction::Poly(coefs[i][e].to_vec())).unwrap();
        let starts = random_starts(&game, 6, 3).unwrap();
        let r = probe_multiplicity(&game, &starts, &SolverParams::default());
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert_eq!(r.equilibria.len(), 1);
    }
    assert!(parallel_link_game(&MultiGraph::cycle(3), &[], &[], |_, _| CostFunction::zero()).is_err());
}
