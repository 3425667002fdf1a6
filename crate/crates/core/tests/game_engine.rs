use polygame_core::game::random_starts;
use polygame_core::instances::{queueing_game, triangle_game, uniform_route_profile, DIRECT, INDIRECT};
use polygame_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

fn parallel_links(costs: Vec<CostFunction>, demand: f64) -> Game {
    let ground = GroundSet::new(["a", "b"]).unwrap();
    let player = Player {
        id: "1".into(),
        demand,
        space: StrategySpace::SetSystem { sets: vec![Subset::singleton(0), Subset::singleton(1)] },
        costs,
    };
    Game::new(ground, vec![player]).unwrap()
}

#[test]
fn total_cost_examples() {
    let g = triangle_game();
    let direct = uniform_route_profile(&g, DIRECT).unwrap();
    let indirect = uniform_route_profile(&g, INDIRECT).unwrap();
    assert!(close(total_cost(&g, &direct, 0).unwrap(), 1.0));
    assert!(close(total_cost(&g, &indirect, 0).unwrap(), 6.0));

    let mut zero = g.clone();
    zero.players[2].demand = 0.0;
    let mut p = zero.pure_profile(&[0, 0, 0]).unwrap();
    assert!(close(total_cost(&zero, &p, 2).unwrap(), 0.0));
    p.distributions[2] = Some(vec![0.0, 0.0]);
    assert!(close(total_cost(&zero, &p, 2).unwrap(), 0.0));
}

#[test]
fn marginal_cost_examples() {
    let g = triangle_game();
    let direct = uniform_route_profile(&g, DIRECT).unwrap();
    let indirect = uniform_route_profile(&g, INDIRECT).unwrap();
    assert!(close(marginal_cost(&g, &direct, 0, 0).unwrap(), 4.0));
    // no own load on f: only the cost term remains
    assert!(close(marginal_cost(&g, &direct, 0, 1).unwrap(), 2.0));
    assert!(close(marginal_cost(&g, &indirect, 0, 1).unwrap(), 4.0));
}

#[test]
fn queue_overload_is_reported() {
    let g = queueing_game(&[2.0, 2.0], &[1.0], &[vec![0, 1]]).unwrap();
    let x = LoadVector::new(&g.ground, vec![1.0, 0.0]).unwrap();
    let ok = StrategyProfile { loads: vec![x], distributions: vec![None] };
    assert!(close(total_cost(&g, &ok, 0).unwrap(), 1.0));
    let over = queueing_game(&[1.0, 2.0], &[1.5], &[vec![0, 1]]).unwrap();
    let x = LoadVector::new(&over.ground, vec![1.5, 0.0]).unwrap();
    let bad = StrategyProfile { loads: vec![x], distributions: vec![None] };
    assert!(matches!(total_cost(&over, &bad, 0), Err(Error::QueueOverload { .. })));
}

#[test]
fn best_response_splits_symmetric_links() {
    let g = parallel_links(vec![CostFunction::Poly(vec![0.0, 1.0]); 2], 1.0);
    let start = g.pure_profile(&[0]).unwrap();
    let br = best_response(&g, &start, 0, &SolverParams::default()).unwrap();
    assert!((br.load.get(0) - 0.5).abs() < 1e-6, "{:?}", br.load);
    assert!(br.gap <= 1e-9);
    let w = br.distribution.unwrap();
    assert!((w[0] - 0.5).abs() < 1e-6);
}

#[test]
fn best_response_keeps_triangle_direct_route() {
    let g = triangle_game();
    let direct = uniform_route_profile(&g, DIRECT).unwrap();
    let br = best_response(&g, &direct, 0, &SolverParams::default()).unwrap();
    assert_eq!(br.load, direct.loads[0]);
    assert!(br.gap <= 1e-9);
}

#[test]
fn best_response_on_two_queues() {
    let g = queueing_game(&[2.0, 2.0], &[1.0], &[vec![0, 1]]).unwrap();
    let x = LoadVector::new(&g.ground, vec![1.0, 0.0]).unwrap();
    let start = StrategyProfile { loads: vec![x], distributions: vec![None] };
    let br = best_response(&g, &start, 0, &SolverParams::default()).unwrap();
    assert!((br.load.get(0) - 0.5).abs() < 1e-6, "{:?}", br.load);
}

#[test]
fn triangle_equilibrium_verdicts() {
    let g = triangle_game();
    for route in [DIRECT, INDIRECT] {
        let p = uniform_route_profile(&g, route).unwrap();
        let r = is_equilibrium(&g, &p, 1e-9).unwrap();
        assert!(r.is_equilibrium, "route {route}");
        assert_eq!(r.worst_violation, 0.0);
    }
    let mut split = uniform_route_profile(&g, DIRECT).unwrap();
    split.distributions[0] = Some(vec![0.5, 0.5]);
    split.loads[0] = g.induced_load(0, &[0.5, 0.5]).unwrap();
    let r = is_equilibrium(&g, &split, 1e-9).unwrap();
    assert!(!r.is_equilibrium);
    // player 1: direct marginal 0.5, indirect 3 + 3
    assert!(close(r.residuals["1"], 5.5));
    // player 2: direct 1.5^3 + 3 * 1.5^2, indirect 1.5 + 2.5
    assert!(close(r.residuals["2"], 6.125));
    assert!(close(r.worst_violation, 6.125));
}

#[test]
fn infeasible_profile_is_rejected() {
    let g = triangle_game();
    let mut p = uniform_route_profile(&g, DIRECT).unwrap();
    p.distributions[0] = Some(vec![0.7, 0.7]);
    assert!(matches!(is_equilibrium(&g, &p, 1e-9), Err(Error::InfeasibleProfile(_))));
}

#[test]
fn single_player_converges_in_one_sweep() {
    let g = parallel_links(vec![CostFunction::Poly(vec![0.0, 1.0]), CostFunction::Poly(vec![0.0, 2.0])], 1.0);
    let start = g.pure_profile(&[0]).unwrap();
    let params = SolverParams { max_sweeps: 2, ..Default::default() };
    let eq = find_equilibrium(&g, &start, &params).unwrap();
    // 2x = 4(1-x) -> x = 2/3
    assert!((eq.loads[0].get(0) - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn triangle_direct_start_is_a_fixed_point() {
    let g = triangle_game();
    let direct = uniform_route_profile(&g, DIRECT).unwrap();
    let eq = find_equilibrium(&g, &direct, &SolverParams::default()).unwrap();
    assert_eq!(eq, direct);
}

#[test]
fn symmetric_queueing_players_split_evenly() {
    let g = queueing_game(&[3.0, 3.0], &[1.0, 1.0], &[vec![0, 1], vec![0, 1]]).unwrap();
    let start = StrategyProfile {
        loads: vec![
            LoadVector::new(&g.ground, vec![1.0, 0.0]).unwrap(),
            LoadVector::new(&g.ground, vec![0.2, 0.8]).unwrap(),
        ],
        distributions: vec![None, None],
    };
    let eq = find_equilibrium(&g, &start, &SolverParams::default()).unwrap();
    for x in &eq.loads {
        assert!((x.get(0) - 0.5).abs() < 1e-5, "{x:?}");
    }
}

#[test]
fn triangle_has_two_equilibria() {
    let g = triangle_game();
    let starts = [uniform_route_profile(&g, DIRECT).unwrap(), uniform_route_profile(&g, INDIRECT).unwrap()];
    let r = probe_multiplicity(&g, &starts, &SolverParams::default());
    assert_eq!(r.equilibria.len(), 2);
    assert_eq!(r.distinct_aggregates, 2);
    assert_eq!(r.equilibria[0].aggregate(), vec![1.0, 1.0, 1.0]);
    assert_eq!(r.equilibria[1].aggregate(), vec![2.0, 2.0, 2.0]);
}

fn matroid_game(m: &Matroid, demands: &[f64], seed: u64) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rank = m.rank_oracle();
    let players = demands
        .iter()
        .enumerate()
        .map(|(i, &d)| Player {
            id: format!("{}", i + 1),
            demand: d,
            space: StrategySpace::polymatroid(rank.scale(d)),
            costs: (0..rank.len())
                .map(|_| {
                    use rand::Rng;
                    CostFunction::Poly(vec![rng.random_range(0.0..1.0), rng.random_range(0.5..2.0), rng.random_range(0.0..1.0)])
                })
                .collect(),
        })
        .collect();
    Game::new(m.ground().clone(), players).unwrap()
}

#[test]
fn base_orderable_matroid_game_has_one_equilibrium() {
    let m = Matroid::uniform(4, 2).unwrap();
    let g = matroid_game(&m, &[1.0, 2.0], 5);
    let starts = random_starts(&g, 10, 11).unwrap();
    let r = probe_multiplicity(&g, &starts, &SolverParams::default());
    assert!(r.failures.is_empty(), "{:?}", r.failures);
    assert_eq!(r.equilibria.len(), 1);
}

#[test]
fn set_system_response_clears_small_weights_on_costly_sets() {
    // all-indirect triangle with a sliver of weight left on player 1's direct set
    let g = triangle_game();
    let mut p = uniform_route_profile(&g, INDIRECT).unwrap();
    let w = vec![1e-5, 1.0 - 1e-5];
    p.loads[0] = g.induced_load(0, &w).unwrap();
    p.distributions[0] = Some(w);
    let br = best_response(&g, &p, 0, &SolverParams::default()).unwrap();
    assert_eq!(br.distribution.unwrap()[0], 0.0);
    assert!(br.gap <= 1e-9);
}

#[test]
fn triangle_random_starts_reach_verified_equilibria() {
    let g = triangle_game();
    let params = SolverParams::default();
    let starts = random_starts(&g, 6, 5).unwrap();
    let r = probe_multiplicity(&g, &starts, &params);
    assert!(r.failures.is_empty(), "{:?}", r.failures);
    for eq in &r.equilibria {
        assert!(is_equilibrium(&g, eq, params.verify_tol).unwrap().is_equilibrium);
    }
}

#[test]
fn single_resource_game_has_one_equilibrium() {
    let ground = GroundSet::new(["r"]).unwrap();
    let players = (0..2)
        .map(|i| Player {
            id: format!("{i}"),
            demand: 1.0 + i as f64,
            space: StrategySpace::SetSystem { sets: vec![Subset::singleton(0)] },
            costs: vec![CostFunction::Poly(vec![1.0, 1.0])],
        })
        .collect();
    let g = Game::new(ground, players).unwrap();
    let starts = random_starts(&g, 5, 1).unwrap();
    let r = probe_multiplicity(&g, &starts, &SolverParams::default());
    assert_eq!(r.equilibria.len(), 1);
}

#[test]
fn set_system_and_polymatroid_verdicts_agree_on_matroid_games() {
    // uniform(4,2) bases as a set system versus the scaled rank polytope
    let m = Matroid::uniform(4, 2).unwrap();
    let poly = matroid_game(&m, &[1.0, 1.0], 3);
    let bases = m.enumerate_bases().unwrap();
    let mut sets_game = poly.clone();
    for p in &mut sets_game.players {
        p.space = StrategySpace::SetSystem { sets: bases.clone() };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = SolverParams::default();
    for _ in 0..5 {
        let start = random_profile(&sets_game, &mut rng).unwrap();
        let eq = find_equilibrium(&sets_game, &start, &params).unwrap();
        let as_poly = StrategyProfile { loads: eq.loads.clone(), distributions: vec![None; 2] };
        assert!(is_equilibrium(&poly, &as_poly, 1e-6).unwrap().is_equilibrium);
        assert!(is_equilibrium(&sets_game, &start, 1e-6).unwrap().is_equilibrium
            == is_equilibrium(&poly, &StrategyProfile { loads: start.loads.clone(), distributions: vec![None; 2] }, 1e-6)
                .unwrap()
                .is_equilibrium);
    }
}

#[test]
fn game_json_round_trip() {
    let g = triangle_game();
    let doc = g.to_json().unwrap();
    assert_eq!(doc["schema_version"], 1);
    let back = Game::from_json(&doc).unwrap();
    assert_eq!(back.to_json().unwrap(), doc);
    let p = uniform_route_profile(&g, INDIRECT).unwrap();
    let pj = p.to_json(&g);
    assert_eq!(StrategyProfile::from_json(&g, &pj).unwrap(), p);

    let q = queueing_game(&[2.0, 3.0], &[1.0], &[vec![0, 1]]).unwrap();
    let qj = q.to_json().unwrap();
    let q2 = Game::from_json(&qj).unwrap();
    assert_eq!(q2.to_json().unwrap(), qj);
    assert!(Game::from_json(&serde_json::json!({"schema_version": 2, "ground": [], "players": []})).is_err());
}

#[test]
fn game_json_requires_costs_on_usable_elements() {
    let doc = serde_json::json!({
        "ground": ["a", "b"],
        "players": [{"id": "1", "demand": 1, "space": {"kind": "set_system", "sets": [["a"], ["b"]]},
                      "costs": {"a": {"poly": [0, 1]}}}]
    });
    assert!(Game::from_json(&doc).is_err());
    let doc = serde_json::json!({
        "ground": ["a", "b", "c"],
        "players": [{"id": "1", "demand": 2, "space": {"kind": "matroid", "class": "uniform", "elements": ["a", "b"], "k": 1},
                      "costs": {"a": {"poly": [0, 1]}, "b": {"queue": {"mu": 5}}}}]
    });
    let g = Game::from_json(&doc).unwrap();
    let StrategySpace::Polymatroid { oracle, .. } = &g.players[0].space else { panic!() };
    assert_eq!(oracle.total(), 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn best_response_never_increases_cost(seed in 0u64..1000, damp in 0.1f64..1.0) {
        let m = Matroid::uniform(4, 2).unwrap();
        let g = matroid_game(&m, &[1.0, 1.5], seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_profile(&g, &mut rng).unwrap();
        let before = total_cost(&g, &p, 0).unwrap();
        let br = best_response(&g, &p, 0, &SolverParams::default()).unwrap();
        let mut q = p.clone();
        q.loads[0] = p.loads[0].lerp(&br.load, damp);
        prop_assert!(total_cost(&g, &q, 0).unwrap() <= before + 1e-9);
        prop_assert!(in_base_polytope(&m.rank_oracle().scale(1.0), &q.loads[0], 1e-9).unwrap());
    }

    #[test]
    fn polymatroid_response_matches_base_enumeration(seed in 0u64..1000, k4 in any::<bool>()) {
        // decomposition on the rank polytope versus Frank-Wolfe over the listed bases
        let m = if k4 { MultiGraph::complete(4).graphic_matroid().unwrap() } else { Matroid::uniform(5, 2).unwrap() };
        let poly = matroid_game(&m, &[1.0, 2.0], seed);
        let mut sets_game = poly.clone();
        for p in &mut sets_game.players {
            p.space = StrategySpace::SetSystem { sets: m.enumerate_bases().unwrap() };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = random_profile(&sets_game, &mut rng).unwrap();
        let params = SolverParams::default();
        for i in 0..2 {
            let a = best_response(&poly, &start, i, &params).unwrap();
            let b = best_response(&sets_game, &start, i, &params).unwrap();
            let (mut pa, mut pb) = (start.clone(), start.clone());
            pa.loads[i] = a.load.clone();
            pb.loads[i] = b.load;
            let (ca, cb) = (total_cost(&poly, &pa, i).unwrap(), total_cost(&sets_game, &pb, i).unwrap());
            prop_assert!((ca - cb).abs() < 1e-7 * (1.0 + ca.abs()), "{} vs {}", ca, cb);
            prop_assert!(in_base_polytope(&m.rank_oracle().scale(poly.players[i].demand), &a.load, 1e-9).unwrap());
            prop_assert!(a.gap < 1e-9);
        }
    }

    #[test]
    fn triangle_iterates_stay_feasible(seed in 0u64..1000) {
        let g = triangle_game();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_profile(&g, &mut rng).unwrap();
        for i in 0..3 {
            let br = best_response(&g, &p, i, &SolverParams::default()).unwrap();
            let w = br.distribution.unwrap();
            prop_assert!(w.iter().all(|v| *v >= -1e-12));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(g.induced_load(i, &w).unwrap().max_abs_diff(&br.load) < 1e-9);
        }
    }

    #[test]
    fn scaling_costs_preserves_verdicts(seed in 0u64..1000, gamma in 0.1f64..10.0) {
        let g = triangle_game();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profiles = [
            uniform_route_profile(&g, DIRECT).unwrap(),
            uniform_route_profile(&g, INDIRECT).unwrap(),
            random_profile(&g, &mut rng).unwrap(),
        ];
        let mut scaled = g.clone();
        scaled.players[0].costs = g.players[0].costs.iter().map(|c| c.scaled(gamma).unwrap()).collect();
        for p in &profiles {
            let a = is_equilibrium(&g, p, 1e-9).unwrap();
            let b = is_equilibrium(&scaled, p, 1e-9).unwrap();
            prop_assert_eq!(a.is_equilibrium, b.is_equilibrium);
            prop_assert!((b.residuals["1"] - gamma * a.residuals["1"]).abs() < 1e-9 * (1.0 + gamma));
        }
    }
}
