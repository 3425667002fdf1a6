use std::collections::BTreeMap;
use std::path::Path;

use polygame_core::game::random_starts;
use polygame_core::instances::{
    cycle_game, graph_uniqueness_property, k4_conflict_pair, k4_graph, queueing_game, triangle_game,
    uniform_route_profile, BIG_M, DIRECT, INDIRECT,
};
use polygame_core::matroid::MatroidSpec;
use polygame_core::{
    bidirectional_flow, directed_flow, is_equilibrium, marginal_cost, probe_multiplicity, BidirectionalOutcome,
    Error, Game, MultiGraph, StrategyProfile, StrategySpace, SCHEMA_VERSION,
};
use serde_json::{json, Value};

use crate::io::{load_vector_to_json, render, write_text};
use crate::{Config, Failure, Report};

/// Residual allowed for the exact equilibria of the reference games.
const EXACT_TOL: f64 = 1e-9;

#[derive(Default)]
struct SelfCheck {
    checks: Vec<Value>,
}

impl SelfCheck {
    fn check(&mut self, name: &str, passed: bool, detail: impl Into<Value>) {
        self.checks.push(json!({"name": name, "passed": passed, "detail": detail.into()}));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c["passed"] == json!(true))
    }

    fn to_json(&self) -> Value {
        json!({"passed": self.passed(), "checks": self.checks})
    }
}

pub fn run(target: &str, out: Option<&Path>, config: &Config) -> Result<Report, Failure> {
    let (instance, expected, check) = match target {
        "triangle" => two_routes(triangle_game(), None)?,
        "k4" => k4()?,
        "queueing" => queueing(config)?,
        t => match t.strip_prefix("cycle:") {
            Some(k) => {
                let k: usize = k
                    .parse()
                    .map_err(|_| Failure::input("invalid_target", format!("cycle length {k:?} is not an integer")))?;
                two_routes(cycle_game(k, BIG_M)?, Some(MultiGraph::cycle(k)))?
            }
            None => {
                return Err(Failure::input(
                    "invalid_target",
                    format!("unknown target {t:?}; expected triangle, k4, cycle:<k> or queueing"),
                ))
            }
        },
    };
    let passed = check.passed();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "target": target,
        "instance": instance,
        "expected": expected,
        "self_check": check.to_json(),
    });
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::input("io", format!("cannot create {}: {e}", dir.display())))?;
        if let Value::Object(files) = &doc["instance"] {
            for (name, content) in files {
                write_text(&dir.join(format!("{name}.json")), &render(content))?;
            }
        }
        write_text(&dir.join("expected.json"), &render(&doc["expected"]))?;
        write_text(&dir.join("report.json"), &render(&doc))?;
    }
    Ok(Report::verdict(doc, passed))
}

/// Per player, the summed marginal cost of every allowable set.
fn route_marginals(game: &Game, profile: &StrategyProfile) -> Result<Value, Failure> {
    let mut rows = BTreeMap::new();
    for (i, p) in game.players.iter().enumerate() {
        let StrategySpace::SetSystem { sets } = &p.space else { continue };
        let mut per_set = Vec::new();
        for (k, s) in sets.iter().enumerate() {
            let mut total = 0.0;
            for e in s.iter() {
                total += marginal_cost(game, profile, i, e)?;
            }
            let weight = profile.distributions[i].as_ref().map_or(0.0, |w| w[k]);
            per_set.push(json!({"set": game.ground.subset_names(*s), "weight": weight, "marginal": total}));
        }
        rows.insert(p.id.clone(), per_set);
    }
    Ok(json!(rows))
}

fn aggregate_json(game: &Game, p: &StrategyProfile) -> BTreeMap<String, f64> {
    game.ground.names().iter().cloned().zip(p.aggregate()).collect()
}

/// Games with a direct and an indirect route per player, both pure profiles
/// being equilibria with aggregate loads 1 and 2 everywhere.
fn two_routes(game: Game, graph: Option<MultiGraph>) -> Result<(Value, Value, SelfCheck), Failure> {
    let mut check = SelfCheck::default();
    let mut equilibria = Vec::new();
    let mut aggregates = Vec::new();
    for (name, route, level) in [("all_direct", DIRECT, 1.0), ("all_indirect", INDIRECT, 2.0)] {
        let profile = uniform_route_profile(&game, route)?;
        let report = is_equilibrium(&game, &profile, EXACT_TOL)?;
        check.check(
            &format!("{name} is an equilibrium"),
            report.is_equilibrium,
            format!("worst violation {:e} at tolerance {EXACT_TOL:e}", report.worst_violation),
        );
        let agg = profile.aggregate();
        check.check(
            &format!("{name} aggregate load"),
            agg.iter().all(|&v| (v - level).abs() <= EXACT_TOL),
            format!("expected {level} on every resource, got {agg:?}"),
        );
        for (id, rows) in route_marginals(&game, &profile)?.as_object().expect("object") {
            let rows = rows.as_array().expect("array");
            let used = rows[route]["marginal"].as_f64().unwrap_or(f64::NAN);
            let cheapest = rows.iter().filter_map(|r| r["marginal"].as_f64()).fold(f64::INFINITY, f64::min);
            check.check(
                &format!("{name}: player {id} route is cheapest"),
                used <= cheapest + EXACT_TOL,
                format!("used {used}, cheapest {cheapest}"),
            );
        }
        equilibria.push(json!({
            "name": name,
            "profile": profile.to_json(&game),
            "aggregate": aggregate_json(&game, &profile),
            "route_marginals": route_marginals(&game, &profile)?,
            "residuals": report.residuals,
        }));
        aggregates.push(agg);
    }
    let gap = aggregates[0].iter().zip(&aggregates[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check.check("equilibria differ in aggregate loads", gap > 1e-4, format!("L-inf distance {gap}"));
    let mut expected = json!({
        "schema_version": SCHEMA_VERSION,
        "equilibria": equilibria,
        "count": 2,
        "distinct_aggregates": 2,
    });
    if let Some(g) = graph {
        let unique = graph_uniqueness_property(&g);
        check.check("cycle lacks the uniqueness property", !unique, format!("graph_uniqueness_property = {unique}"));
        expected["graph_uniqueness_property"] = json!(unique);
    }
    Ok((json!({"game": game.to_json()?}), expected, check))
}

fn k4() -> Result<(Value, Value, SelfCheck), Failure> {
    let (oracle, x, y) = k4_conflict_pair();
    let g = k4_graph();
    let spec = MatroidSpec::Graphic {
        vertices: g.vertices().to_vec(),
        edges: g.edges().iter().map(|e| (e.id.clone(), e.u.clone(), e.v.clone())).collect(),
    };
    let mut oracle_doc = serde_json::to_value(&spec).expect("spec serializes");
    oracle_doc["schema_version"] = json!(SCHEMA_VERSION);
    let instance = json!({"oracle": oracle_doc, "x": load_vector_to_json(&x), "y": load_vector_to_json(&y)});

    let mut check = SelfCheck::default();
    let outcome = bidirectional_flow(&oracle, &x, &y)?;
    let certificate = match &outcome {
        BidirectionalOutcome::Conflicting(c) => {
            check.check("pair is conflicting", true, format!("shortfall {}", c.shortfall));
            let supply_ok = c.supply_nodes == ["1", "6"];
            check.check("cut isolates supply at 1 and 6", supply_ok, format!("{:?}", c.supply_nodes));
            check.check("cut holds demand at 4", c.demand_nodes == ["4"], format!("{:?}", c.demand_nodes));
            json!(c)
        }
        BidirectionalOutcome::Feasible(_) => {
            check.check("pair is conflicting", false, "a bidirectional flow was found");
            Value::Null
        }
    };
    let flow = directed_flow(&oracle, &x, &y)?;
    let m = x.len();
    let steps = flow.trace.len();
    check.check("directed flow exists", true, format!("{steps} exchanges"));
    check.check("exchange count within m^2/4", steps <= m * m / 4, format!("{steps} <= {}", m * m / 4));
    let balance = flow.balance_error(&x, &y);
    check.check("directed flow meets supplies", balance <= 1e-9, format!("balance error {balance:e}"));
    let expected = json!({
        "schema_version": SCHEMA_VERSION,
        "verdict": if outcome.is_conflicting() { "conflicting strategies" } else { "bidirectional flow exists" },
        "certificate": certificate,
        "directed_flow": flow.to_json(),
    });
    Ok((instance, expected, check))
}

/// Three players on three M/M/1 queues, each reaching two of them.
fn queueing(config: &Config) -> Result<(Value, Value, SelfCheck), Failure> {
    const STARTS: usize = 10;
    let game = queueing_game(&[2.0, 3.0, 4.0], &[1.0, 2.0, 1.5], &[vec![0, 1], vec![1, 2], vec![0, 2]])?;
    let mut check = SelfCheck::default();
    let starts = random_starts(&game, STARTS, config.seed)?;
    let report = probe_multiplicity(&game, &starts, &config.params);
    check.check(
        "every start converged",
        report.failures.is_empty(),
        format!("{} of {STARTS} failed", report.failures.len()),
    );
    check.check(
        "single equilibrium",
        report.equilibria.len() == 1,
        format!("{} equilibria, {} distinct aggregates", report.equilibria.len(), report.distinct_aggregates),
    );
    let mut equilibria = Vec::new();
    for p in &report.equilibria {
        let r = is_equilibrium(&game, p, config.params.verify_tol)?;
        check.check(
            "equilibrium verifies",
            r.is_equilibrium,
            format!("worst violation {:e} at tolerance {:e}", r.worst_violation, r.tol),
        );
        equilibria.push(json!({"profile": p.to_json(&game), "aggregate": aggregate_json(&game, p)}));
    }
    let unstable = queueing_game(&[2.0], &[1.0, 1.0], &[vec![0], vec![0]]);
    check.check(
        "overloaded variant is rejected",
        matches!(unstable, Err(Error::Unstable(_))),
        "two unit demands on one queue of rate 2",
    );
    let expected = json!({
        "schema_version": SCHEMA_VERSION,
        "equilibria": equilibria,
        "count": report.equilibria.len(),
        "distinct_aggregates": report.distinct_aggregates,
        "seed": config.seed,
        "starts": STARTS,
    });
    Ok((json!({"game": game.to_json()?}), expected, check))
}
