use std::collections::BTreeMap;
use std::path::Path;

use polygame_core::exchange::ProbeConfig;
use polygame_core::game::random_starts;
use polygame_core::matroid::{is_base_orderable, BaseOrderability, MatroidSpec, PairBijection};
use polygame_core::polymatroid::polytope_violation;
use polygame_core::{
    bidirectional_flow, build_bidirectional, build_directed, certify_polymatroid, directed_flow, is_equilibrium,
    probe_bidirectional_property, probe_multiplicity, BidirectionalOutcome, Certificate, Game, GroundSet,
    MultiGraph, SolverParams, StrategyProfile, StrategySpace, Subset, SubmodularOracle, SCHEMA_VERSION,
};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::io::{load_vector_from_json, load_vector_to_json, read_json, read_oracle, write_text, OracleSource};
use crate::{reproduce, Command, Config, Failure, MatroidCommand, PropertyCommand, Report};

pub fn dispatch(command: &Command, config: &Config) -> Result<Report, Failure> {
    match command {
        Command::Solve { game, starts, damping, tol } => {
            let params = tuned(config, *damping, *tol)?;
            multi_start(game, *starts, config.seed, &params, true)
        }
        Command::Verify { game, profile, tol } => verify(game, profile, *tol),
        Command::Probe { game, starts, damping } => {
            let params = tuned(config, *damping, None)?;
            multi_start(game, *starts, config.seed, &params, false)
        }
        Command::Matroid(MatroidCommand::Check { matroid }) => matroid_check(matroid),
        Command::Exchange { oracle, x, y, dot } => exchange(oracle, x, y.as_deref(), dot.as_deref()),
        Command::Reproduce { target, out } => reproduce::run(target, out.as_deref(), config),
        Command::Property(PropertyCommand::Bidir { oracle, samples }) => bidir(oracle, *samples, config.seed),
        Command::Property(PropertyCommand::Graph { graph }) => graph_property(graph),
    }
}

fn tuned(config: &Config, damping: Option<f64>, tol: Option<f64>) -> Result<SolverParams, Failure> {
    let mut p = config.params;
    if let Some(d) = damping {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Failure::input("invalid_flag", format!("--damping must lie in (0, 1], got {d}")));
        }
        p.damping = d;
    }
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::input("invalid_flag", format!("--tol must be positive, got {t}")));
        }
        p.verify_tol = t;
    }
    Ok(p)
}

pub fn read_game(path: &Path) -> Result<Game, Failure> {
    Ok(Game::from_json(&read_json(path)?)?)
}

fn multi_start(path: &Path, starts: usize, seed: u64, params: &SolverParams, reports: bool) -> Result<Report, Failure> {
    if starts == 0 {
        return Err(Failure::input("invalid_flag", "--starts must be positive"));
    }
    let game = read_game(path)?;
    let initial = random_starts(&game, starts, seed)?;
    let result = probe_multiplicity(&game, &initial, params);
    if result.equilibria.is_empty() {
        let reasons: Vec<&str> = result.failures.iter().map(|(_, e)| e.as_str()).collect();
        return Err(Failure::NoConvergence(format!("no start converged: {}", reasons.join("; "))));
    }
    let mut doc = result.to_json(&game);
    doc["seed"] = json!(seed);
    doc["starts"] = json!(starts);
    if reports {
        for (k, p) in result.equilibria.iter().enumerate() {
            doc["equilibria"][k]["report"] = serde_json::to_value(is_equilibrium(&game, p, params.verify_tol)?)
                .expect("report serializes");
        }
    }
    Ok(Report::ok(doc))
}

fn verify(game_path: &Path, profile_path: &Path, tol: f64) -> Result<Report, Failure> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::input("invalid_flag", format!("--tol must be positive, got {tol}")));
    }
    let game = read_game(game_path)?;
    let profile = StrategyProfile::from_json(&game, &read_json(profile_path)?)?;
    let report = match is_equilibrium(&game, &profile, tol) {
        Ok(r) => r,
        Err(polygame_core::Error::InfeasibleProfile(message)) => {
            return Err(Failure::Infeasible { message, diagnostics: profile_diagnostics(&game, &profile) });
        }
        Err(e) => return Err(e.into()),
    };
    let positive = report.is_equilibrium;
    let mut doc = serde_json::to_value(report).expect("report serializes");
    doc["schema_version"] = json!(SCHEMA_VERSION);
    Ok(Report::verdict(doc, positive))
}

/// Per-player constraint residuals of a profile that failed the feasibility check.
fn profile_diagnostics(game: &Game, profile: &StrategyProfile) -> Value {
    let rows: Vec<Value> = game
        .players
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let x = &profile.loads[i];
            match (&p.space, &profile.distributions[i]) {
                (StrategySpace::SetSystem { .. }, Some(w)) => json!({
                    "player": p.id,
                    "demand": p.demand,
                    "weight_total": w.iter().sum::<f64>(),
                    "min_weight": w.iter().copied().fold(f64::INFINITY, f64::min),
                }),
                (StrategySpace::SetSystem { .. }, None) => json!({"player": p.id, "missing": "distribution"}),
                (StrategySpace::Polymatroid { oracle, .. }, _) => json!({
                    "player": p.id,
                    "demand": p.demand,
                    "load_total": x.total(),
                    "polytope_violation": polytope_violation(oracle, x).ok(),
                }),
            }
        })
        .collect();
    Value::Array(rows)
}

fn names(ground: &GroundSet, s: Subset) -> Vec<String> {
    ground.subset_names(s)
}

fn certificate_json(ground: &GroundSet, c: &Certificate) -> Value {
    match c {
        Certificate::Ok => json!({"ok": true}),
        Certificate::Violation { u, v, kind } => {
            json!({"ok": false, "axiom": kind, "u": names(ground, *u), "v": names(ground, *v)})
        }
    }
}

fn bijection_json(ground: &GroundSet, b: &PairBijection) -> Value {
    let map: Vec<(String, String)> =
        b.map.iter().map(|&(e, f)| (ground.name(e).to_string(), ground.name(f).to_string())).collect();
    json!({"first": names(ground, b.first), "second": names(ground, b.second), "map": map})
}

fn matroid_check(path: &Path) -> Result<Report, Failure> {
    let m = MatroidSpec::from_json(&read_json(path)?)?.build()?;
    let ground = m.ground().clone();
    let mut limits = Vec::new();
    let mut guard = |r: polygame_core::Error| {
        limits.push(r.to_string());
        Value::Null
    };
    let axioms = match m.check_axioms() {
        Ok(None) => json!({"ok": true}),
        Ok(Some(v)) => json!({"ok": false, "violation": v}),
        Err(e) => guard(e),
    };
    let polymatroid = match certify_polymatroid(&m.rank_oracle()) {
        Ok(c) => certificate_json(&ground, &c),
        Err(e) => guard(e),
    };
    let bases = match m.enumerate_bases() {
        Ok(b) => json!({"count": b.len()}),
        Err(e) => guard(e),
    };
    let orderable = match is_base_orderable(&m) {
        Ok(BaseOrderability::Orderable { bijections }) => json!({
            "orderable": true,
            "bijections": bijections.iter().map(|b| bijection_json(&ground, b)).collect::<Vec<_>>(),
        }),
        Ok(BaseOrderability::NotOrderable { first, second }) => json!({
            "orderable": false,
            "witness": {"first": names(&ground, first), "second": names(&ground, second)},
        }),
        Err(e) => guard(e),
    };
    let positive = axioms["ok"] != json!(false) && orderable["orderable"] != json!(false);
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "class": m.class(),
        "ground": ground.names(),
        "rank": m.full_rank(),
        "axioms": axioms,
        "polymatroid": polymatroid,
        "bases": bases,
        "base_orderable": orderable,
        "limits": limits,
    });
    Ok(Report::verdict(doc, positive))
}

/// Rejects oracles that are not polymatroid rank functions.
fn certified(source: &OracleSource) -> Result<SubmodularOracle, Failure> {
    let oracle = source.oracle();
    match certify_polymatroid(&oracle)? {
        Certificate::Ok => Ok(oracle),
        c => Err(Failure::input(
            "not_polymatroid",
            format!("oracle violates the polymatroid axioms: {}", certificate_json(oracle.ground(), &c)),
        )),
    }
}

fn exchange(oracle: &Path, x: &Path, y: Option<&Path>, dot: Option<&Path>) -> Result<Report, Failure> {
    let oracle = certified(&read_oracle(oracle)?)?;
    let ground = oracle.ground().clone();
    let x = load_vector_from_json(&ground, &read_json(x)?)?;
    let dx = build_directed(&oracle, &x)?;
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "x": load_vector_to_json(&x),
        "directed_graph": dx.to_json(),
    });
    let Some(y) = y else {
        if let Some(path) = dot {
            write_text(path, &dx.to_dot())?;
        }
        return Ok(Report::ok(doc));
    };
    let y = load_vector_from_json(&ground, &read_json(y)?)?;
    let dxy = build_bidirectional(&oracle, &x, &y)?;
    if let Some(path) = dot {
        write_text(path, &dxy.to_dot())?;
    }
    doc["y"] = load_vector_to_json(&y);
    doc["bidirectional_graph"] = dxy.to_json();
    let flow = directed_flow(&oracle, &x, &y)?;
    doc["directed_flow"] = flow.to_json();
    doc["directed_flow"]["balance_error"] = json!(flow.balance_error(&x, &y));
    let outcome = bidirectional_flow(&oracle, &x, &y)?;
    doc["bidirectional"] = match &outcome {
        BidirectionalOutcome::Feasible(f) => json!({"status": "feasible", "flow": f.to_json()}),
        BidirectionalOutcome::Conflicting(c) => json!({"status": "conflicting", "certificate": c}),
    };
    Ok(Report::verdict(doc, !outcome.is_conflicting()))
}

fn bidir(path: &Path, samples: usize, seed: u64) -> Result<Report, Failure> {
    let oracle = certified(&read_oracle(path)?)?;
    let config = ProbeConfig { samples, seed, ..ProbeConfig::default() };
    let report = probe_bidirectional_property(&oracle, &config)?;
    let clean = report.is_clean();
    let mut doc = serde_json::to_value(&report).expect("report serializes");
    doc["schema_version"] = json!(SCHEMA_VERSION);
    doc["ground"] = json!(oracle.ground().names());
    doc["seed"] = json!(seed);
    doc["clean"] = json!(clean);
    Ok(Report::verdict(doc, clean))
}

#[derive(Deserialize)]
struct GraphDoc {
    vertices: Vec<String>,
    edges: Vec<(String, String, String)>,
}

pub fn graph_from_json(doc: &Value) -> Result<MultiGraph, Failure> {
    polygame_core::check_schema_version(doc)?;
    let g: GraphDoc =
        serde_json::from_value(doc.clone()).map_err(|e| Failure::input("json", format!("graph: {e}")))?;
    Ok(MultiGraph::new(&g.vertices, &g.edges)?)
}

fn graph_property(path: &Path) -> Result<Report, Failure> {
    let g = graph_from_json(&read_json(path)?)?;
    let unique = polygame_core::instances::graph_uniqueness_property(&g);
    let mut limits = BTreeMap::new();
    let gsp = g.is_gsp().map_err(|e| limits.insert("gsp", e.to_string())).ok();
    let k4 = g.has_k4_minor().map_err(|e| limits.insert("k4_minor", e.to_string())).ok();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "vertices": g.vertices().len(),
        "edges": g.edges().len(),
        "unique": unique,
        "gsp": gsp,
        "k4_minor": k4,
        "limits": limits,
    });
    Ok(Report::verdict(doc, unique))
}
