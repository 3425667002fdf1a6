//! Game and profile documents.
//!
//! ```json
//! {"schema_version": 1, "ground": ["e", "f", "g"],
//!  "players": [{"id": "1", "demand": 1.0,
//!               "space": {"kind": "set_system", "sets": [["e"], ["f", "g"]]},
//!               "costs": {"e": {"poly": [0, 0, 0, 1]}, "f": {"poly": [1, 1]}, "g": {"poly": [1, 1]}}}]}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{CostFunction, Game, MultiplicityReport, Player, StrategyProfile, StrategySpace};
use crate::error::{Error, Result};
use crate::ground::{GroundSet, LoadVector};
use crate::matroid::MatroidSpec;
use crate::polymatroid::SubmodularOracle;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameSpec {
    #[serde(default = "crate::schema_version")]
    pub schema_version: u32,
    pub ground: Vec<String>,
    pub players: Vec<PlayerSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub id: String,
    pub demand: f64,
    pub space: SpaceSpec,
    /// Elements the player cannot use may be omitted; they cost nothing.
    #[serde(default)]
    pub costs: BTreeMap<String, CostFunction>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    SetSystem {
        sets: Vec<Vec<String>>,
    },
    /// Base polytope of `scale * rank`; `scale` defaults to the demand.
    Matroid {
        #[serde(flatten)]
        matroid: MatroidSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
    },
    /// Explicit value table, see [`SubmodularOracle::from_table_json`].
    Polymatroid {
        oracle: Value,
    },
}

impl SpaceSpec {
    fn build(&self, ground: &GroundSet, demand: f64) -> Result<StrategySpace> {
        match self {
            Self::SetSystem { sets } => {
                let sets = sets.iter().map(|s| ground.subset(s)).collect::<Result<_>>()?;
                Ok(StrategySpace::SetSystem { sets })
            }
            Self::Matroid { matroid, scale } => {
                let rank = matroid.build()?.rank_oracle().extend_to(ground)?;
                let scale = scale.unwrap_or(demand);
                if !(scale.is_finite() && scale >= 0.0) {
                    return Err(Error::InvalidSpec(format!("matroid scale {scale} must be nonnegative")));
                }
                Ok(StrategySpace::Polymatroid { oracle: rank.scale(scale), source: Some(serde_json::to_value(self)?) })
            }
            Self::Polymatroid { oracle } => {
                let o = SubmodularOracle::from_table_json(oracle)?.extend_to(ground)?;
                Ok(StrategySpace::Polymatroid { oracle: o, source: Some(serde_json::to_value(self)?) })
            }
        }
    }
}

impl Game {
    pub fn from_spec(spec: &GameSpec) -> Result<Game> {
        let ground = GroundSet::new(spec.ground.iter().cloned())?;
        let mut players = Vec::with_capacity(spec.players.len());
        for p in &spec.players {
            let space = p.space.build(&ground, p.demand)?;
            let mut costs = vec![None; ground.len()];
            for (name, c) in &p.costs {
                costs[ground.index_of(name)?] = Some(c.clone());
            }
            let draft = Player { id: p.id.clone(), demand: p.demand, space, costs: vec![] };
            let usable = draft.usable();
            let costs = costs
                .into_iter()
                .enumerate()
                .map(|(e, c)| match c {
                    Some(c) => Ok(c),
                    None if usable.contains(e) => Err(Error::InvalidSpec(format!(
                        "player {}: no cost for usable element {:?}",
                        p.id,
                        ground.name(e)
                    ))),
                    None => Ok(CostFunction::zero()),
                })
                .collect::<Result<_>>()?;
            players.push(Player { costs, ..draft });
        }
        Game::new(ground, players)
    }

    pub fn from_json(doc: &Value) -> Result<Game> {
        crate::check_schema_version(doc)?;
        Game::from_spec(&serde_json::from_value(doc.clone())?)
    }

    pub fn to_spec(&self) -> Result<GameSpec> {
        let mut players = Vec::with_capacity(self.players.len());
        for p in &self.players {
            let space = match &p.space {
                StrategySpace::SetSystem { sets } => {
                    SpaceSpec::SetSystem { sets: sets.iter().map(|s| self.ground.subset_names(*s)).collect() }
                }
                StrategySpace::Polymatroid { source: Some(src), .. } => serde_json::from_value(src.clone())?,
                StrategySpace::Polymatroid { oracle, source: None } => {
                    SpaceSpec::Polymatroid { oracle: oracle.to_table_json()? }
                }
            };
            let usable = p.usable();
            let costs = p
                .costs
                .iter()
                .enumerate()
                .filter(|(e, c)| usable.contains(*e) || !c.is_zero())
                .map(|(e, c)| (self.ground.name(e).to_string(), c.clone()))
                .collect();
            players.push(PlayerSpec { id: p.id.clone(), demand: p.demand, space, costs });
        }
        Ok(GameSpec { schema_version: crate::SCHEMA_VERSION, ground: self.ground.names().to_vec(), players })
    }

    pub fn to_json(&self) -> Result<Value> {
        Ok(serde_json::to_value(self.to_spec()?)?)
    }
}

#[derive(Deserialize)]
struct WeightedSet {
    set: Vec<String>,
    weight: f64,
}

#[derive(Deserialize)]
struct ProfileDoc {
    #[serde(default)]
    loads: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    distributions: BTreeMap<String, Vec<WeightedSet>>,
}

impl StrategyProfile {
    /// Reads a profile document. Set-system players need `distributions`;
    /// their loads are derived from it. Polymatroid players need `loads`.
    /// Feasibility is not checked here.
    pub fn from_json(game: &Game, doc: &Value) -> Result<StrategyProfile> {
        crate::check_schema_version(doc)?;
        let doc: ProfileDoc = serde_json::from_value(doc.clone())?;
        for id in doc.loads.keys().chain(doc.distributions.keys()) {
            game.player_index(id)?;
        }
        let mut loads = Vec::with_capacity(game.players.len());
        let mut distributions = Vec::with_capacity(game.players.len());
        for (i, p) in game.players.iter().enumerate() {
            match &p.space {
                StrategySpace::SetSystem { sets } => {
                    let entries = doc.distributions.get(&p.id).ok_or_else(|| {
                        Error::InfeasibleProfile(format!("player {}: missing distribution", p.id))
                    })?;
                    let mut w = vec![0.0; sets.len()];
                    for entry in entries {
                        let s = game.ground.subset(&entry.set)?;
                        let k = sets.iter().position(|t| *t == s).ok_or_else(|| {
                            Error::InfeasibleProfile(format!("player {}: {:?} is not an allowable set", p.id, entry.set))
                        })?;
                        w[k] += entry.weight;
                    }
                    let induced = game.induced_load(i, &w)?;
                    if let Some(given) = doc.loads.get(&p.id) {
                        let given = named_loads(&game.ground, given)?;
                        let gap = given.max_abs_diff(&induced);
                        if gap > 1e-6 {
                            return Err(Error::InfeasibleProfile(format!(
                                "player {}: loads differ from the distribution by {gap}",
                                p.id
                            )));
                        }
                    }
                    loads.push(induced);
                    distributions.push(Some(w));
                }
                StrategySpace::Polymatroid { .. } => {
                    let given = doc
                        .loads
                        .get(&p.id)
                        .ok_or_else(|| Error::InfeasibleProfile(format!("player {}: missing loads", p.id)))?;
                    loads.push(named_loads(&game.ground, given)?);
                    distributions.push(None);
                }
            }
        }
        Ok(StrategyProfile { loads, distributions })
    }

    pub fn to_json(&self, game: &Game) -> Value {
        let mut loads = serde_json::Map::new();
        let mut dists = serde_json::Map::new();
        for (i, p) in game.players.iter().enumerate() {
            let row: serde_json::Map<String, Value> =
                self.loads[i].named().into_iter().map(|(n, v)| (n, json!(v))).collect();
            loads.insert(p.id.clone(), Value::Object(row));
            if let (StrategySpace::SetSystem { sets }, Some(w)) = (&p.space, &self.distributions[i]) {
                let entries: Vec<Value> = sets
                    .iter()
                    .zip(w)
                    .map(|(s, w)| json!({"set": game.ground.subset_names(*s), "weight": w}))
                    .collect();
                dists.insert(p.id.clone(), Value::Array(entries));
            }
        }
        json!({"schema_version": crate::SCHEMA_VERSION, "loads": loads, "distributions": dists})
    }
}

fn named_loads(ground: &GroundSet, row: &BTreeMap<String, f64>) -> Result<LoadVector> {
    let pairs: Vec<(&str, f64)> = row.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    LoadVector::from_pairs(ground, &pairs)
}

impl MultiplicityReport {
    pub fn to_json(&self, game: &Game) -> Value {
        let aggregate = |p: &StrategyProfile| -> BTreeMap<String, f64> {
            game.ground.names().iter().cloned().zip(p.aggregate()).collect()
        };
        json!({
            "schema_version": crate::SCHEMA_VERSION,
            "equilibria": self.equilibria.iter().map(|p| json!({
                "profile": p.to_json(game),
                "aggregate": aggregate(p),
            })).collect::<Vec<_>>(),
            "count": self.equilibria.len(),
            "distinct_aggregates": self.distinct_aggregates,
            "start_class": self.start_class,
            "failures": self.failures.iter().map(|(k, e)| json!({"start": k, "error": e})).collect::<Vec<_>>(),
        })
    }
}
