use super::CostFunction;
use crate::error::{Error, Result};
use crate::ground::{GroundSet, LoadVector, Subset};
use crate::polymatroid::{certify_polymatroid, polytope_violation, Certificate, SubmodularOracle, CERTIFY_LIMIT};

/// Largest set system accepted for exhaustive equilibrium checks.
pub const SET_SYSTEM_LIMIT: usize = 10_000;

#[derive(Clone, Debug)]
pub enum StrategySpace {
    /// The player splits its demand over allowable subsets.
    SetSystem { sets: Vec<Subset> },
    /// The player's load vector ranges over the base polytope of `oracle`,
    /// typically `demand * rank`. `source` keeps the JSON it was built from.
    Polymatroid { oracle: SubmodularOracle, source: Option<serde_json::Value> },
}

impl StrategySpace {
    pub fn polymatroid(oracle: SubmodularOracle) -> Self {
        Self::Polymatroid { oracle, source: None }
    }

    pub fn is_set_system(&self) -> bool {
        matches!(self, Self::SetSystem { .. })
    }
}

#[derive(Clone, Debug)]
pub struct Player {
    pub id: String,
    pub demand: f64,
    pub space: StrategySpace,
    /// One cost per ground element.
    pub costs: Vec<CostFunction>,
}

impl Player {
    /// Elements the player can put load on.
    pub fn usable(&self) -> Subset {
        match &self.space {
            StrategySpace::SetSystem { sets } => sets.iter().fold(Subset::EMPTY, |acc, s| acc.union(*s)),
            StrategySpace::Polymatroid { oracle, .. } => {
                Subset::from_indices((0..oracle.len()).filter(|&e| oracle.value(Subset::singleton(e)) > 1e-12))
            }
        }
    }

    /// Total load the player places, summed over resources.
    pub fn total_load(&self) -> f64 {
        match &self.space {
            StrategySpace::SetSystem { .. } => self.demand,
            StrategySpace::Polymatroid { oracle, .. } => oracle.total(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Game {
    pub ground: GroundSet,
    pub players: Vec<Player>,
}

impl Game {
    pub fn new(ground: GroundSet, players: Vec<Player>) -> Result<Self> {
        let m = ground.len();
        for (k, p) in players.iter().enumerate() {
            if players[..k].iter().any(|q| q.id == p.id) {
                return Err(Error::InvalidSpec(format!("duplicate player id {:?}", p.id)));
            }
            if !(p.demand.is_finite() && p.demand >= 0.0) {
                return Err(Error::InvalidSpec(format!("player {}: demand must be nonnegative", p.id)));
            }
            if p.costs.len() != m {
                return Err(Error::InvalidSpec(format!("player {}: expected {m} costs", p.id)));
            }
            for c in &p.costs {
                c.validate()?;
            }
            match &p.space {
                StrategySpace::SetSystem { sets } => {
                    if sets.is_empty() || sets.iter().any(|s| s.is_empty()) {
                        return Err(Error::InvalidSpec(format!("player {}: allowable sets must be nonempty", p.id)));
                    }
                    if sets.len() > SET_SYSTEM_LIMIT {
                        return Err(Error::InvalidSpec(format!(
                            "player {}: more than {SET_SYSTEM_LIMIT} allowable sets",
                            p.id
                        )));
                    }
                    if sets.iter().any(|s| s.iter().any(|e| e >= m)) {
                        return Err(Error::InvalidSpec(format!("player {}: set outside the ground set", p.id)));
                    }
                }
                StrategySpace::Polymatroid { oracle, .. } => {
                    if !oracle.ground().same_as(&ground) {
                        return Err(Error::InvalidSpec(format!("player {}: oracle ground differs from game", p.id)));
                    }
                    if m <= CERTIFY_LIMIT {
                        if let Certificate::Violation { kind, .. } = certify_polymatroid(oracle)? {
                            return Err(Error::InvalidSpec(format!(
                                "player {}: oracle is not a polymatroid ({kind:?})",
                                p.id
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { ground, players })
    }

    pub fn player_index(&self, id: &str) -> Result<usize> {
        self.players
            .iter()
            .position(|p| p.id == id)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown player {id:?}")))
    }

    /// Load vector induced by a distribution over a set-system player's sets.
    pub fn induced_load(&self, i: usize, weights: &[f64]) -> Result<LoadVector> {
        let StrategySpace::SetSystem { sets } = &self.players[i].space else {
            return Err(Error::InvalidSpec(format!("player {} has no set system", self.players[i].id)));
        };
        if weights.len() != sets.len() {
            return Err(Error::InvalidSpec(format!("player {}: expected {} weights", self.players[i].id, sets.len())));
        }
        let mut x = LoadVector::zeros(&self.ground);
        for (s, w) in sets.iter().zip(weights) {
            for e in s.iter() {
                x.values_mut()[e] += w;
            }
        }
        Ok(x)
    }

    /// Pure profile: set-system player `i` puts its whole demand on set
    /// `choice[i]`. Polymatroid players get the greedy vertex of the identity order.
    pub fn pure_profile(&self, choice: &[usize]) -> Result<StrategyProfile> {
        let mut loads = Vec::new();
        let mut dists = Vec::new();
        for (i, p) in self.players.iter().enumerate() {
            match &p.space {
                StrategySpace::SetSystem { sets } => {
                    let k = *choice.get(i).ok_or_else(|| Error::InvalidSpec("one choice per player".into()))?;
                    if k >= sets.len() {
                        return Err(Error::InvalidSpec(format!("player {}: no set {k}", p.id)));
                    }
                    let mut w = vec![0.0; sets.len()];
                    w[k] = p.demand;
                    loads.push(self.induced_load(i, &w)?);
                    dists.push(Some(w));
                }
                StrategySpace::Polymatroid { oracle, .. } => {
                    let order: Vec<usize> = (0..oracle.len()).collect();
                    loads.push(crate::polymatroid::greedy_vertex(oracle, &order));
                    dists.push(None);
                }
            }
        }
        Ok(StrategyProfile { loads, distributions: dists })
    }

    /// Checks every player's strategy against its space within `tol`.
    pub fn check_profile(&self, profile: &StrategyProfile, tol: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleProfile(msg));
        if profile.loads.len() != self.players.len() || profile.distributions.len() != self.players.len() {
            return bad(format!("profile has {} players, game has {}", profile.loads.len(), self.players.len()));
        }
        for (i, p) in self.players.iter().enumerate() {
            let x = &profile.loads[i];
            if !x.ground().same_as(&self.ground) {
                return bad(format!("player {}: load vector over a different ground set", p.id));
            }
            match (&p.space, &profile.distributions[i]) {
                (StrategySpace::SetSystem { .. }, Some(w)) => {
                    if let Some(v) = w.iter().find(|v| **v < -tol) {
                        return bad(format!("player {}: negative weight {v}", p.id));
                    }
                    let total: f64 = w.iter().sum();
                    if (total - p.demand).abs() > tol {
                        return bad(format!("player {}: weights sum to {total}, demand is {}", p.id, p.demand));
                    }
                    let induced = self.induced_load(i, w)?;
                    let gap = induced.max_abs_diff(x);
                    if gap > tol {
                        return bad(format!("player {}: loads differ from the distribution by {gap}", p.id));
                    }
                }
                (StrategySpace::SetSystem { .. }, None) => {
                    return bad(format!("player {}: set-system strategy needs a distribution", p.id))
                }
                (StrategySpace::Polymatroid { oracle, .. }, _) => {
                    let v = polytope_violation(oracle, x)?;
                    if v > tol {
                        return bad(format!("player {}: outside the base polytope by {v}", p.id));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrategyProfile {
    /// `x_i` per player.
    pub loads: Vec<LoadVector>,
    /// Weights per allowable set, for set-system players.
    pub distributions: Vec<Option<Vec<f64>>>,
}

impl StrategyProfile {
    /// `x_e = sum_i x_{i,e}`.
    pub fn aggregate(&self) -> Vec<f64> {
        let m = self.loads.first().map_or(0, |x| x.len());
        let mut agg = vec![0.0; m];
        for x in &self.loads {
            for (a, v) in agg.iter_mut().zip(x.values()) {
                *a += v;
            }
        }
        agg
    }

    /// L-infinity distance between load matrices.
    pub fn distance(&self, other: &StrategyProfile) -> f64 {
        self.loads.iter().zip(&other.loads).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }

    /// L-infinity distance between aggregate loads.
    pub fn aggregate_distance(&self, other: &StrategyProfile) -> f64 {
        self.aggregate().iter().zip(other.aggregate()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}
