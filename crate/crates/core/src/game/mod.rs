//! Atomic splittable congestion games with set-system or polymatroid
//! strategy spaces.

mod cost;
mod json;
mod model;
mod solver;

pub use cost::CostFunction;
pub use json::{GameSpec, PlayerSpec, SpaceSpec};
pub use model::{Game, Player, StrategyProfile, StrategySpace, SET_SYSTEM_LIMIT};
pub use solver::{
    best_response, find_equilibrium, is_equilibrium, marginal_cost, probe_multiplicity, random_profile,
    random_starts, total_cost, BestResponse, EquilibriumReport, MultiplicityReport, SolverParams, QUEUE_MARGIN,
};
