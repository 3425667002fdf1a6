//! Atomic splittable polymatroid congestion games.
//!
//! The crate is organised bottom-up:
//!
//! * [`ground`] and [`polymatroid`]: ground sets, submodular oracles, base
//!   polytope membership, greedy vertices and exchange capacities.
//! * [`matroid`]: rank oracles for the classic matroid classes, base
//!   enumeration, base-orderability certificates, K4-minor detection and the
//!   laminar-to-gammoid conversion.
//! * [`exchange`]: exchange graphs `D(x)` / `D(x, y)`, directed and
//!   bidirectional flows, and the per-player diagnostic graph.
//! * [`game`]: cost functions, games, profiles, best responses and
//!   equilibrium search/verification.
//! * [`instances`]: builders for the concrete games and counterexamples.

pub mod error;
pub mod exchange;
pub mod flow;
pub mod game;
pub mod ground;
pub mod instances;
pub mod matching;
pub mod matroid;
pub mod polymatroid;

pub use error::{Error, Result};

/// Version written into every JSON document this crate produces.
pub const SCHEMA_VERSION: u32 = 1;

pub(crate) fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// Rejects documents declaring a schema version other than [`SCHEMA_VERSION`].
/// A missing field is accepted.
pub fn check_schema_version(doc: &serde_json::Value) -> Result<()> {
    match doc.get("schema_version") {
        None => Ok(()),
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION as u64) => Ok(()),
        Some(v) => Err(Error::InvalidSpec(format!("unsupported schema_version {v}"))),
    }
}

pub use exchange::{
    bidirectional_flow, build_bidirectional, build_diagnostic, build_directed, directed_flow,
    probe_bidirectional_property, BidirectionalOutcome, CutCertificate, DiagnosticGraph,
    ExchangeGraph, Flow, GraphKind, ProbeConfig, ProbeReport,
};
pub use game::{
    best_response, find_equilibrium, is_equilibrium, marginal_cost, probe_multiplicity,
    random_profile, total_cost, CostFunction, EquilibriumReport, Game, MultiplicityReport, Player,
    SolverParams, StrategyProfile, StrategySpace,
};
pub use ground::{GroundSet, LoadVector, Subset};
pub use matroid::{GammoidSpec, LaminarFamily, Matroid, MatroidClass, MultiGraph};
pub use polymatroid::{
    certify_polymatroid, exchange_capacity, greedy_vertex, in_base_polytope, minimize_linear,
    Axiom, Certificate, SubmodularOracle, DEFAULT_TOL,
};
