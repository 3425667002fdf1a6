use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set has {size} elements, at most {limit} supported by this operation")]
    GroundTooLarge { size: usize, limit: usize },

    #[error("graph has {vertices} vertices and {edges} edges, at most 12 and 30 supported")]
    GraphTooLarge { vertices: usize, edges: usize },

    #[error("{count} bases exceed the limit of {limit}")]
    TooManyBases { count: usize, limit: usize },

    #[error("point is not in the base polytope (violation {violation:.3e})")]
    NotInPolytope { violation: f64 },

    #[error("no strong-exchange partner for element {element}; oracle is not submodular?")]
    ExchangeNotFound { element: String },

    #[error("strategies are conflicting: no bidirectional flow exists")]
    ConflictingStrategies,

    #[error("family is not laminar: {first:?} and {second:?} cross")]
    NotLaminar { first: Vec<String>, second: Vec<String> },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("unknown element {0:?}")]
    UnknownElement(String),

    #[error("queue overload on {element}: load {load} >= service rate {mu}")]
    QueueOverload { element: String, load: f64, mu: f64 },

    #[error("no convergence after {iterations} iterations (last measure {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("cycle length must be at least 3 and M at least 100, got k = {k}, M = {big_m}")]
    InvalidK { k: usize, big_m: f64 },

    #[error("queueing instance is unstable: {0}")]
    Unstable(String),

    #[error("set system is the base family of a matroid")]
    NotNonMatroid,

    #[error("no non-matroid witness exists for this set system")]
    WitnessNotFound,

    #[error("infeasible profile: {0}")]
    InfeasibleProfile(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
