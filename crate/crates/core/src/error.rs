use crate::geometry::GridPos;
use thiserror::Error;

pub type Result<T, E = HmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HmError {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("map error: {0}")]
    Map(String),

    #[error("unknown substrate {0:?}")]
    UnknownSubstrate(String),

    #[error("unknown scenario {id} for substrate {substrate}")]
    UnknownScenario { substrate: String, id: u32 },

    #[error("scenario catalog error: {0}")]
    Catalog(String),

    #[error(transparent)]
    Literal(#[from] crate::literal::ParseError),

    #[error(transparent)]
    Plan(#[from] crate::plan::PlanError),

    #[error(transparent)]
    Planner(#[from] crate::planner::PlannerError),

    #[error(transparent)]
    Reasoner(#[from] crate::reasoner::ReasonerError),

    #[error("observation text error: {0}")]
    Observation(String),

    #[error("controller for player {player} failed: {message}")]
    Controller { player: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("no entity at {0}")]
    NoEntity(GridPos),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
