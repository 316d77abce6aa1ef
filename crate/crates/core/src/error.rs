use thiserror::Error;

use crate::gluing::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid gluing data:\n{0}")]
    InvalidGluing(ValidationReport),

    #[error("refused: {0}")]
    Refused(String),

    #[error("brute force refused: {vertices} vertices exceeds the limit of {limit}")]
    BruteForceLimit { vertices: usize, limit: usize },

    #[error(
        "vertex budget exceeded: level {level} would have {projected} vertices \
         (m^n * |V(G0)| = {naive}), budget is {budget}"
    )]
    VertexBudget {
        level: usize,
        projected: u128,
        naive: u128,
        budget: u128,
    },

    #[error("degree budget exceeded: level {level} may reach degree {projected}, budget is {budget}")]
    DegreeBudget {
        level: usize,
        projected: u128,
        budget: u128,
    },

    #[error("internal error: inexact division by lambda^{power} in term {term}")]
    InexactDivision { power: usize, term: String },

    #[error("marks collide after gluing: labels {0} and {1} land on the same vertex")]
    MarkCollision(usize, usize),

    #[error("chart breakdown: |(0)| = {modulus:e} relative to max modulus")]
    ChartBreakdown { modulus: f64 },

    #[error("indeterminacy point: image of the projective map is numerically zero")]
    Indeterminacy,

    #[error("lambda must be nonzero")]
    ZeroLambda,

    #[error("unknown catalog entry {name:?}; known entries: {}", known.join(", "))]
    UnknownCatalog { name: String, known: Vec<String> },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cannot find the roots of the zero polynomial")]
    ZeroPolynomial,

    #[error("root finder did not converge after the precision ladder; stuck root indices {0:?}")]
    RootsStuck(Vec<usize>),

    #[error("need at least {needed} usable points for the fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Refusals caused by a size or degree budget, as opposed to bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::BruteForceLimit { .. } | Error::VertexBudget { .. } | Error::DegreeBudget { .. }
        )
    }
}
