use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u64),
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("points must be distinct")]
    EqualPoints,
    #[error("fiber condition violated: log y = {log_y}, tree height = {tree_height}")]
    FiberViolation { log_y: f64, tree_height: f64 },
    #[error("resource budget exceeded: {what} (limit {limit})")]
    BudgetExceeded { what: &'static str, limit: usize },
    #[error("invalid piecewise-linear map: {0}")]
    InvalidMap(String),
    #[error("identity map has no dynamics to classify")]
    IdentityMap,
    #[error("map is not in the required class: {0}")]
    WrongClass(String),
    #[error("quasihomomorphism axiom violated: {0}")]
    AxiomViolation(String),
    #[error("malformed cover: {0}")]
    MalformedCover(String),
    #[error("optimizer did not converge; best bracket [{lo}, {hi}]")]
    NonConvergence { lo: f64, hi: f64 },
    #[error("parameter constraint violated: {0}")]
    Constraint(String),
    #[error("singular matrix")]
    Singular,
    #[error("digit expansion exceeds {0} digits")]
    ExpansionTooLong(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
