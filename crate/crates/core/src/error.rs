use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed DIMACS header: {msg}")]
    MalformedHeader { line: usize, msg: String },

    #[error("missing `p cnf` header")]
    MissingHeader,

    #[error("line {line}: invalid literal `{token}`")]
    InvalidLiteral { line: usize, token: String },

    #[error("line {line}: literal {literal} outside 1..={num_features}")]
    LiteralOutOfRange {
        line: usize,
        literal: i64,
        num_features: usize,
    },

    #[error("line {line}: empty clause makes the model trivially unsatisfiable")]
    EmptyClause { line: usize },

    #[error("mandatory list line {line}: {msg}")]
    MandatoryList { line: usize, msg: String },

    #[error("attribute table: {0}")]
    Attributes(String),

    #[error("model is unsatisfiable: feature {feature} is forced both ways")]
    Unsatisfiable { feature: u32 },

    #[error("clause set has no satisfying assignment")]
    NoSolution,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("{free} free features exceed the enumeration bound of {bound}")]
    EnumerationBound { free: usize, bound: usize },

    #[error("front file: {0}")]
    FrontFormat(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
