use thiserror::Error;

use crate::model::Role;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("variable {name} has cardinality {cardinality}; at least 2 required")]
    Cardinality { name: String, cardinality: usize },
    #[error("variable {0} declared twice")]
    DuplicateVariable(String),
    #[error("more than one variable with role {0:?}")]
    RoleCount(Role),
    #[error("no variable with role {0:?}")]
    MissingRole(Role),
    #[error("invalid query: {0}")]
    Query(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum IndexError {
    #[error("assignment has {got} axes, space has {expected}")]
    Arity { expected: usize, got: usize },
    #[error("value {value} out of range on axis {axis} (cardinality {cardinality})")]
    AxisRange {
        axis: usize,
        value: usize,
        cardinality: usize,
    },
    #[error("offset {offset} out of range (size {total})")]
    Offset { offset: usize, total: usize },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvidenceError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("family {family}: table has {got} cells, expected {expected}")]
    TableSize {
        family: String,
        expected: usize,
        got: usize,
    },
    #[error("incomplete family {family}: {missing} cell(s) missing")]
    Incomplete { family: String, missing: usize },
    #[error("family {family}: duplicate cell {cell:?}")]
    DuplicateCell { family: String, cell: Vec<usize> },
    #[error("families {0} and {1} have the same kind and conditioning pattern")]
    DuplicateFamily(String, String),
    #[error("family {family}: probability {value} outside [0, 1]")]
    OutOfRange { family: String, value: f64 },
    #[error("family {family} does not sum to 1 (residual {residual:.3e})")]
    Normalization { family: String, residual: f64 },
    #[error("families {first} and {second} disagree on shared marginals (residual {residual:.3e})")]
    CrossFamily {
        first: String,
        second: String,
        residual: f64,
    },
    #[error("{0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BuildError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("family {0} conditions on several covariates; use the joint-covariate program")]
    JointFamily(String),
    #[error("{query} needs P(x, y) for its conditioning cell but no observational family is available")]
    MissingNormalizer { query: String },
    #[error("{query} conditions on an event of probability zero")]
    UndefinedConditional { query: String },
    #[error("aggregate box {index} has lower {lo} > upper {hi}")]
    Interval { index: usize, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolveError {
    #[error("program has bilinear constraints; use the branch-and-bound solver")]
    NotLinear,
    #[error("internal solver error: {0}")]
    Internal(String),
    #[error(transparent)]
    Build(#[from] BuildError),
}
