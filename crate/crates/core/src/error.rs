use thiserror::Error;

use crate::rule::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid recurrence: {0}")]
    InvalidRecurrence(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("label {0} is referenced but has no production")]
    MissingProduction(Label),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("production matrix requires a jump-free rule; {0} has a jump > 1")]
    JumpsPresent(Label),

    #[error("tree has more than {0} nodes")]
    NodeBudgetExceeded(usize),

    #[error("mark elimination needs a_1 >= 1, got a_1 = {0}")]
    A1NotPositive(i64),

    #[error("invalid q assignment: {0}")]
    InvalidQ(String),

    #[error("operation requires default initial conditions")]
    DefaultInitsRequired,

    #[error("operation requires explicit initial conditions")]
    ExplicitInitsRequired,

    #[error("the default-initial-condition core has no positivity witness")]
    CoreNotPositive,

    #[error("initial prefix cannot be eliminated: {0}")]
    PrefixNotEliminable(String),

    #[error("negative multiplicity {multiplicity} for label ({label}) in schema {schema}")]
    NegativeMultiplicity { label: i64, schema: usize, multiplicity: i64 },

    #[error("level-indexed rule places label ({label}) at level {level}")]
    LevelMismatch { label: i64, level: usize },

    #[error("coefficient polynomial p_{index} does not take integer values: {detail}")]
    NonIntegerEvaluation { index: usize, detail: String },

    #[error("coefficient polynomial p_{0} is not affine")]
    NonAffineCoefficient(usize),
}
