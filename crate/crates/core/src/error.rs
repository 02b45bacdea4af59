use thiserror::Error;

use crate::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("multiplication is not associative at ({a}, {b}, {c})")]
    NotAssociative { a: usize, b: usize, c: usize },

    #[error("element {0} has no two-sided inverse")]
    MissingInverse(usize),

    #[error("not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("subgroup is not normal: conjugating {element} by {conjugator} leaves the subgroup")]
    NotNormal { conjugator: usize, element: usize },

    #[error("maps are defined over different groups")]
    GroupMismatch,

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("map is not symmetric; symmetrize it first")]
    NotSymmetric,

    #[error("map is not a homomorphism: f({a}*{b}) != f({a})f({b})")]
    NotHomomorphism { a: usize, b: usize },

    #[error("epsilon {0} out of range")]
    EpsilonOutOfRange(Rational),

    #[error("graph is not a groupoid: {0}")]
    NotGroupoid(String),

    #[error("action is not transitive")]
    NotTransitive,

    #[error("enumeration budget of {budget} partial assignments exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed word at token {position}: {message}")]
    WordSyntax { position: usize, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A bound that the construction guarantees did not hold. Always a bug.
    #[error("invariant violated: {check}\n{report}")]
    Invariant { check: String, report: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn invariant(check: impl Into<String>, report: impl Into<String>) -> Self {
        Error::Invariant {
            check: check.into(),
            report: report.into(),
        }
    }

    /// True for violations of guaranteed bounds, as opposed to bad input.
    pub fn is_invariant_failure(&self) -> bool {
        matches!(self, Error::Invariant { .. })
    }
}
