use std::path::PathBuf;

use crate::rational::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the domain an operation accepts.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("processing times must be positive (job {job} has {value})")]
    NonPositiveTime { job: usize, value: Rational },

    #[error("optimal cost must be positive, got {0}")]
    NonPositiveOpt(Rational),

    /// ALG < OPT can only come from a simulator or cost-model bug.
    #[error("internal consistency: algorithm cost {alg} is below optimum {opt}")]
    BelowOptimum { alg: Box<Rational>, opt: Box<Rational> },

    #[error("malformed LP: {0}")]
    MalformedLp(String),

    #[error("support size k = {k} exceeds buy cost B = {budget}; robustness below the feasible threshold")]
    SupportExceedsBudget { k: u64, budget: u64 },

    #[error("policy completed no job before time {0}")]
    Starvation(Rational),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
