use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("variable lists differ: {left} vs {right}")]
    VarMismatch { left: String, right: String },
    #[error("unknown series variable `{0}`")]
    UnknownVar(String),
    #[error("duplicate series variable `{0}`")]
    DuplicateVar(String),
    #[error("constant term must be {expected} for {op}, found {found}")]
    ConstantTerm {
        op: &'static str,
        expected: &'static str,
        found: String,
    },
    #[error("series is not even in `{0}`")]
    NotEven(String),
    #[error("term with `{var}` exponent {exp} is not divisible by {var}^{by}")]
    NotDivisible { var: String, exp: u32, by: u32 },
    #[error("exponent vector {0:?} is outside the truncation bounds")]
    OutOfRange(Vec<u32>),
    #[error("differential polynomial is not a total x-derivative: {0}")]
    NotTotalDerivative(String),
    #[error("gradient fails the Helmholtz self-adjointness test")]
    NotVariational,
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("linear system is underdetermined ({dimension} free directions)")]
    Underdetermined { dimension: usize, basis: Vec<String> },
    #[error("computation paths disagree: {0}")]
    PathDisagreement(String),
    #[error("quotient is not a function of the product: nonzero coefficient at {0:?}")]
    NotProductFunction(Vec<u32>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
