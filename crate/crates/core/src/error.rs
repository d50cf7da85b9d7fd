use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("operation requires exact (rational) coefficients")]
    NotExact,
    #[error("the zero polynomial has no isolated roots")]
    ZeroPolynomial,
    #[error("not a cubic: leading coefficient is zero")]
    NotCubic,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("boundary law is singular: denominator {0:e} vanishes")]
    SingularLaw(f64),
    #[error("window needs {needed} table entries, budget is {budget}")]
    BudgetExceeded { needed: f64, budget: u64 },
    #[error("counts agree at both ends ({0}); no transition to refine")]
    NoTransition(usize),
    #[error("parameters differ between the compared boundary laws")]
    MismatchedParameters,
}

pub type Result<T> = std::result::Result<T, Error>;
