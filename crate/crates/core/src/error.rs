use thiserror::Error;

use crate::expr::EvalError;

/// Runtime failures of the pointwise geometry.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("cannot evaluate {what} at {point:?}: {source}")]
    Eval {
        what: String,
        point: Vec<f64>,
        source: EvalError,
    },
    #[error("singular point {point:?}: Gram condition number {condition:e}")]
    SingularPoint { point: Vec<f64>, condition: f64 },
    #[error("distribution {name} has linearly dependent fields at {point:?}")]
    DependentDistribution { name: String, point: Vec<f64> },
    #[error("unknown distribution {0:?}")]
    UnknownDistribution(String),
    #[error("{0}")]
    Precondition(String),
    #[error("zero tangent vector")]
    ZeroVector,
    #[error(
        "distributions {first} and {second} are not g-orthogonal at {point:?}: \
         g({witness}) = {value:e}"
    )]
    NotOrthogonal {
        first: String,
        second: String,
        witness: String,
        value: f64,
        point: Vec<f64>,
    },
    #[error("field is not normal at {point:?}: ‖Jᵀ N‖ = {residual:e}")]
    NotNormal { point: Vec<f64>, residual: f64 },
    #[error("sample count must be at least 1")]
    EmptySample,
    #[error("domain mostly singular: only {found} of {requested} requested points are valid")]
    DomainMostlySingular { requested: usize, found: usize },
}

pub type GeomResult<T> = Result<T, GeomError>;
