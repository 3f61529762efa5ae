use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported Bessel order {0}: only integer and half-integer orders >= 0")]
    UnsupportedOrder(f64),

    #[error("no split constant c < n^2 reaches sup|Q| <= {eps0} (n = {n})")]
    EmptyInterval { n: u32, eps0: f64 },

    #[error("point lies in the excluded cap around the south pole")]
    SouthPole,

    #[error("points coincide or are antipodal")]
    CoincidentPoints,

    #[error("icosphere subdivision level {0} exceeds the limit of 9")]
    SubdivisionLimit(u32),

    #[error("reduced covariance is degenerate at theta = {theta} (min eigenvalue {eigenvalue})")]
    DegenerateOmega { theta: f64, eigenvalue: f64 },

    #[error("reduced covariance is degenerate at {} quadrature nodes, first thetas {:?}", .thetas.len(), &.thetas[..thetas.len().min(8)])]
    DegenerateNodes { thetas: Vec<f64> },

    #[error("symmetric factorization failed after jitter (pivot {pivot} at row {row})")]
    Factorization { row: usize, pivot: f64 },

    #[error("kernel Monte Carlo error {std_error} exceeds tolerance {tolerance} at theta = {theta}")]
    KernelPrecision {
        theta: f64,
        std_error: f64,
        tolerance: f64,
    },

    #[error("gradient {gradient} at a nodal segment midpoint is below 1e-9")]
    NearSingular { gradient: f64 },

    #[error("too many points for the dense field sampler: {0} > 4000")]
    TooManyPoints(usize),

    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
