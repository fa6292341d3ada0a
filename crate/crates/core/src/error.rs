use thiserror::Error;

/// Errors raised by model construction, operators, solvers and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("degenerate quadratic coefficient: b = {b:e} cannot be certified non-zero (tail bound {tail:e})")]
    DegenerateQuadratic { b: f64, tail: f64 },

    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("remainder Ψ′_{m} evaluated at η = {eta:e}, outside |η| ≤ m·δ* = {limit:e}")]
    OutOfDomain { m: usize, eta: f64, limit: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("singular multiplier: non-finite value at k = {k}")]
    SingularMultiplier { k: f64 },

    #[error("lattice is not Type I: {0}")]
    NotTypeOne(String),

    #[error("ℬ_ε multiplier certification failed at ε = {eps}: min {min:e} below ½|λ″(0)| = {bound:e}")]
    Certification { eps: f64, min: f64, bound: f64 },

    #[error("invalid dispersion target: {0}")]
    InvalidTarget(String),

    #[error("linear solver stagnated after {iterations} iterations (relative residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("contraction failed at iteration {iteration}: ‖V_n‖ = {norm:e} exceeds divergence bound {bound:e}")]
    ContractionFailure { iteration: usize, norm: f64, bound: f64 },

    #[error("no convergence after {iterations} iterations (last increment {increment:e})")]
    NonConvergence { iterations: usize, increment: f64 },

    #[error("Petviashvili oracle failed at iteration {iteration}: {reason}")]
    OracleFailure { iteration: usize, reason: String },

    #[error("strain domain violated at site {site}, range {m}: η = {eta:e}")]
    StrainDomain { site: usize, m: usize, eta: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
