use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid order {0}: composition needs p >= 1")]
    InvalidOrder(usize),
    #[error("composition coefficients have vanishing imaginary denominators")]
    DegenerateCoefficients,
    #[error("stage equations did not converge after {iterations} Newton iterations (residual {residual:e})")]
    StageSolveFailure { residual: f64, iterations: usize },
    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("I - zA is singular at z = {re} + {im}i")]
    PoleAtZ { re: f64, im: f64 },
    #[error("no exit from the stability region on [-100, 0]")]
    UnboundedOnAxis,
    #[error("problem `{0}` has no Taylor-jet right-hand side")]
    UnsupportedProblem(String),
    #[error("Pade denominator vanishes on the quadrature contour")]
    PoleOnContour,
    #[error("Gauss-Laguerre root finder failed for N = {0}")]
    QuadratureFailure(usize),
    #[error("argument {0} is outside the domain of the principal Lambert W branch")]
    OutOfDomain(f64),
    #[error("first integral undefined at state {0:?}")]
    InvariantUndefined(Vec<f64>),
    #[error("problem `{0}` has no first integral")]
    NoInvariant(String),
    #[error("step size pinned at tau_min for {steps} consecutive steps near t = {t}")]
    StiffnessStall { t: f64, steps: usize },
    #[error("malformed trace: {0}")]
    BadTrace(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
