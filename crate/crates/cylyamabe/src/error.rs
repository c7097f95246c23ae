use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {evaluations} evaluations")]
    NotConverged {
        value: f64,
        error: f64,
        evaluations: usize,
    },
    #[error("chart breakdown: {0}")]
    ChartBreakdown(String),
    #[error("ODE step size underflow at time {0}")]
    StepUnderflow(f64),
    #[error("geodesic left the chart: {0}")]
    LeftChart(String),
    #[error("solver residual too large: {0}")]
    Residual(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("path leg failed at mu = {mu}: {source}")]
    PathLeg { mu: f64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
