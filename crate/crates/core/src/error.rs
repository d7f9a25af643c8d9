use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid root set: {0}")]
    InvalidRoots(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The query point coincides with source `index`.
    #[error("query {query} coincides with source {index}")]
    Collision { query: f64, index: usize },

    #[error("no convergence in interval {interval} after {iterations} iterations")]
    NoConvergence { interval: usize, iterations: usize },

    #[error("interval {interval} has width {width:e}, below the minimum separation")]
    DegenerateGap { interval: usize, width: f64 },

    #[error("eigenvalue iteration did not converge for index {0}")]
    Eigen(usize),

    /// Wraps an error raised while performing step `step` of a multi-step run.
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerical machinery as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NoConvergence { .. }
            | Error::DegenerateGap { .. }
            | Error::Collision { .. }
            | Error::Eigen(_)
            | Error::Degenerate(_) => true,
            Error::Step { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
