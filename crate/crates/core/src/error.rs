use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("integration failed at x = {at}: {reason}")]
    IntegrationFailure { at: f64, reason: String },

    /// The Euler kernel denominator |p~'(v)| - eps^2 r^{-2(n-1)} is not positive.
    #[error("supersonic state at r = {r} (kernel denominator {denominator:e})")]
    Supersonic { r: f64, denominator: f64 },

    #[error("iterate left the admissible ball: sup|eta| = {sup} >= {bound}")]
    Divergence { sup: f64, bound: f64 },

    #[error("smallness violated: update norm grew for {sweeps} consecutive sweeps (last {last:e})")]
    SmallnessViolation { sweeps: usize, last: f64 },

    #[error("no convergence after {iterations} iterations (last update {last:e})")]
    NoConvergence { iterations: usize, last: f64 },

    #[error("vacuum: specific volume {v} at r = {r}")]
    Vacuum { r: f64, v: f64 },

    #[error("invalid regime: {0}")]
    InvalidRegime(String),

    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("at mu = {mu}: {source}")]
    AtMu {
        mu: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn at_mu(self, mu: f64) -> Self {
        Error::AtMu {
            mu,
            source: Box::new(self),
        }
    }
}
