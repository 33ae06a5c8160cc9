use thiserror::Error;

/// Errors raised by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid curve parameters: {0}")]
    InvalidParams(String),

    #[error("{what} did not converge within {budget} refinements")]
    Convergence { what: &'static str, budget: usize },

    #[error("{what}: quadrature and closed form disagree (relative difference {rel:e})")]
    Disagreement { what: &'static str, rel: f64 },

    #[error("theta series overflow at |Im u| = {0}")]
    Overflow(f64),

    #[error("theta denominator vanishes: |H| = {0:e}")]
    DenominatorVanishing(f64),

    #[error("squared amplitude is not real: relative imaginary part {0:e}")]
    RealityViolation(f64),

    #[error("complex initial phase fails the reality condition")]
    ComplexPhaseRejected,

    #[error("initial data under-resolved: spectral tail ratio {0:e}")]
    UnderResolved(f64),

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("fit did not converge: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
