use thiserror::Error;

/// Errors surfaced by profile construction, evaluation and verification.
#[derive(Debug, Error)]
pub enum CkemError {
    #[error("inadmissible model: {}", .0.join(", "))]
    Inadmissible(Vec<String>),

    #[error("{0}")]
    Domain(String),

    #[error("unknown formula id `{0}`")]
    UnknownFormula(String),

    #[error("case {0} needs a finite {1} endpoint")]
    NeedsFiniteEndpoint(&'static str, &'static str),

    #[error("quadrature did not converge: estimated relative error {achieved:.3e} > {accept:.3e}")]
    QuadratureAccuracy { achieved: f64, accept: f64 },

    #[error("integrand pole inside the integration path near x = {0}")]
    IntegrandPole(f64),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("matrix is not positive definite (momentum positivity conditions violated)")]
    NotPositiveDefinite,

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("no Hamiltonian reduction exists for r > 1 with nu != 0")]
    NoReduction,

    #[error("divergent quantity at {0}")]
    Divergent(String),
}

pub type Result<T> = std::result::Result<T, CkemError>;
