use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by model assembly, covariance solvers, measures, and the
/// phase-space machinery.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A physical parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A coupling denominator vanished (ω ∓ Δ̃ + iκ̃ = 0).
    #[error("singular configuration: effective-coupling denominator is zero")]
    SingularConfiguration,

    /// The drift matrix is not Hurwitz, so no steady state exists.
    #[error("model is not Hurwitz: eigenvalue {re:+e}{im:+e}i has nonnegative real part")]
    UnstableModel { re: f64, im: f64 },

    /// The steady-state solver missed its residual target.
    #[error("Lyapunov solve failed: residual {residual:e} exceeds tolerance {tolerance:e}")]
    SolverFailure { residual: f64, tolerance: f64 },

    /// A trajectory point violated physicality beyond tolerance; the step
    /// needs refinement.
    #[error("integrator step too large: min symplectic eigenvalue {nu_min} at t = {t}")]
    StepTooLarge { t: f64, nu_min: f64 },

    /// A covariance matrix failed the physicality test (symplectic
    /// eigenvalue below the vacuum floor, or nonpositive determinant).
    #[error("matrix is not a physical covariance matrix: {0}")]
    MatrixNotPhysical(String),

    /// A mode label was requested that the matrix does not carry.
    #[error("bad mode labels: {0}")]
    BadModeLabels(String),

    /// The Fock-basis truncation is too coarse for the requested squeezing.
    #[error("cutoff too small: tanh(r)^(2 cutoff) = {tail:e} >= 1e-12")]
    CutoffTooSmall { tail: f64 },

    /// The optimizer ran out of its evaluation budget before any start
    /// converged.
    #[error("optimizer budget exhausted after {evals} evaluations with no converged start")]
    OptBudgetExhausted { evals: usize },
}

impl Error {
    pub(crate) fn unstable(eig: Complex64) -> Self {
        Error::UnstableModel {
            re: eig.re,
            im: eig.im,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
