//! Numerical laboratory for two mechanical resonators coupled to a
//! feedback-modified cavity as a linear Gaussian system.
//!
//! The crate assembles the drift/diffusion model of the quadrature
//! fluctuations, solves for covariance matrices in steady state and along
//! time evolution, quantifies entanglement and two-directional EPR steering,
//! and tests phase-space Bell inequalities with displaced parity and on-off
//! detection.
//!
//! Modules follow the pipeline:
//!
//! - [`model`]: physical parameters, feedback-modified cavity quantities,
//!   drift and diffusion assembly.
//! - [`cov`]: covariance matrices, symplectic eigenvalues, physicality.
//! - [`dynamics`]: steady-state and differential Lyapunov solvers.
//! - [`measures`]: logarithmic negativity and Rényi-2 Gaussian steering.
//! - [`phasespace`]: Wigner/Husimi evaluation and Bell functionals.
//! - [`optim`]: deterministic multi-start simplex maximization.
//! - [`oracle`]: independent brute-force verifiers for the test suites.

pub mod cov;
pub mod dynamics;
pub mod error;
pub mod measures;
pub mod model;
pub mod optim;
pub mod oracle;
pub mod phasespace;

pub use cov::{CovMat, ModeLabel, Quad, FULL_SYSTEM, MECHANICAL};
pub use dynamics::{
    decoupling_defect, default_max_step, evolve_cm, evolve_cm_with_step, initial_state, is_stable,
    steady_state_cm, TrajectoryPoint,
};
pub use error::{Error, Result};
pub use measures::{
    log_negativity, log_negativity_signed, renyi2_entropy, report, steering, steering_signed,
    MeasureReport, SteeringDirection,
};
pub use model::{
    build_model, drive_amplitude, effective_cavity_params, effective_coupling, validate_regime,
    validate_regime_with, DriveConfig, LinearModel, RegimeReport, Sideband, SystemParams, HBAR,
    REGIME_THRESHOLD,
};
pub use optim::{multistart_maximize, MaxOutcome, OptConfig};
pub use phasespace::{
    bell_onoff, chsh_parity, husimi, husimi_marginal, maximize_bell, parity_expectation, wigner,
    BellKind, BellResult, BellSettings, Husimi, Wigner, TSIRELSON,
};
