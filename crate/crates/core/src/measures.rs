//! Gaussian entanglement and steering quantifiers on two-mode covariance
//! matrices, natural logarithm throughout.

use nalgebra::DMatrix;

use crate::cov::{symplectic_eigenvalues, CovMat};
use crate::error::{Error, Result};

/// Bundle of the mechanical two-mode measures at one parameter point or time.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    /// Logarithmic negativity (nats).
    pub e_n: f64,
    /// Steering mode 1 → mode 2 (nats).
    pub g12: f64,
    /// Steering mode 2 → mode 1 (nats).
    pub g21: f64,
    /// ⟨δq₁²⟩ of the reduced first mode.
    pub a: f64,
    /// ⟨δq₂²⟩ of the reduced second mode.
    pub b: f64,
    /// Both steering directions strictly positive.
    pub two_way: bool,
}

impl MeasureReport {
    pub fn csv_header() -> &'static str {
        "E_N,G12,G21,a,b,two_way"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.e_n, self.g12, self.g21, self.a, self.b, self.two_way
        )
    }
}

/// Rényi-2 entropy S(σ) = ½ ln det σ of a Gaussian state with matrix σ.
///
/// Callers pass 2V: in the vacuum-=½I convention the steering measure is
/// built from S(2V₁) and S(2V).
pub fn renyi2_entropy(sigma: &DMatrix<f64>) -> Result<f64> {
    let det = sigma.determinant();
    if det <= 0.0 {
        return Err(Error::MatrixNotPhysical(format!(
            "Renyi-2 entropy needs det > 0, got {det:e}"
        )));
    }
    Ok(0.5 * det.ln())
}

/// Steering direction for a two-mode covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteeringDirection {
    /// Mode 1 steers mode 2.
    OneToTwo,
    /// Mode 2 steers mode 1.
    TwoToOne,
}

/// Signed steering value S(2V_steerer) − S(2V) before clamping; the measure
/// itself is its positive part. Exposed so sweeps can see how far below
/// threshold a state sits.
pub fn steering_signed(v: &CovMat, dir: SteeringDirection) -> Result<f64> {
    let m = two_mode(v)?;
    let reduced = match dir {
        SteeringDirection::OneToTwo => m.view((0, 0), (2, 2)).into_owned(),
        SteeringDirection::TwoToOne => m.view((2, 2), (2, 2)).into_owned(),
    };
    let s_red = renyi2_entropy(&(reduced * 2.0))?;
    let s_full = renyi2_entropy(&(m * 2.0))?;
    Ok(s_red - s_full)
}

/// Gaussian steering measure max{0, S(2V_steerer) − S(2V)}.
pub fn steering(v: &CovMat, dir: SteeringDirection) -> Result<f64> {
    Ok(steering_signed(v, dir)?.max(0.0))
}

/// Smallest symplectic eigenvalue of the partial transpose (momentum sign
/// flip on mode 2).
pub fn ptranspose_min_eigenvalue(v: &CovMat) -> Result<f64> {
    let m = two_mode(v)?;
    let mut pt = m.clone();
    // Flip the sign of p2: negate row/column 3 off-diagonal couplings.
    for k in 0..4 {
        pt[(3, k)] = -pt[(3, k)];
        pt[(k, 3)] = -pt[(k, 3)];
    }
    Ok(symplectic_eigenvalues(&pt)
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Signed logarithmic negativity −ln(2ν̃₋) before clamping.
pub fn log_negativity_signed(v: &CovMat) -> Result<f64> {
    Ok(-(2.0 * ptranspose_min_eigenvalue(v)?).ln())
}

/// Logarithmic negativity E_N = max{0, −ln(2ν̃₋)}.
pub fn log_negativity(v: &CovMat) -> Result<f64> {
    Ok(log_negativity_signed(v)?.max(0.0))
}

/// Compute the full measure bundle for a two-mode covariance matrix.
pub fn report(v: &CovMat) -> Result<MeasureReport> {
    let m = two_mode(v)?;
    let g12 = steering(v, SteeringDirection::OneToTwo)?;
    let g21 = steering(v, SteeringDirection::TwoToOne)?;
    Ok(MeasureReport {
        e_n: log_negativity(v)?,
        g12,
        g21,
        a: m[(0, 0)],
        b: m[(2, 2)],
        two_way: g12 > 0.0 && g21 > 0.0,
    })
}

fn two_mode(v: &CovMat) -> Result<&DMatrix<f64>> {
    if v.dim() != 4 {
        return Err(Error::BadModeLabels(format!(
            "measures need a two-mode covariance matrix, got {} quadratures",
            v.dim()
        )));
    }
    Ok(v.matrix())
}
