//! Covariance matrices of Gaussian states and their symplectic invariants.
//!
//! Conventions: quadratures q = (b + b†)/√2, p = i(b† − b)/√2, so the vacuum
//! covariance matrix is ½·I. Physicality is V + (i/2)Ω ⪰ 0, equivalently all
//! symplectic eigenvalues ≥ ½.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Bosonic modes tracked by this artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeLabel {
    /// Feedback-modified cavity mode.
    Cavity,
    /// Mechanical resonator driven near its blue sideband.
    Mech1,
    /// Mechanical resonator driven near its red sideband.
    Mech2,
}

/// Quadrature slots in the canonical full-system ordering (X, Y, q₁, p₁, q₂, p₂).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quad {
    CavX = 0,
    CavY = 1,
    MechQ1 = 2,
    MechP1 = 3,
    MechQ2 = 4,
    MechP2 = 5,
}

impl Quad {
    pub fn index(self) -> usize {
        self as usize
    }
}

/// Canonical mode order of the full 6×6 system.
pub const FULL_SYSTEM: [ModeLabel; 3] = [ModeLabel::Cavity, ModeLabel::Mech1, ModeLabel::Mech2];

/// Mechanical pair, the subsystem all measures operate on.
pub const MECHANICAL: [ModeLabel; 2] = [ModeLabel::Mech1, ModeLabel::Mech2];

/// Symmetry defect allowed before a matrix is rejected as non-symmetric,
/// relative to its Frobenius norm.
const SYMMETRY_RTOL: f64 = 1e-12;

/// Absolute slack below ½ allowed for symplectic eigenvalues.
const PHYSICALITY_ATOL: f64 = 1e-9;

/// Scale-aware slack: eigenvalues of iΩV computed in f64 carry errors that
/// grow with ‖V‖, so large strongly-squeezed covariance matrices cannot be
/// certified to the absolute tolerance alone.
const PHYSICALITY_SCALE: f64 = 2e-10;

pub(crate) fn physicality_tolerance(norm: f64) -> f64 {
    PHYSICALITY_ATOL.max(PHYSICALITY_SCALE * norm)
}

/// Real symmetric covariance matrix of one, two, or three labeled modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMat {
    mat: DMatrix<f64>,
    modes: Vec<ModeLabel>,
}

impl CovMat {
    /// Build a covariance matrix from a raw square matrix and mode labels.
    ///
    /// The matrix is symmetrized (no other projection is applied) and then
    /// checked: if the symmetry defect exceeds 1e-12 relative or the minimum
    /// symplectic eigenvalue sits below ½ beyond tolerance, the matrix is
    /// rejected rather than silently repaired.
    pub fn new(mat: DMatrix<f64>, modes: Vec<ModeLabel>) -> Result<Self> {
        let n = 2 * modes.len();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::InvalidParam(format!(
                "covariance matrix must be {n}x{n} for {} modes, got {}x{}",
                modes.len(),
                mat.nrows(),
                mat.ncols()
            )));
        }
        let norm = mat.norm();
        let defect = (&mat - mat.transpose()).norm();
        if defect > SYMMETRY_RTOL * norm.max(1.0) {
            return Err(Error::MatrixNotPhysical(format!(
                "symmetry defect {defect:e} exceeds {SYMMETRY_RTOL:e} relative"
            )));
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        let cm = CovMat { mat: sym, modes };
        cm.check_physical()?;
        Ok(cm)
    }

    /// Build without the physicality check. For internal use where the check
    /// runs separately (mid-trajectory) or the caller constructs a known form.
    pub(crate) fn new_unchecked(mat: DMatrix<f64>, modes: Vec<ModeLabel>) -> Self {
        let sym = (&mat + mat.transpose()) * 0.5;
        CovMat { mat: sym, modes }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Standard symplectic form Ω = ⊕ [[0, 1], [−1, 0]] for the labeled modes.
    pub fn symplectic_form(&self) -> DMatrix<f64> {
        symplectic_form(self.n_modes())
    }

    /// Symplectic eigenvalues, ascending: the moduli of the (paired ±iν)
    /// eigenvalues of ΩV, with degenerate pairs resolved by sorting.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        symplectic_eigenvalues(&self.mat)
    }

    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        self.symplectic_eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Physicality test: min symplectic eigenvalue ≥ ½ − tol, with tol the
    /// absolute 1e-9 floor widened proportionally to ‖V‖ for large matrices.
    pub fn is_physical(&self) -> bool {
        self.min_symplectic_eigenvalue() >= 0.5 - physicality_tolerance(self.mat.norm())
    }

    pub fn check_physical(&self) -> Result<()> {
        let nu_min = self.min_symplectic_eigenvalue();
        if nu_min < 0.5 - physicality_tolerance(self.mat.norm()) {
            return Err(Error::MatrixNotPhysical(format!(
                "min symplectic eigenvalue {nu_min} < 1/2"
            )));
        }
        Ok(())
    }

    /// Principal submatrix on the selected modes, in the order requested.
    pub fn reduce(&self, modes: &[ModeLabel]) -> Result<CovMat> {
        let mut rows = Vec::with_capacity(2 * modes.len());
        for m in modes {
            let pos = self
                .modes
                .iter()
                .position(|x| x == m)
                .ok_or_else(|| Error::BadModeLabels(format!("{m:?} not present")))?;
            rows.push(2 * pos);
            rows.push(2 * pos + 1);
        }
        let n = rows.len();
        let mut sub = DMatrix::zeros(n, n);
        for (i, &ri) in rows.iter().enumerate() {
            for (j, &rj) in rows.iter().enumerate() {
                sub[(i, j)] = self.mat[(ri, rj)];
            }
        }
        Ok(CovMat {
            mat: sub,
            modes: modes.to_vec(),
        })
    }
}

pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for j in 0..n_modes {
        om[(2 * j, 2 * j + 1)] = 1.0;
        om[(2 * j + 1, 2 * j)] = -1.0;
    }
    om
}

/// Symplectic eigenvalues of a raw symmetric matrix (ascending).
pub fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Vec<f64> {
    let n_modes = v.nrows() / 2;
    let om = symplectic_form(n_modes);
    let mut mods: Vec<f64> = (om * v)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    mods.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalue moduli are finite"));
    // Moduli come in ±iν pairs; keep one representative per pair.
    mods.into_iter().step_by(2).collect()
}
