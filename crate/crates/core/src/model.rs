//! Physical parameters and assembly of the linearized drift/diffusion model.
//!
//! The system is a cavity mode (decay rates κ₁, κ₂ through the two mirrors,
//! modified by a coherent feedback loop with beamsplitter reflectivity r_B and
//! phase θ) coupled to two mechanical resonators through effective couplings
//! G₁ (blue sideband) and G₂ (red sideband). All rates are angular (rad/s).

use nalgebra::{DMatrix, Matrix6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cov::Quad;
use crate::error::{Error, Result};

/// Reduced Planck constant (J·s). Only `drive_amplitude` carries units where
/// this matters; the linearized model itself is fully specified by rates.
pub const HBAR: f64 = 1.0545718e-34;

/// All physical inputs of the linearized model.
///
/// JSON keys match the field names below exactly; unknown keys are an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Cavity decay rate through mirror 1 (rad/s).
    pub kappa1: f64,
    /// Cavity decay rate through mirror 2 (rad/s).
    pub kappa2: f64,
    /// Feedback beamsplitter reflectivity, 0 ≤ r_B < 1.
    #[serde(rename = "r_B")]
    pub r_b: f64,
    /// Feedback loop phase (rad).
    pub theta: f64,
    /// Detuning fed to the feedback relation (rad/s); includes the static
    /// optomechanical shift.
    #[serde(rename = "Delta")]
    pub delta: f64,
    /// Effective optomechanical coupling magnitude, blue sideband (rad/s).
    #[serde(rename = "G1")]
    pub g1: f64,
    /// Effective optomechanical coupling magnitude, red sideband (rad/s).
    #[serde(rename = "G2")]
    pub g2: f64,
    /// Mechanical damping rate of resonator 1 (rad/s).
    pub gamma1: f64,
    /// Mechanical damping rate of resonator 2 (rad/s).
    pub gamma2: f64,
    /// Mean thermal phonon number of bath 1.
    pub nbar1: f64,
    /// Mean thermal phonon number of bath 2.
    pub nbar2: f64,
    /// Mechanical frequency 1 (rad/s); used for regime validation only.
    pub omega1: f64,
    /// Mechanical frequency 2 (rad/s); used for regime validation only.
    pub omega2: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("G1", self.g1),
            ("G2", self.g2),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} = {v} must be >= 0")));
            }
        }
        if !(0.0..1.0).contains(&self.r_b) {
            return Err(Error::InvalidParam(format!(
                "r_B = {} must satisfy 0 <= r_B < 1",
                self.r_b
            )));
        }
        for (name, v) in [("nbar1", self.nbar1), ("nbar2", self.nbar2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam(format!("{name} = {v} must be >= 0")));
            }
        }
        if !self.theta.is_finite() || !self.delta.is_finite() {
            return Err(Error::InvalidParam("theta and Delta must be finite".into()));
        }
        Ok(())
    }

    /// Parse from a JSON document. Unknown keys fail fast against typos.
    pub fn from_json(doc: &str) -> Result<Self> {
        let p: SystemParams = serde_json::from_str(doc)
            .map_err(|e| Error::InvalidParam(format!("config parse error: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    /// Feedback-modified cavity decay rate and detuning (κ̃, Δ̃).
    pub fn effective_cavity(&self) -> Result<(f64, f64)> {
        effective_cavity_params(self.kappa1, self.kappa2, self.r_b, self.theta, self.delta)
    }
}

/// Feedback-modified cavity parameters:
/// κ̃ = κ₁ + κ₂ − 2√(κ₁κ₂) r_B cosθ,  Δ̃ = Δ − 2√(κ₁κ₂) r_B sinθ.
///
/// κ̃ ≥ 0 is guaranteed for r_B < 1 since 2√(κ₁κ₂) ≤ κ₁ + κ₂.
pub fn effective_cavity_params(
    kappa1: f64,
    kappa2: f64,
    r_b: f64,
    theta: f64,
    delta: f64,
) -> Result<(f64, f64)> {
    if kappa1 < 0.0 || kappa2 < 0.0 {
        return Err(Error::InvalidParam(
            "cavity decay rates must be >= 0".into(),
        ));
    }
    if !(0.0..1.0).contains(&r_b) {
        return Err(Error::InvalidParam(format!(
            "r_B = {r_b} must satisfy 0 <= r_B < 1"
        )));
    }
    let feed = 2.0 * (kappa1 * kappa2).sqrt() * r_b;
    let kappa_eff = kappa1 + kappa2 - feed * theta.cos();
    let delta_eff = delta - feed * theta.sin();
    Ok((kappa_eff.max(0.0), delta_eff))
}

/// Drive amplitude E = √(2 P κ₁ / (ħ ω_L)) in rad/s, from laser power P (W),
/// input-mirror decay κ₁ (rad/s) and drive frequency ω_L (rad/s).
pub fn drive_amplitude(power: f64, kappa1: f64, omega_l: f64) -> Result<f64> {
    if power < 0.0 {
        return Err(Error::InvalidParam(format!("power = {power} must be >= 0")));
    }
    if kappa1 < 0.0 {
        return Err(Error::InvalidParam(format!(
            "kappa1 = {kappa1} must be >= 0"
        )));
    }
    if omega_l <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "drive frequency = {omega_l} must be > 0"
        )));
    }
    Ok((2.0 * power * kappa1 / (HBAR * omega_l)).sqrt())
}

/// Which mechanical sideband a drive tone addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sideband {
    /// Mode 1, driven at ω₀ + ω₁: G = gE/(ω − Δ̃ + iκ̃).
    Blue,
    /// Mode 2, driven at ω₀ − ω₂: G = gE/(−ω − Δ̃ + iκ̃).
    Red,
}

/// Complex effective optomechanical coupling for one tone. The drift
/// assembler consumes magnitudes; this exposes the full complex value.
pub fn effective_coupling(
    g: f64,
    drive: f64,
    omega_m: f64,
    delta_eff: f64,
    kappa_eff: f64,
    sideband: Sideband,
) -> Result<Complex64> {
    let re = match sideband {
        Sideband::Blue => omega_m - delta_eff,
        Sideband::Red => -omega_m - delta_eff,
    };
    let den = Complex64::new(re, kappa_eff);
    if den.norm() == 0.0 {
        return Err(Error::SingularConfiguration);
    }
    Ok(Complex64::new(g * drive, 0.0) / den)
}

/// Bare-drive configuration: bichromatic tones at ω_L1 = ω₀ + ω₁ and
/// ω_L2 = ω₀ − ω₂ around a reference ω₀ detuned from the cavity by Δ₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// Bare optomechanical couplings (rad/s).
    pub g1: f64,
    pub g2: f64,
    /// Laser powers (W).
    pub p1: f64,
    pub p2: f64,
    /// Drive frequencies (rad/s).
    pub omega_l1: f64,
    pub omega_l2: f64,
    /// Cavity and reference frequencies (rad/s).
    pub omega_c: f64,
    pub omega_0: f64,
}

impl DriveConfig {
    /// Construct with the bichromatic condition built in.
    pub fn bichromatic(
        g1: f64,
        g2: f64,
        p1: f64,
        p2: f64,
        omega_c: f64,
        omega_0: f64,
        omega1: f64,
        omega2: f64,
    ) -> Result<Self> {
        let cfg = DriveConfig {
            g1,
            g2,
            p1,
            p2,
            omega_l1: omega_0 + omega1,
            omega_l2: omega_0 - omega2,
            omega_c,
            omega_0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p1 < 0.0 || self.p2 < 0.0 {
            return Err(Error::InvalidParam("laser powers must be >= 0".into()));
        }
        if self.omega_l1 <= 0.0 || self.omega_l2 <= 0.0 {
            return Err(Error::InvalidParam(
                "drive frequencies must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Reference detuning Δ₀ = ω_c − ω₀.
    pub fn delta0(&self) -> f64 {
        self.omega_c - self.omega_0
    }

    /// Drive amplitudes (E₁, E₂) for a given input-mirror decay rate.
    pub fn drive_amplitudes(&self, kappa1: f64) -> Result<(f64, f64)> {
        Ok((
            drive_amplitude(self.p1, kappa1, self.omega_l1)?,
            drive_amplitude(self.p2, kappa1, self.omega_l2)?,
        ))
    }
}

/// Advisory report on the resonant-approximation regime: each entry is a
/// ratio that must stay small for the time-independent linearized equations
/// to hold, flagged against a threshold. Never blocks a simulation.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub threshold: f64,
    /// (description, ratio, within threshold) triples.
    pub ratios: Vec<(String, f64, bool)>,
    /// ω₁ = ω₂ makes |ω₁ − ω₂| ratios meaningless.
    pub degenerate_frequencies: bool,
}

impl RegimeReport {
    pub fn pass(&self) -> bool {
        !self.degenerate_frequencies && self.ratios.iter().all(|(_, _, ok)| *ok)
    }
}

/// Default regime threshold: couplings and effective decay at or below 1% of
/// the mechanical frequencies and their difference.
pub const REGIME_THRESHOLD: f64 = 0.01;

pub fn validate_regime(params: &SystemParams) -> Result<RegimeReport> {
    validate_regime_with(params, REGIME_THRESHOLD)
}

pub fn validate_regime_with(params: &SystemParams, threshold: f64) -> Result<RegimeReport> {
    params.validate()?;
    let (kappa_eff, _) = params.effective_cavity()?;
    let degenerate = params.omega1 == params.omega2;
    let mut ratios = Vec::new();
    let mut push = |name: &str, num: f64, den: f64| {
        if den > 0.0 {
            let r = num / den;
            ratios.push((name.to_string(), r, r <= threshold));
        } else if num > 0.0 {
            ratios.push((name.to_string(), f64::INFINITY, false));
        } else {
            ratios.push((name.to_string(), 0.0, true));
        }
    };
    let domega = (params.omega1 - params.omega2).abs();
    push("G1/omega1", params.g1, params.omega1);
    push("G1/omega2", params.g1, params.omega2);
    push("G2/omega1", params.g2, params.omega1);
    push("G2/omega2", params.g2, params.omega2);
    push("kappa_eff/omega1", kappa_eff, params.omega1);
    push("kappa_eff/omega2", kappa_eff, params.omega2);
    if !degenerate {
        push("G1/|omega1-omega2|", params.g1, domega);
        push("G2/|omega1-omega2|", params.g2, domega);
        push("kappa_eff/|omega1-omega2|", kappa_eff, domega);
    }
    Ok(RegimeReport {
        threshold,
        ratios,
        degenerate_frequencies: degenerate,
    })
}

/// Drift and diffusion matrices of the quadrature fluctuations
/// (X, Y, q₁, p₁, q₂, p₂).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    drift: Matrix6<f64>,
    diffusion: Matrix6<f64>,
}

impl LinearModel {
    pub fn drift(&self) -> &Matrix6<f64> {
        &self.drift
    }

    pub fn diffusion(&self) -> &Matrix6<f64> {
        &self.diffusion
    }

    pub fn drift_dyn(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(6, 6, self.drift.as_slice())
    }

    pub fn diffusion_dyn(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(6, 6, self.diffusion.as_slice())
    }

    /// Rates read back off the tagged drift entries.
    pub fn kappa_eff(&self) -> f64 {
        -self.drift[(Quad::CavX.index(), Quad::CavX.index())]
    }

    pub fn delta_eff(&self) -> f64 {
        self.drift[(Quad::CavX.index(), Quad::CavY.index())]
    }

    pub fn g1(&self) -> f64 {
        -self.drift[(Quad::CavX.index(), Quad::MechP1.index())]
    }

    pub fn g2(&self) -> f64 {
        self.drift[(Quad::CavX.index(), Quad::MechP2.index())]
    }

    pub fn gamma1(&self) -> f64 {
        -2.0 * self.drift[(Quad::MechQ1.index(), Quad::MechQ1.index())]
    }

    pub fn gamma2(&self) -> f64 {
        -2.0 * self.drift[(Quad::MechQ2.index(), Quad::MechQ2.index())]
    }
}

/// Assemble the drift and diffusion matrices from physical parameters.
///
/// In quadratures, with real couplings G₁, G₂ ≥ 0 and the feedback-modified
/// (κ̃, Δ̃):
///
/// ```text
///   Ẋ  = −κ̃ X + Δ̃ Y − G₁ p₁ + G₂ p₂
///   Ẏ  = −Δ̃ X − κ̃ Y − G₁ q₁ − G₂ q₂
///   q̇₁ = −(γ₁/2) q₁ − G₁ Y
///   ṗ₁ = −(γ₁/2) p₁ − G₁ X
///   q̇₂ = −(γ₂/2) q₂ + G₂ Y
///   ṗ₂ = −(γ₂/2) p₂ − G₂ X
/// ```
///
/// The diffusion matrix is diag(κ̃, κ̃, γ₁(n̄₁+½), γ₁(n̄₁+½), γ₂(n̄₂+½),
/// γ₂(n̄₂+½)): vacuum input on the feedback-modified cavity port, thermal
/// inputs on the mechanical baths.
pub fn build_model(params: &SystemParams) -> Result<LinearModel> {
    params.validate()?;
    let (kt, dt) = params.effective_cavity()?;
    let (g1, g2) = (params.g1, params.g2);
    let (hg1, hg2) = (params.gamma1 / 2.0, params.gamma2 / 2.0);

    #[rustfmt::skip]
    let drift = Matrix6::new(
        -kt,  dt,  0.0,  -g1,  0.0,  g2,
        -dt, -kt,  -g1,  0.0,  -g2,  0.0,
        0.0, -g1, -hg1,  0.0,  0.0,  0.0,
        -g1, 0.0,  0.0, -hg1,  0.0,  0.0,
        0.0,  g2,  0.0,  0.0, -hg2,  0.0,
        -g2, 0.0,  0.0,  0.0,  0.0, -hg2,
    );

    let d1 = params.gamma1 * (params.nbar1 + 0.5);
    let d2 = params.gamma2 * (params.nbar2 + 0.5);
    let diffusion = Matrix6::from_diagonal(&nalgebra::Vector6::new(kt, kt, d1, d1, d2, d2));

    Ok(LinearModel { drift, diffusion })
}
