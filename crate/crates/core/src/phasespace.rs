//! Wigner and Husimi quasiprobability functions of the mechanical two-mode
//! Gaussian state, and the two phase-space Bell functionals built on them.
//!
//! Phase-space points are 4-vectors u = (u₁, u₂) with one (Re, Im) pair of
//! the complex displacement per mode, normalized so that ∫ W(u) d⁴u = 1.
//! First moments are zero throughout.

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector2, Vector4};
use serde::Serialize;

use num_complex::Complex64;

use crate::cov::CovMat;
use crate::error::{Error, Result};
use crate::optim::{multistart_maximize, OptConfig};

/// W(u) = exp(−u V⁻¹ uᵀ) / (π² √det V), strictly positive.
pub fn wigner(v: &CovMat, u: &[f64; 4]) -> Result<f64> {
    Ok(Wigner::new(v)?.eval(u))
}

/// Prepared Wigner evaluator: the inverse and determinant are factored once
/// so optimizer loops pay only a quadratic form per call.
#[derive(Debug, Clone)]
pub struct Wigner {
    inv: Matrix4<f64>,
    norm: f64,
}

impl Wigner {
    pub fn new(v: &CovMat) -> Result<Self> {
        let m = two_mode(v)?;
        v.check_physical()?;
        let det = m.determinant();
        if det <= 0.0 {
            return Err(Error::MatrixNotPhysical(format!(
                "Wigner needs det V > 0, got {det:e}"
            )));
        }
        let inv = m.try_inverse().ok_or_else(|| {
            Error::MatrixNotPhysical("covariance matrix is not invertible".into())
        })?;
        Ok(Wigner {
            inv,
            norm: 1.0 / (std::f64::consts::PI.powi(2) * det.sqrt()),
        })
    }

    pub fn eval(&self, u: &[f64; 4]) -> f64 {
        let x = Vector4::from_column_slice(u);
        (-(x.dot(&(self.inv * x)))).exp() * self.norm
    }
}

/// Expectation of the displaced-parity product Π̂(α₁) ⊗ Π̂(α₂): (π²/4)·W at
/// the phase-space point of (α₁, α₂). Lies in [−1, 1]; positive for Gaussian
/// states.
pub fn parity_expectation(v: &CovMat, alpha1: Complex64, alpha2: Complex64) -> Result<f64> {
    let w = Wigner::new(v)?;
    let u = [alpha1.re, alpha1.im, alpha2.re, alpha2.im];
    Ok(std::f64::consts::PI.powi(2) / 4.0 * w.eval(&u))
}

/// Eight displacement settings of a two-party phase-space Bell test: each
/// party chooses between an unprimed and a primed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellSettings {
    pub u1: [f64; 2],
    pub u2: [f64; 2],
    pub u1p: [f64; 2],
    pub u2p: [f64; 2],
}

impl BellSettings {
    pub fn zero() -> Self {
        BellSettings {
            u1: [0.0; 2],
            u2: [0.0; 2],
            u1p: [0.0; 2],
            u2p: [0.0; 2],
        }
    }

    pub fn from_array(x: &[f64; 8]) -> Self {
        BellSettings {
            u1: [x[0], x[1]],
            u2: [x[2], x[3]],
            u1p: [x[4], x[5]],
            u2p: [x[6], x[7]],
        }
    }

    pub fn to_array(self) -> [f64; 8] {
        [
            self.u1[0], self.u1[1], self.u2[0], self.u2[1], self.u1p[0], self.u1p[1], self.u2p[0],
            self.u2p[1],
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

fn join(a: &[f64; 2], b: &[f64; 2]) -> [f64; 4] {
    [a[0], a[1], b[0], b[1]]
}

/// CHSH combination of displaced-parity correlations,
/// B = (π²/4)[W(u₁,u₂) + W(u₁′,u₂) + W(u₁,u₂′) − W(u₁′,u₂′)].
/// Local realism bounds |B| ≤ 2; quantum mechanics allows up to 2√2.
pub fn chsh_parity(v: &CovMat, s: &BellSettings) -> Result<f64> {
    let w = Wigner::new(v)?;
    Ok(chsh_parity_eval(&w, s))
}

fn chsh_parity_eval(w: &Wigner, s: &BellSettings) -> f64 {
    std::f64::consts::PI.powi(2) / 4.0
        * (w.eval(&join(&s.u1, &s.u2)) + w.eval(&join(&s.u1p, &s.u2))
            + w.eval(&join(&s.u1, &s.u2p))
            - w.eval(&join(&s.u1p, &s.u2p)))
}

/// Prepared Husimi evaluator built on the closed form
/// Q(u) = exp(−u (V + ½I)⁻¹ uᵀ) / (π² √det(V + ½I)), with single-mode
/// marginals from the corresponding 2×2 blocks of V + ½I.
#[derive(Debug, Clone)]
pub struct Husimi {
    inv: Matrix4<f64>,
    norm: f64,
    minv: [Matrix2<f64>; 2],
    mnorm: [f64; 2],
}

impl Husimi {
    pub fn new(v: &CovMat) -> Result<Self> {
        let m = two_mode(v)?;
        v.check_physical()?;
        let sm = m + Matrix4::identity() * 0.5;
        let det = sm.determinant();
        let inv = sm
            .try_inverse()
            .ok_or_else(|| Error::MatrixNotPhysical("V + I/2 is not invertible".into()))?;
        let mut minv = [Matrix2::zeros(); 2];
        let mut mnorm = [0.0; 2];
        for mode in 0..2 {
            let blk: Matrix2<f64> = sm.fixed_view::<2, 2>(2 * mode, 2 * mode).into_owned();
            let bdet = blk.determinant();
            minv[mode] = blk.try_inverse().ok_or_else(|| {
                Error::MatrixNotPhysical("marginal block is not invertible".into())
            })?;
            mnorm[mode] = 1.0 / (std::f64::consts::PI * bdet.sqrt());
        }
        Ok(Husimi {
            inv,
            norm: 1.0 / (std::f64::consts::PI.powi(2) * det.sqrt()),
            minv,
            mnorm,
        })
    }

    pub fn eval(&self, u: &[f64; 4]) -> f64 {
        let x = Vector4::from_column_slice(u);
        (-(x.dot(&(self.inv * x)))).exp() * self.norm
    }

    /// Marginal Q distribution of one mode (0 or 1).
    pub fn marginal(&self, mode: usize, u: &[f64; 2]) -> f64 {
        let x = Vector2::new(u[0], u[1]);
        (-(x.dot(&(self.minv[mode] * x)))).exp() * self.mnorm[mode]
    }
}

/// Joint Husimi Q function at a phase-space point.
pub fn husimi(v: &CovMat, u: &[f64; 4]) -> Result<f64> {
    Ok(Husimi::new(v)?.eval(u))
}

/// Single-mode Husimi marginal; `mode` is 0 or 1.
pub fn husimi_marginal(v: &CovMat, mode: usize, u: &[f64; 2]) -> Result<f64> {
    if mode > 1 {
        return Err(Error::BadModeLabels(format!(
            "marginal mode index {mode} out of range"
        )));
    }
    Ok(Husimi::new(v)?.marginal(mode, u))
}

/// Clauser-Horne-style combination for displaced on-off detection,
/// B′ = 4π²[Q(u₁,u₂) + Q(u₁′,u₂) + Q(u₁,u₂′) − Q(u₁′,u₂′)]
///      − 4π[Q(u₁) + Q(u₂)] + 2,
/// with the marginals taken at the unprimed settings. |B′| ≤ 2 for local
/// realistic theories.
pub fn bell_onoff(v: &CovMat, s: &BellSettings) -> Result<f64> {
    let q = Husimi::new(v)?;
    Ok(bell_onoff_eval(&q, s))
}

fn bell_onoff_eval(q: &Husimi, s: &BellSettings) -> f64 {
    let pi = std::f64::consts::PI;
    4.0 * pi * pi
        * (q.eval(&join(&s.u1, &s.u2)) + q.eval(&join(&s.u1p, &s.u2)) + q.eval(&join(&s.u1, &s.u2p))
            - q.eval(&join(&s.u1p, &s.u2p)))
        - 4.0 * pi * (q.marginal(0, &s.u1) + q.marginal(1, &s.u2))
        + 2.0
}

/// Which Bell functional a result refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BellKind {
    Parity,
    Onoff,
}

/// Outcome of maximizing |B| or |B′| over the eight settings.
#[derive(Debug, Clone, Serialize)]
pub struct BellResult {
    pub kind: BellKind,
    /// Maximized |B| (parity) or |B′| (on-off).
    pub value: f64,
    /// Settings attaining the maximum.
    pub settings: BellSettings,
    pub n_starts: usize,
    pub n_evals: usize,
    pub seed: u64,
}

impl BellResult {
    /// JSON document with the eight settings flattened into one array.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "kind": self.kind,
            "value": self.value,
            "settings": self.settings.to_array().to_vec(),
            "n_starts": self.n_starts,
            "n_evals": self.n_evals,
            "seed": self.seed,
        })
        .to_string()
    }
}

/// Quantum ceiling of the parity CHSH combination.
pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Multi-start maximization of |B| (parity) or |B′| (on-off) over the eight
/// settings. Both sign objectives run on the same start schedule, so the
/// result is deterministic in the seed and monotone in the start count.
pub fn maximize_bell(v: &CovMat, kind: BellKind, cfg: &OptConfig) -> Result<BellResult> {
    enum Objective {
        Parity(Wigner),
        Onoff(Husimi),
    }
    let obj = match kind {
        BellKind::Parity => Objective::Parity(Wigner::new(v)?),
        BellKind::Onoff => Objective::Onoff(Husimi::new(v)?),
    };
    let eval = |x: &[f64]| -> f64 {
        let s = BellSettings::from_array(x.try_into().expect("dim 8"));
        match &obj {
            Objective::Parity(w) => chsh_parity_eval(w, &s),
            Objective::Onoff(q) => bell_onoff_eval(q, &s),
        }
    };

    let mut half = cfg.clone();
    half.max_evals = cfg.max_evals / 2;
    let pos = multistart_maximize(8, &eval, &half)?;
    let neg = multistart_maximize(8, |x: &[f64]| -eval(x), &half)?;

    let (value, x) = if pos.best_f >= neg.best_f {
        (pos.best_f, pos.best_x)
    } else {
        (neg.best_f, neg.best_x)
    };
    let result = BellResult {
        kind,
        value,
        settings: BellSettings::from_array(&x.try_into().expect("dim 8")),
        n_starts: cfg.n_starts,
        n_evals: pos.n_evals + neg.n_evals,
        seed: cfg.seed,
    };
    debug_assert!(
        kind != BellKind::Parity || result.value <= TSIRELSON + 1e-6,
        "parity Bell value {} exceeds the quantum ceiling",
        result.value
    );
    Ok(result)
}

fn two_mode(v: &CovMat) -> Result<Matrix4<f64>> {
    if v.dim() != 4 {
        return Err(Error::BadModeLabels(format!(
            "phase-space functions need a two-mode covariance matrix, got {} quadratures",
            v.dim()
        )));
    }
    let m: &DMatrix<f64> = v.matrix();
    Ok(Matrix4::from_fn(|i, j| m[(i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cov::{CovMat, MECHANICAL};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cov(entries: &[f64; 16]) -> CovMat {
        CovMat::new(DMatrix::from_row_slice(4, 4, entries), MECHANICAL.to_vec()).unwrap()
    }

    fn vacuum() -> CovMat {
        CovMat::new(DMatrix::identity(4, 4) * 0.5, MECHANICAL.to_vec()).unwrap()
    }

    fn thermal(n1: f64, n2: f64) -> CovMat {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            n1 + 0.5,
            n1 + 0.5,
            n2 + 0.5,
            n2 + 0.5,
        ]));
        CovMat::new(m, MECHANICAL.to_vec()).unwrap()
    }

    pub(crate) fn tmsv(r: f64) -> CovMat {
        let c = (2.0 * r).cosh();
        let s = (2.0 * r).sinh();
        cov(&[
            c * 0.5,
            0.0,
            s * 0.5,
            0.0,
            0.0,
            c * 0.5,
            0.0,
            -s * 0.5,
            s * 0.5,
            0.0,
            c * 0.5,
            0.0,
            0.0,
            -s * 0.5,
            0.0,
            c * 0.5,
        ])
    }

    #[test]
    fn wigner_vacuum_peak() {
        let w = wigner(&vacuum(), &[0.0; 4]).unwrap();
        assert_relative_eq!(w, 4.0 / (PI * PI), max_relative = 1e-14);
    }

    #[test]
    fn wigner_decays() {
        let v = tmsv(0.4);
        let w0 = wigner(&v, &[0.0; 4]).unwrap();
        let mut prev = w0;
        for k in 1..6 {
            let r = k as f64;
            let w = wigner(&v, &[r, r, -r, r]).unwrap();
            assert!(w < prev);
            assert!(w > 0.0);
            prev = w;
        }
        assert!(prev < 1e-8 * w0);
    }

    #[test]
    fn parity_examples() {
        let one = parity_expectation(&vacuum(), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
            .unwrap();
        assert_relative_eq!(one, 1.0, max_relative = 1e-14);

        // Displacing one mode of the vacuum by |alpha|^2 = 1.
        let p = parity_expectation(&vacuum(), Complex64::new(0.6, 0.8), Complex64::new(0.0, 0.0))
            .unwrap();
        assert_relative_eq!(p, (-2.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn parity_expectation_within_unit_interval() {
        // 10^4 quasi-random points on a few states.
        let states = [vacuum(), thermal(1.3, 0.2), tmsv(0.8)];
        for v in &states {
            let w = Wigner::new(v).unwrap();
            let mut s = 0x12345u64;
            let mut rand = || {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s as f64 / u64::MAX as f64) * 6.0 - 3.0
            };
            for _ in 0..10_000 {
                let u = [rand(), rand(), rand(), rand()];
                let p = PI * PI / 4.0 * w.eval(&u);
                assert!((-1.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn chsh_vacuum_zero_settings() {
        let b = chsh_parity(&vacuum(), &BellSettings::zero()).unwrap();
        assert_relative_eq!(b, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn chsh_coincident_settings_bounded() {
        let states = [vacuum(), thermal(0.7, 2.0), tmsv(0.9)];
        for v in &states {
            let w = Wigner::new(v).unwrap();
            let mut s = 0x777u64;
            let mut rand = || {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s as f64 / u64::MAX as f64) * 4.0 - 2.0
            };
            for _ in 0..2_000 {
                let u1 = [rand(), rand()];
                let u2 = [rand(), rand()];
                let set = BellSettings {
                    u1,
                    u2,
                    u1p: u1,
                    u2p: u2,
                };
                let b = chsh_parity_eval(&w, &set);
                assert!(b <= 2.0 + 1e-9, "coincident-settings B = {b}");
            }
        }
    }

    #[test]
    fn husimi_vacuum_values() {
        let q = husimi(&vacuum(), &[0.0; 4]).unwrap();
        assert_relative_eq!(q, 1.0 / (PI * PI), max_relative = 1e-14);
        for mode in 0..2 {
            let m = husimi_marginal(&vacuum(), mode, &[0.0; 2]).unwrap();
            assert_relative_eq!(m, 1.0 / PI, max_relative = 1e-14);
        }
        assert!(husimi_marginal(&vacuum(), 2, &[0.0; 2]).is_err());
    }

    #[test]
    fn husimi_peak_bound_at_origin() {
        for v in [vacuum(), thermal(1.0, 3.0), tmsv(0.7)] {
            let q = Husimi::new(&v).unwrap();
            let q0 = q.eval(&[0.0; 4]);
            let mut s = 0x9e3779b9u64;
            let mut rand = || {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s as f64 / u64::MAX as f64) * 6.0 - 3.0
            };
            for _ in 0..2_000 {
                let u = [rand(), rand(), rand(), rand()];
                let qv = q.eval(&u);
                assert!(qv > 0.0);
                assert!(qv <= q0 + 1e-15);
            }
        }
    }

    #[test]
    fn onoff_vacuum_zero_settings() {
        let b = bell_onoff(&vacuum(), &BellSettings::zero()).unwrap();
        assert_relative_eq!(b, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn maximize_vacuum_parity_no_violation() {
        let out = maximize_bell(&vacuum(), BellKind::Parity, &OptConfig::default()).unwrap();
        assert_relative_eq!(out.value, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn maximize_thermal_product_stays_local() {
        let v = thermal(1.0, 0.5);
        let p = maximize_bell(&v, BellKind::Parity, &OptConfig::default()).unwrap();
        assert!(p.value <= 2.0 + 1e-6, "parity {}", p.value);
        let q = maximize_bell(&v, BellKind::Onoff, &OptConfig::default()).unwrap();
        assert!(q.value <= 2.0 + 1e-6, "onoff {}", q.value);
    }

    #[test]
    fn maximize_tmsv_parity_violates() {
        let out = maximize_bell(&tmsv(1.0), BellKind::Parity, &OptConfig::default()).unwrap();
        assert!(out.value > 2.0);
        assert!(out.value <= TSIRELSON + 1e-6);
        // Regression anchor for the r = 1 two-mode squeezed vacuum.
        assert_relative_eq!(out.value, 2.3075, epsilon = 2e-3);
        assert!(out.settings.all_finite());
        assert!(out.n_evals > 0);
    }

    #[test]
    fn maximize_monotone_in_starts() {
        let v = tmsv(0.6);
        let mut prev = f64::NEG_INFINITY;
        for n in [1, 4, 16, 64] {
            let cfg = OptConfig {
                n_starts: n,
                seed: 11,
                ..OptConfig::default()
            };
            let out = maximize_bell(&v, BellKind::Parity, &cfg).unwrap();
            assert!(out.value >= prev - 1e-15);
            prev = out.value;
        }
    }

    #[test]
    fn bell_result_json_round_trip_fields() {
        let out = maximize_bell(&vacuum(), BellKind::Onoff, &OptConfig::default()).unwrap();
        let js = out.to_json();
        let parsed: serde_json::Value = serde_json::from_str(&js).unwrap();
        assert_eq!(parsed["kind"], "onoff");
        assert!(parsed["value"].is_number());
        assert_eq!(parsed["settings"].as_array().unwrap().len(), 8);
        assert_eq!(parsed["seed"], 0);
    }
}
