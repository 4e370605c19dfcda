//! Independent brute-force verifiers used by the test and acceptance suites:
//! tensor-product quadrature, the Wigner-to-Husimi Gaussian convolution, and
//! a truncated-Fock-basis parity oracle for the two-mode squeezed vacuum.
//!
//! Nothing here calls into `phasespace`; the point of these routines is to
//! pin that module down through a separate arithmetic path.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::cov::CovMat;
use crate::error::{Error, Result};

/// Uniform tensor-product grid over [−L, L]⁴.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    /// Half-width per axis, in the same phase-space units as the integrand.
    pub half_width: f64,
    /// Points per axis. Convergence claims in the tests assume ≥ 64.
    pub points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParam(format!(
                "grid half-width {half_width} must be > 0"
            )));
        }
        if points < 2 {
            return Err(Error::InvalidParam(format!(
                "grid needs at least 2 points per axis, got {points}"
            )));
        }
        Ok(GridSpec { half_width, points })
    }

    fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.points;
        let h = 2.0 * self.half_width / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| -self.half_width + i as f64 * h).collect();
        let ws: Vec<f64> = (0..n)
            .map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h })
            .collect();
        (xs, ws)
    }
}

/// Trapezoidal integral of a 4-variable function over the grid. The inner
/// sums accumulate per axis, keeping the summation order deterministic.
pub fn quadrature_integral<F>(f: F, grid: &GridSpec) -> f64
where
    F: Fn(&[f64; 4]) -> f64,
{
    let (xs, ws) = grid.nodes();
    let mut total = 0.0;
    for (i0, &x0) in xs.iter().enumerate() {
        let mut s0 = 0.0;
        for (i1, &x1) in xs.iter().enumerate() {
            let mut s1 = 0.0;
            for (i2, &x2) in xs.iter().enumerate() {
                let mut s2 = 0.0;
                for (i3, &x3) in xs.iter().enumerate() {
                    s2 += ws[i3] * f(&[x0, x1, x2, x3]);
                }
                s1 += ws[i2] * s2;
            }
            s0 += ws[i1] * s1;
        }
        total += ws[i0] * s0;
    }
    total
}

/// Direct Gaussian Wigner evaluation, reimplemented here so the convolution
/// check does not route through `phasespace`.
fn wigner_direct(v: &Matrix4<f64>, u: &[f64; 4]) -> f64 {
    let inv = v.try_inverse().expect("physical covariance is invertible");
    let x = nalgebra::Vector4::from_column_slice(u);
    let det = v.determinant();
    (-(x.dot(&(inv * x)))).exp() / (std::f64::consts::PI.powi(2) * det.sqrt())
}

/// Husimi Q by numerical convolution of the Wigner function with the
/// coherent-state Gaussian weight,
/// Q(β₁,β₂) = (4/π²) ∫∫ d²α₁ d²α₂ W(α₁,α₂) exp(−2|α₁−β₁|² − 2|α₂−β₂|²).
pub fn husimi_convolution(v: &CovMat, u: &[f64; 4], grid: &GridSpec) -> Result<f64> {
    if v.dim() != 4 {
        return Err(Error::BadModeLabels(
            "husimi convolution needs a two-mode covariance matrix".into(),
        ));
    }
    let m = v.matrix();
    let vm = Matrix4::from_fn(|i, j| m[(i, j)]);
    let f = |a: &[f64; 4]| -> f64 {
        let d2: f64 = a.iter().zip(u.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
        wigner_direct(&vm, a) * (-2.0 * d2).exp()
    };
    Ok(4.0 / std::f64::consts::PI.powi(2) * quadrature_integral(f, grid))
}

/// Associated Laguerre polynomial L_n^{(k)}(x) by the three-term recurrence.
fn laguerre(n: usize, k: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut lm1 = 1.0;
    let mut l = 1.0 + k - x;
    for m in 1..n {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + k - x) * l - (mf + k) * lm1) / (mf + 1.0);
        lm1 = l;
        l = next;
    }
    l
}

/// Displaced-number-state overlap ⟨m|D(β)|n⟩.
fn displacement_element(m: usize, n: usize, beta: Complex64) -> Complex64 {
    let x = beta.norm_sqr();
    let gauss = (-x / 2.0).exp();
    if m >= n {
        let k = m - n;
        // sqrt(n!/m!) β^k = prod_{j=n+1..m} (β / sqrt(j))
        let mut pref = Complex64::new(gauss, 0.0);
        for j in (n + 1)..=m {
            pref *= beta / (j as f64).sqrt();
        }
        pref * laguerre(n, k as f64, x)
    } else {
        let k = n - m;
        let mut pref = Complex64::new(gauss, 0.0);
        for j in (m + 1)..=n {
            pref *= -beta.conj() / (j as f64).sqrt();
        }
        pref * laguerre(m, k as f64, x)
    }
}

/// ⟨m|Π̂(α)|n⟩ for the displaced parity Π̂(α) = D(2α)·(−1)^n̂.
fn displaced_parity_element(m: usize, n: usize, alpha: Complex64) -> Complex64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    displacement_element(m, n, alpha * 2.0) * sign
}

/// Two-mode displaced-parity expectation on the two-mode squeezed vacuum
/// |ψ_r⟩ = √(1−λ²) Σ λⁿ |n,n⟩ with λ = tanh r, truncated at `cutoff`.
///
/// Independent Fock-basis route to the Wigner-parity relation.
pub fn fock_parity(r: f64, alpha1: Complex64, alpha2: Complex64, cutoff: usize) -> Result<f64> {
    let lambda = r.tanh();
    let tail = lambda.powi(2 * cutoff as i32);
    if tail >= 1e-12 {
        return Err(Error::CutoffTooSmall { tail });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for m in 0..=cutoff {
        for n in 0..=cutoff {
            let amp = lambda.powi(m as i32) * lambda.powi(n as i32);
            if amp == 0.0 {
                continue;
            }
            let e1 = displaced_parity_element(m, n, alpha1);
            let e2 = displaced_parity_element(m, n, alpha2);
            total += e1 * e2 * amp;
        }
    }
    let value = total * (1.0 - lambda * lambda);
    debug_assert!(value.im.abs() < 1e-10, "parity expectation must be real");
    Ok(value.re.clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cov::{CovMat, MECHANICAL};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::DMatrix;

    fn tmsv(r: f64) -> CovMat {
        let c = (2.0 * r).cosh();
        let s = (2.0 * r).sinh();
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                c, 0.0, s, 0.0, //
                0.0, c, 0.0, -s, //
                s, 0.0, c, 0.0, //
                0.0, -s, 0.0, c,
            ],
        ) * 0.5;
        CovMat::new(m, MECHANICAL.to_vec()).unwrap()
    }

    fn vacuum() -> CovMat {
        CovMat::new(DMatrix::identity(4, 4) * 0.5, MECHANICAL.to_vec()).unwrap()
    }

    #[test]
    fn quadrature_known_gaussian() {
        let grid = GridSpec::new(8.0, 128).unwrap();
        let val = quadrature_integral(
            |u| (-(u.iter().map(|x| x * x).sum::<f64>())).exp(),
            &grid,
        );
        assert_abs_diff_eq!(val, std::f64::consts::PI.powi(2), epsilon = 1e-8);
    }

    #[test]
    fn quadrature_grid_doubling_converges() {
        let f = |u: &[f64; 4]| (-(u.iter().map(|x| x * x).sum::<f64>())).exp();
        let a = quadrature_integral(f, &GridSpec::new(8.0, 64).unwrap());
        let b = quadrature_integral(f, &GridSpec::new(8.0, 128).unwrap());
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(0.0, 64).is_err());
        assert!(GridSpec::new(4.0, 1).is_err());
    }

    #[test]
    fn convolution_vacuum_origin() {
        let grid = GridSpec::new(6.0, 64).unwrap();
        let q = husimi_convolution(&vacuum(), &[0.0; 4], &grid).unwrap();
        assert_relative_eq!(q, 1.0 / std::f64::consts::PI.powi(2), max_relative = 1e-6);
    }

    #[test]
    fn fock_parity_vacuum_factorizes() {
        let a1 = Complex64::new(0.3, -0.2);
        let a2 = Complex64::new(-0.5, 0.1);
        let got = fock_parity(0.0, a1, a2, 64).unwrap();
        let want = (-2.0 * a1.norm_sqr()).exp() * (-2.0 * a2.norm_sqr()).exp();
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }

    #[test]
    fn fock_parity_cutoff_guard() {
        assert!(matches!(
            fock_parity(2.0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 8),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn fock_parity_tmsv_origin_is_one() {
        let p = fock_parity(0.5, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 60).unwrap();
        assert_relative_eq!(p, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn fock_parity_cutoff_cauchy_convergence() {
        let a1 = Complex64::new(0.3, 0.0);
        let a2 = Complex64::new(-0.2, 0.1);
        let mut prev_diff = f64::INFINITY;
        let mut prev = fock_parity(0.5, a1, a2, 40).unwrap();
        for cutoff in [50, 60, 70] {
            let cur = fock_parity(0.5, a1, a2, cutoff).unwrap();
            let diff = (cur - prev).abs();
            assert!(diff <= prev_diff.max(1e-14));
            prev_diff = diff.max(1e-15);
            prev = cur;
        }
    }

    #[test]
    fn displacement_element_against_coherent_overlap() {
        // <1|D(b)|0> = b e^{-|b|^2/2}.
        let b = Complex64::new(0.4, -0.3);
        let e = displacement_element(1, 0, b);
        let want = b * (-b.norm_sqr() / 2.0).exp();
        assert_relative_eq!(e.re, want.re, max_relative = 1e-12);
        assert_relative_eq!(e.im, want.im, max_relative = 1e-12);
        // <0|D(b)|1> = -conj(b) e^{-|b|^2/2}.
        let e = displacement_element(0, 1, b);
        let want = -b.conj() * (-b.norm_sqr() / 2.0).exp();
        assert_relative_eq!(e.re, want.re, max_relative = 1e-12);
        assert_relative_eq!(e.im, want.im, max_relative = 1e-12);
    }

    #[test]
    fn laguerre_small_orders() {
        // L_2^{(1)}(x) = x^2/2 - 3x + 3.
        for x in [0.0, 0.5, 1.7, 4.0] {
            assert_relative_eq!(
                laguerre(2, 1.0, x),
                x * x / 2.0 - 3.0 * x + 3.0,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn husimi_convolution_tmsv_normalization_spot() {
        // Coarse sanity: the convolution at the origin of a squeezed state is
        // positive and below the vacuum peak.
        let grid = GridSpec::new(6.0, 48).unwrap();
        let q = husimi_convolution(&tmsv(0.5), &[0.0; 4], &grid).unwrap();
        assert!(q > 0.0);
        assert!(q < 1.0 / std::f64::consts::PI.powi(2) + 1e-9);
    }
}
