//! Covariance-matrix dynamics: steady state of the continuous Lyapunov
//! equation A V + V Aᵀ + D = 0 and the differential form V̇ = AV + VAᵀ + D.

use nalgebra::{DMatrix, DVector, Matrix6};

use crate::cov::{physicality_tolerance, CovMat, Quad, FULL_SYSTEM};
use crate::error::{Error, Result};
use crate::measures::MeasureReport;
use crate::model::LinearModel;

/// One sample of a covariance trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    /// Time (s).
    pub t: f64,
    /// Full 6×6 covariance matrix at `t`.
    pub cov: CovMat,
    /// Mechanical measures, when the caller computed them.
    pub report: Option<MeasureReport>,
}

/// Relative tolerance on the max drift eigenvalue real part for stability.
const STABILITY_RTOL: f64 = 1e-12;

/// Largest real part among the drift eigenvalues, with the eigenvalue itself.
pub fn max_real_eigenvalue(model: &LinearModel) -> (f64, num_complex::Complex64) {
    let eigs = model.drift_dyn().complex_eigenvalues();
    let mut worst = eigs[0];
    for e in eigs.iter() {
        if e.re > worst.re {
            worst = *e;
        }
    }
    (worst.re, worst)
}

/// True iff the drift matrix is Hurwitz: max Re λ < −1e-12·‖A‖_F.
pub fn is_stable(model: &LinearModel) -> bool {
    let (max_re, _) = max_real_eigenvalue(model);
    max_re < -STABILITY_RTOL * model.drift().norm()
}

/// Steady-state covariance matrix, solving A V + V Aᵀ = −D by Kronecker
/// vectorization (36×36 LU) with iterative refinement.
///
/// The residual target is 1e-10·‖D‖_F plus an f64 representability floor:
/// when V carries entries of magnitude v against couplings of magnitude g,
/// no double-precision matrix can push ‖AV + VAᵀ + D‖ below ~ g·ulp(v), so
/// the floor scales with the largest entry of |A|·|V|.
pub fn steady_state_cm(model: &LinearModel) -> Result<CovMat> {
    let (max_re, eig) = max_real_eigenvalue(model);
    if max_re >= -STABILITY_RTOL * model.drift().norm() {
        return Err(Error::unstable(eig));
    }

    let a = model.drift_dyn();
    let d = model.diffusion_dyn();
    let n = 6;
    let id = DMatrix::<f64>::identity(n, n);
    // vec(AV + VA^T) = (I ⊗ A + A ⊗ I) vec(V), column-major vec.
    let lhs = id.kronecker(&a) + a.kronecker(&id);
    let rhs = DVector::from_column_slice((-&d).as_slice());
    let lu = lhs.lu();
    let v0 = lu
        .solve(&rhs)
        .ok_or(Error::SolverFailure {
            residual: f64::INFINITY,
            tolerance: 0.0,
        })?;
    let mut v = DMatrix::from_column_slice(n, n, v0.as_slice());
    v = (&v + v.transpose()) * 0.5;

    let resid_norm = |v: &DMatrix<f64>| (&a * v + v * a.transpose() + &d).norm();

    // Iterative refinement: keep the iterate with the smallest residual.
    let mut best = v.clone();
    let mut best_res = resid_norm(&v);
    for _ in 0..4 {
        let r = &a * &v + &v * a.transpose() + &d;
        let rv = DVector::from_column_slice((-r).as_slice());
        let corr = match lu.solve(&rv) {
            Some(c) => c,
            None => break,
        };
        v += DMatrix::from_column_slice(n, n, corr.as_slice());
        v = (&v + v.transpose()) * 0.5;
        let res = resid_norm(&v);
        if res < best_res {
            best = v.clone();
            best_res = res;
        }
    }

    let tolerance = residual_tolerance(&a, &best, d.norm());
    if best_res > tolerance {
        return Err(Error::SolverFailure {
            residual: best_res,
            tolerance,
        });
    }

    let cm = CovMat::new_unchecked(best, FULL_SYSTEM.to_vec());
    cm.check_physical()?;
    Ok(cm)
}

/// Residual acceptance threshold for a solved V: the spec target plus the
/// double-precision floor 32·ε·max(|A|·|V|).
pub fn residual_tolerance(a: &DMatrix<f64>, v: &DMatrix<f64>, d_norm: f64) -> f64 {
    let mut prod_max: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..v.ncols() {
            let mut s = 0.0;
            for k in 0..a.ncols() {
                s += a[(i, k)].abs() * v[(k, j)].abs();
            }
            prod_max = prod_max.max(s);
        }
    }
    1e-10 * d_norm + 32.0 * f64::EPSILON * prod_max
}

/// Separable initial state: cavity vacuum, each mechanical mode thermal.
pub fn initial_state(nbar1: f64, nbar2: f64) -> Result<CovMat> {
    if !(nbar1 >= 0.0) || !(nbar2 >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "thermal occupations ({nbar1}, {nbar2}) must be >= 0"
        )));
    }
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
        0.5,
        0.5,
        nbar1 + 0.5,
        nbar1 + 0.5,
        nbar2 + 0.5,
        nbar2 + 0.5,
    ]));
    CovMat::new(m, FULL_SYSTEM.to_vec())
}

/// Frobenius norm of the optical–mechanical off-diagonal 2×4 block.
pub fn decoupling_defect(v: &CovMat) -> Result<f64> {
    if v.dim() != 6 {
        return Err(Error::BadModeLabels(
            "decoupling defect needs the full 6x6 covariance matrix".into(),
        ));
    }
    let m = v.matrix();
    let mut s = 0.0;
    for i in Quad::CavX.index()..=Quad::CavY.index() {
        for j in Quad::MechQ1.index()..=Quad::MechP2.index() {
            s += m[(i, j)] * m[(i, j)];
        }
    }
    Ok(s.sqrt())
}

/// Number of substeps per characteristic time; the resulting step is far
/// below the stability cap and tight enough that halving it moves trajectory
/// entries by less than 1e-8 relative at the stiffest figure parameters.
const STEPS_PER_UNIT: f64 = 1000.0;

/// Default RK4 step bound for a model: (1/1000)·min(2π/|Δ̃|, 1/G₂, 1/G₁,
/// 1/κ̃, 2/γ) over the nonzero rates.
pub fn default_max_step(model: &LinearModel) -> f64 {
    let mut unit = f64::INFINITY;
    let delta = model.delta_eff().abs();
    if delta > 0.0 {
        unit = unit.min(std::f64::consts::TAU / delta);
    }
    for rate in [model.g1(), model.g2(), model.kappa_eff()] {
        if rate > 0.0 {
            unit = unit.min(1.0 / rate);
        }
    }
    for gamma in [model.gamma1(), model.gamma2()] {
        if gamma > 0.0 {
            unit = unit.min(2.0 / gamma);
        }
    }
    if unit.is_finite() {
        unit / STEPS_PER_UNIT
    } else {
        f64::INFINITY
    }
}

/// Integrate V̇ = AV + VAᵀ + D through the requested sample times with
/// fixed-step classical RK4.
///
/// `times` must start at 0 and increase strictly; the first returned point is
/// `v0` exactly. Each inter-sample interval is split into equal substeps no
/// longer than the default step bound. Physicality is checked at every sample.
pub fn evolve_cm(model: &LinearModel, v0: &CovMat, times: &[f64]) -> Result<Vec<TrajectoryPoint>> {
    evolve_cm_with_step(model, v0, times, default_max_step(model))
}

/// As [`evolve_cm`] with an explicit step bound (still a fixed-step method:
/// the bound is rounded down so substeps divide each sample interval evenly).
pub fn evolve_cm_with_step(
    model: &LinearModel,
    v0: &CovMat,
    times: &[f64],
    max_step: f64,
) -> Result<Vec<TrajectoryPoint>> {
    if v0.dim() != 6 {
        return Err(Error::InvalidParam(
            "initial state must be the full 6x6 covariance matrix".into(),
        ));
    }
    if times.is_empty() || times[0] != 0.0 {
        return Err(Error::InvalidParam(
            "time grid must start at t = 0".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParam(
            "time grid must be strictly increasing".into(),
        ));
    }
    if !(max_step > 0.0) {
        return Err(Error::InvalidParam(format!(
            "max_step = {max_step} must be > 0"
        )));
    }

    let a = *model.drift();
    let d = *model.diffusion();
    let rhs = |v: &Matrix6<f64>| -> Matrix6<f64> {
        let av = a * v;
        av + av.transpose() + d
    };

    let mut v = Matrix6::from_column_slice(v0.matrix().as_slice());
    let mut out = Vec::with_capacity(times.len());
    out.push(TrajectoryPoint {
        t: 0.0,
        cov: v0.clone(),
        report: None,
    });

    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let span = t1 - t0;
        let n_sub = if max_step.is_finite() {
            (span / max_step).ceil().max(1.0) as usize
        } else {
            1
        };
        let h = span / n_sub as f64;
        for _ in 0..n_sub {
            let k1 = rhs(&v);
            let k2 = rhs(&(v + k1 * (h / 2.0)));
            let k3 = rhs(&(v + k2 * (h / 2.0)));
            let k4 = rhs(&(v + k3 * h));
            v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            v = (v + v.transpose()) * 0.5;
        }
        let cov = CovMat::new_unchecked(
            DMatrix::from_column_slice(6, 6, v.as_slice()),
            FULL_SYSTEM.to_vec(),
        );
        let nu_min = cov.min_symplectic_eigenvalue();
        if nu_min < 0.5 - physicality_tolerance(cov.matrix().norm()) {
            return Err(Error::StepTooLarge { t: t1, nu_min });
        }
        out.push(TrajectoryPoint {
            t: t1,
            cov,
            report: None,
        });
    }
    Ok(out)
}

/// CSV header of a trajectory export: time followed by the upper triangle of
/// V, row-major.
pub fn trajectory_csv_header() -> String {
    let mut cols = vec!["t".to_string()];
    for i in 1..=6 {
        for j in i..=6 {
            cols.push(format!("V{i}{j}"));
        }
    }
    cols.join(",")
}

/// One CSV row per trajectory point: `t,V11,V12,...,V66`.
pub fn trajectory_csv_row(p: &TrajectoryPoint) -> String {
    let mut cols = vec![format!("{}", p.t)];
    let m = p.cov.matrix();
    for i in 0..6 {
        for j in i..6 {
            cols.push(format!("{}", m[(i, j)]));
        }
    }
    cols.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cov::{ModeLabel, MECHANICAL};
    use crate::model::{build_model, SystemParams};
    use approx::assert_relative_eq;

    fn params(ratio: f64, r_b: f64, nbar1: f64, nbar2: f64) -> SystemParams {
        SystemParams {
            kappa1: 5e4,
            kappa2: 5e4,
            r_b,
            theta: 0.0,
            delta: 0.0,
            g1: ratio * 1e5,
            g2: 1e5,
            gamma1: 10.0,
            gamma2: 10.0,
            nbar1,
            nbar2,
            omega1: 1e7,
            omega2: 2e7,
        }
    }

    fn fig3_params() -> SystemParams {
        SystemParams {
            kappa1: 0.0,
            kappa2: 0.0,
            r_b: 0.0,
            theta: 0.0,
            delta: 1e4,
            g1: 1e5,
            g2: 1e5,
            gamma1: 0.0,
            gamma2: 0.0,
            nbar1: 0.0,
            nbar2: 0.0,
            omega1: 1e7,
            omega2: 2e7,
        }
    }

    fn decoupled_damped_model(k: f64, nbar: f64) -> LinearModel {
        // G = 0, kappa1 = kappa2 = k/2, gamma = 2k: A = -k I exactly.
        let p = SystemParams {
            kappa1: k / 2.0,
            kappa2: k / 2.0,
            r_b: 0.0,
            theta: 0.0,
            delta: 0.0,
            g1: 0.0,
            g2: 0.0,
            gamma1: 2.0 * k,
            gamma2: 2.0 * k,
            nbar1: nbar,
            nbar2: nbar,
            omega1: 1e7,
            omega2: 2e7,
        };
        build_model(&p).unwrap()
    }

    #[test]
    fn stability_examples() {
        // A = -k I via decoupled damped modes.
        let m = decoupled_damped_model(1.0, 0.0);
        assert!(is_stable(&m));

        // Marginal: equal couplings with no dissipation at all.
        let p = fig3_params();
        let m = build_model(&p).unwrap();
        assert!(!is_stable(&m));

        // Fig 2(a) parameters lead to a steady state.
        let m = build_model(&params(0.999, 0.95, 0.0, 0.0)).unwrap();
        assert!(is_stable(&m));
    }

    #[test]
    fn steady_state_scalar_balance() {
        // A = -k I: the balance V = D/(2k) holds entrywise, giving nbar + 1/2
        // on the mechanical diagonal and the vacuum 1/2 on the cavity.
        let k = 3.0;
        let nbar = 2.0;
        let m = decoupled_damped_model(k, nbar);
        let v = steady_state_cm(&m).unwrap();
        for i in 2..6 {
            assert_relative_eq!(v.matrix()[(i, i)], nbar + 0.5, max_relative = 1e-10);
        }
        assert_relative_eq!(v.matrix()[(0, 0)], 0.5, max_relative = 1e-10);
    }

    #[test]
    fn steady_state_decoupled_mr1_thermalizes() {
        let mut p = params(0.0, 0.5, 7.0, 0.0);
        p.g1 = 0.0;
        let m = build_model(&p).unwrap();
        let v = steady_state_cm(&m).unwrap();
        let mr1 = v.reduce(&[ModeLabel::Mech1]).unwrap();
        assert_relative_eq!(mr1.matrix()[(0, 0)], 7.5, max_relative = 1e-9);
        assert_relative_eq!(mr1.matrix()[(1, 1)], 7.5, max_relative = 1e-9);
        assert!(mr1.matrix()[(0, 1)].abs() < 1e-9);
    }

    #[test]
    fn steady_state_residual_bound() {
        for (ratio, r_b, n1, n2) in [
            (0.999, 0.95, 0.0, 0.0),
            (0.953, 0.7, 200.0, 100.0),
            (0.869, 0.5, 1000.0, 500.0),
            (0.8, 0.0, 0.0, 0.0),
        ] {
            let m = build_model(&params(ratio, r_b, n1, n2)).unwrap();
            let v = steady_state_cm(&m).unwrap();
            let a = m.drift_dyn();
            let d = m.diffusion_dyn();
            let r = (&a * v.matrix() + v.matrix() * a.transpose() + &d).norm();
            let tol = residual_tolerance(&a, v.matrix(), d.norm());
            assert!(r <= tol, "residual {r:e} > tol {tol:e} at ratio {ratio}");
        }
    }

    #[test]
    fn steady_state_rejects_unstable() {
        let m = build_model(&fig3_params()).unwrap();
        assert!(matches!(
            steady_state_cm(&m),
            Err(Error::UnstableModel { .. })
        ));
    }

    #[test]
    fn initial_state_examples() {
        let v = initial_state(0.0, 0.0).unwrap();
        assert_relative_eq!(
            (v.matrix() - DMatrix::identity(6, 6) * 0.5).norm(),
            0.0,
            epsilon = 1e-15
        );

        let v = initial_state(1.0, 0.0).unwrap();
        let want = [0.5, 0.5, 1.5, 1.5, 0.5, 0.5];
        for i in 0..6 {
            assert_relative_eq!(v.matrix()[(i, i)], want[i]);
        }
        let nus = v.symplectic_eigenvalues();
        assert_relative_eq!(nus[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(nus[2], 1.5, max_relative = 1e-12);

        assert!(initial_state(-1.0, 0.0).is_err());
    }

    #[test]
    fn evolve_time_zero_returns_v0() {
        let m = build_model(&params(0.9, 0.5, 0.0, 0.0)).unwrap();
        let v0 = initial_state(0.0, 0.0).unwrap();
        let traj = evolve_cm(&m, &v0, &[0.0]).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj[0].t, 0.0);
        assert_eq!(traj[0].cov.matrix(), v0.matrix());
    }

    #[test]
    fn evolve_rejects_bad_grid() {
        let m = build_model(&params(0.9, 0.5, 0.0, 0.0)).unwrap();
        let v0 = initial_state(0.0, 0.0).unwrap();
        assert!(evolve_cm(&m, &v0, &[]).is_err());
        assert!(evolve_cm(&m, &v0, &[1e-6, 2e-6]).is_err());
        assert!(evolve_cm(&m, &v0, &[0.0, 2e-6, 1e-6]).is_err());
    }

    #[test]
    fn noiseless_flow_preserves_symplectic_spectrum() {
        // kappa_eff = gamma = 0 makes D = 0; the flow is symplectic and the
        // symplectic eigenvalues stay put to 1e-6 relative.
        let m = build_model(&fig3_params()).unwrap();
        let v0 = initial_state(3.0, 1.0).unwrap();
        let period = std::f64::consts::TAU / 1e4;
        let times: Vec<f64> = (0..=8).map(|i| i as f64 * period / 8.0).collect();
        let nus0 = v0.symplectic_eigenvalues();
        for p in evolve_cm(&m, &v0, &times).unwrap() {
            let nus = p.cov.symplectic_eigenvalues();
            for (nu, nu0) in nus.iter().zip(&nus0) {
                assert_relative_eq!(nu, nu0, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn long_time_evolution_reaches_steady_state() {
        let m = build_model(&params(0.999, 0.95, 0.0, 0.0)).unwrap();
        let vss = steady_state_cm(&m).unwrap();
        let v0 = initial_state(0.0, 0.0).unwrap();
        let t_end = 200.0 * std::f64::consts::TAU / 1e5;
        let traj = evolve_cm(&m, &v0, &[0.0, t_end]).unwrap();
        let diff = (traj.last().unwrap().cov.matrix() - vss.matrix()).norm();
        assert!(
            diff <= 1e-8 * vss.matrix().norm(),
            "endpoint off steady state by {:e} relative",
            diff / vss.matrix().norm()
        );
    }

    #[test]
    fn steady_state_independent_of_initial_state() {
        // Fast-relaxing parameters so two very different initial states meet
        // in a short simulated window: slowest channel is gamma/2 = 250 s^-1.
        let p = SystemParams {
            kappa1: 5e3,
            kappa2: 5e3,
            r_b: 0.5,
            theta: 0.0,
            delta: 0.0,
            g1: 0.9e4,
            g2: 1e4,
            gamma1: 500.0,
            gamma2: 500.0,
            nbar1: 5.0,
            nbar2: 2.0,
            omega1: 1e7,
            omega2: 2e7,
        };
        let m = build_model(&p).unwrap();
        let times = [0.0, 0.12];
        let a = evolve_cm(&m, &initial_state(0.0, 0.0).unwrap(), &times).unwrap();
        let b = evolve_cm(&m, &initial_state(40.0, 15.0).unwrap(), &times).unwrap();
        let va = a.last().unwrap().cov.matrix().clone();
        let vb = b.last().unwrap().cov.matrix().clone();
        assert!(
            (va - &vb).norm() <= 1e-8 * vb.norm(),
            "endpoints differ by {:e} relative",
            (a.last().unwrap().cov.matrix() - &vb).norm() / vb.norm()
        );
    }

    #[test]
    fn step_halving_converged() {
        let m = build_model(&fig3_params()).unwrap();
        let v0 = initial_state(0.0, 0.0).unwrap();
        let t_end = std::f64::consts::TAU / 1e4;
        let h = default_max_step(&m);
        let coarse = evolve_cm_with_step(&m, &v0, &[0.0, t_end], h).unwrap();
        let fine = evolve_cm_with_step(&m, &v0, &[0.0, t_end], h / 2.0).unwrap();
        let vc = coarse.last().unwrap().cov.matrix().clone();
        let vf = fine.last().unwrap().cov.matrix().clone();
        let rel = (vc - &vf).norm() / vf.norm();
        assert!(rel < 1e-8, "halving changed the endpoint by {rel:e}");
    }

    #[test]
    fn decoupling_defect_examples() {
        let v = initial_state(1.0, 2.0).unwrap();
        assert_eq!(decoupling_defect(&v).unwrap(), 0.0);

        // Fig 3(a): defect small at t = 2pi/Delta, larger at pi/Delta.
        let m = build_model(&fig3_params()).unwrap();
        let v0 = initial_state(0.0, 0.0).unwrap();
        let period = std::f64::consts::TAU / 1e4;
        let traj = evolve_cm(&m, &v0, &[0.0, period / 2.0, period]).unwrap();
        let half = &traj[1];
        let full = &traj[2];
        let d_half = decoupling_defect(&half.cov).unwrap();
        let d_full = decoupling_defect(&full.cov).unwrap();
        assert!(d_full <= 1e-3 * full.cov.matrix().norm());
        assert!(d_half > d_full);

        let mech = full.cov.reduce(&MECHANICAL).unwrap();
        assert!(matches!(
            decoupling_defect(&mech),
            Err(Error::BadModeLabels(_))
        ));
    }

    #[test]
    fn trajectory_csv_shape() {
        let hdr = trajectory_csv_header();
        assert_eq!(hdr.split(',').count(), 22);
        assert!(hdr.starts_with("t,V11,V12"));
        assert!(hdr.ends_with("V56,V66"));

        let v0 = initial_state(0.0, 0.0).unwrap();
        let row = trajectory_csv_row(&TrajectoryPoint {
            t: 0.0,
            cov: v0,
            report: None,
        });
        assert_eq!(row.split(',').count(), 22);
    }

    #[test]
    fn monotone_noise_response() {
        // Raising nbar1 never lowers any steady-state mechanical variance.
        let base = [0.0, 50.0, 200.0, 1000.0];
        for (ratio, r_b) in [(0.9, 0.5), (0.8, 0.0), (0.95, 0.9)] {
            let mut prev: Option<Vec<f64>> = None;
            for &n1 in &base {
                let m = build_model(&params(ratio, r_b, n1, 10.0)).unwrap();
                let v = steady_state_cm(&m).unwrap();
                let diag: Vec<f64> = (2..6).map(|i| v.matrix()[(i, i)]).collect();
                if let Some(p) = &prev {
                    for (now, before) in diag.iter().zip(p) {
                        assert!(now + 1e-9 * before >= *before);
                    }
                }
                prev = Some(diag);
            }
        }
    }
}
