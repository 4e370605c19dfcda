//! Command implementations: each produces dataset file contents as strings
//! so the figure command can reuse them byte-for-byte.

use rayon::prelude::*;

use nlab_core::{
    build_model, decoupling_defect, evolve_cm, initial_state, is_stable, maximize_bell, report,
    steady_state_cm, BellKind, CovMat, Error as CoreError, LinearModel, MeasureReport, OptConfig,
    SystemParams, MECHANICAL,
};

use crate::config::{apply_axis, BellChoice, EvolveConfig, SteadyConfig, SweepConfig};

/// Command failure carrying its process exit code.
#[derive(Debug)]
pub enum CmdError {
    /// Exit 2: no steady state exists (or a whole sweep is unstable).
    Unstable(String),
    /// Exit 3: the integrator could not hold physicality.
    Integrator(String),
    /// Exit 4: unknown figure index.
    UnknownFigure(u32),
    /// Exit 1: everything else (bad config, solver defect, I/O).
    Other(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Unstable(_) => 2,
            CmdError::Integrator(_) => 3,
            CmdError::UnknownFigure(_) => 4,
            CmdError::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Unstable(m) => write!(f, "{m}"),
            CmdError::Integrator(m) => write!(f, "integrator failure: {m}"),
            CmdError::UnknownFigure(n) => write!(f, "unknown figure index {n} (expected 1..=5)"),
            CmdError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::UnstableModel { .. } => CmdError::Unstable(e.to_string()),
            CoreError::StepTooLarge { .. } => CmdError::Integrator(e.to_string()),
            other => CmdError::Other(other.to_string()),
        }
    }
}

pub type CmdResult<T> = Result<T, CmdError>;

/// Deterministic per-item seed: the optimizer at grid row / sample `index`
/// sees the same seed regardless of worker count or execution order.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x}")
    }
}

fn bell_columns(bell: &[BellChoice]) -> String {
    let mut s = String::new();
    if bell.contains(&BellChoice::Parity) {
        s.push_str(",B_max");
    }
    if bell.contains(&BellChoice::Onoff) {
        s.push_str(",Bp_max");
    }
    s
}

/// Mechanical-state evaluation shared by all commands.
struct PointEval {
    report: MeasureReport,
    bell_parity: Option<nlab_core::BellResult>,
    bell_onoff: Option<nlab_core::BellResult>,
}

fn eval_mech(
    mech: &CovMat,
    bell: &[BellChoice],
    opt: &OptConfig,
) -> Result<PointEval, CoreError> {
    let rep = report(mech)?;
    let mut parity = None;
    let mut onoff = None;
    if bell.contains(&BellChoice::Parity) {
        parity = Some(maximize_bell(mech, BellKind::Parity, opt)?);
    }
    if bell.contains(&BellChoice::Onoff) {
        onoff = Some(maximize_bell(mech, BellKind::Onoff, opt)?);
    }
    Ok(PointEval {
        report: rep,
        bell_parity: parity,
        bell_onoff: onoff,
    })
}

fn eval_columns(ev: &PointEval) -> String {
    let mut s = ev.report.csv_row();
    if let Some(b) = &ev.bell_parity {
        s.push_str(&format!(",{}", fmt_f64(b.value)));
    }
    if let Some(b) = &ev.bell_onoff {
        s.push_str(&format!(",{}", fmt_f64(b.value)));
    }
    s
}

/// Outputs of a `steady` run: the CSV and any Bell-result JSON documents.
pub struct SteadyOutput {
    pub csv: String,
    pub bell_json: Vec<(String, String)>,
}

pub fn run_steady(cfg: &SteadyConfig, cli_seed: u64) -> CmdResult<SteadyOutput> {
    cfg.params.validate()?;
    let model = build_model(&cfg.params)?;
    if !is_stable(&model) {
        let (_, eig) = nlab_core::dynamics::max_real_eigenvalue(&model);
        return Err(CmdError::Unstable(
            CoreError::UnstableModel {
                re: eig.re,
                im: eig.im,
            }
            .to_string(),
        ));
    }
    let v = steady_state_cm(&model)?;
    let mech = v.reduce(&MECHANICAL)?;
    let opt = cfg.opt.resolve(cli_seed);
    let ev = eval_mech(&mech, &cfg.bell, &opt)?;

    let mut csv = format!("{}{}\n", MeasureReport::csv_header(), bell_columns(&cfg.bell));
    csv.push_str(&eval_columns(&ev));
    csv.push('\n');

    let mut bell_json = Vec::new();
    if let Some(b) = &ev.bell_parity {
        bell_json.push(("bell_parity.json".to_string(), b.to_json()));
    }
    if let Some(b) = &ev.bell_onoff {
        bell_json.push(("bell_onoff.json".to_string(), b.to_json()));
    }
    Ok(SteadyOutput { csv, bell_json })
}

/// Outputs of an `evolve` run: the raw covariance trajectory and the
/// per-sample measures table.
pub struct EvolveOutput {
    pub trajectory_csv: String,
    pub measures_csv: String,
}

pub fn run_evolve(cfg: &EvolveConfig, cli_seed: u64) -> CmdResult<EvolveOutput> {
    cfg.params.validate()?;
    let model = build_model(&cfg.params)?;
    let times = cfg.time.resolve(model.delta_eff())?;
    let v0 = initial_state(cfg.params.nbar1, cfg.params.nbar2)?;
    let traj = evolve_cm(&model, &v0, &times)?;

    let mut trajectory_csv = format!("{}\n", nlab_core::dynamics::trajectory_csv_header());
    for p in &traj {
        trajectory_csv.push_str(&nlab_core::dynamics::trajectory_csv_row(p));
        trajectory_csv.push('\n');
    }

    let with_period = cfg.params.delta != 0.0;
    let mut header = String::from("t");
    if with_period {
        header.push_str(",t_periods");
    }
    header.push(',');
    header.push_str(MeasureReport::csv_header());
    header.push_str(&bell_columns(&cfg.bell));
    let opt0 = cfg.opt.resolve(cli_seed);

    let rows: Vec<CmdResult<String>> = traj
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mech = p.cov.reduce(&MECHANICAL)?;
            let mut opt = opt0.clone();
            opt.seed = derive_seed(opt0.seed, i as u64);
            let ev = eval_mech(&mech, &cfg.bell, &opt)?;
            let mut row = fmt_f64(p.t);
            if with_period {
                row.push_str(&format!(
                    ",{}",
                    fmt_f64(p.t * cfg.params.delta.abs() / std::f64::consts::TAU)
                ));
            }
            row.push(',');
            row.push_str(&eval_columns(&ev));
            Ok(row)
        })
        .collect();

    let mut measures_csv = format!("{header}\n");
    for r in rows {
        measures_csv.push_str(&r?);
        measures_csv.push('\n');
    }
    Ok(EvolveOutput {
        trajectory_csv,
        measures_csv,
    })
}

/// Outputs of a `sweep` run.
pub struct SweepOutput {
    pub csv: String,
    pub n_stable: usize,
    pub n_points: usize,
}

fn transient_state(
    model: &LinearModel,
    params: &SystemParams,
    t: f64,
) -> Result<CovMat, CoreError> {
    let v0 = initial_state(params.nbar1, params.nbar2)?;
    let traj = evolve_cm(model, &v0, &[0.0, t])?;
    Ok(traj.into_iter().last().expect("nonempty trajectory").cov)
}

pub fn run_sweep(cfg: &SweepConfig, cli_seed: u64) -> CmdResult<SweepOutput> {
    cfg.params.validate()?;
    cfg.validate()?;
    let axes = &cfg.axes;
    let grids: Vec<Vec<f64>> = axes.iter().map(|a| a.values()).collect();
    let mut points: Vec<Vec<f64>> = Vec::new();
    match grids.len() {
        1 => {
            for &x in &grids[0] {
                points.push(vec![x]);
            }
        }
        2 => {
            // Row-major: the first axis is the slow index.
            for &x in &grids[0] {
                for &y in &grids[1] {
                    points.push(vec![x, y]);
                }
            }
        }
        _ => unreachable!("validated"),
    }

    let opt0 = cfg.opt.resolve(cli_seed);
    let n_bell_cols = bell_columns(&cfg.bell).matches(',').count();

    let rows: Vec<CmdResult<(bool, String)>> = points
        .par_iter()
        .enumerate()
        .map(|(i, coords)| {
            let mut p = cfg.params.clone();
            for (ax, &v) in axes.iter().zip(coords.iter()) {
                apply_axis(&mut p, &ax.param, v)?;
            }
            p.validate()?;
            let model = build_model(&p)?;
            let stable = is_stable(&model);

            let mut row: String = coords
                .iter()
                .map(|v| fmt_f64(*v))
                .collect::<Vec<_>>()
                .join(",");

            let mech = if let Some(t) = cfg.evaluate_at {
                Some(transient_state(&model, &p, t)?.reduce(&MECHANICAL)?)
            } else if stable {
                Some(steady_state_cm(&model)?.reduce(&MECHANICAL)?)
            } else {
                None
            };

            match mech {
                Some(mech) => {
                    let mut opt = opt0.clone();
                    opt.seed = derive_seed(opt0.seed, i as u64);
                    let ev = eval_mech(&mech, &cfg.bell, &opt)?;
                    row.push_str(&format!(",{stable},"));
                    row.push_str(&eval_columns(&ev));
                    Ok((stable, row))
                }
                None => {
                    // Unstable steady-state point: NaN measures, flagged.
                    row.push_str(",false,NaN,NaN,NaN,NaN,NaN,false");
                    for _ in 0..n_bell_cols {
                        row.push_str(",NaN");
                    }
                    Ok((false, row))
                }
            }
        })
        .collect();

    let mut header: String = axes
        .iter()
        .map(|a| a.param.clone())
        .collect::<Vec<_>>()
        .join(",");
    header.push_str(",stable,");
    header.push_str(MeasureReport::csv_header());
    header.push_str(&bell_columns(&cfg.bell));

    let mut csv = format!("{header}\n");
    let mut n_stable = 0;
    let n_points = points.len();
    for r in rows {
        let (stable, row) = r?;
        if stable {
            n_stable += 1;
        }
        csv.push_str(&row);
        csv.push('\n');
    }

    if cfg.evaluate_at.is_none() && n_stable == 0 {
        return Err(CmdError::Unstable(format!(
            "all {n_points} sweep points are unstable"
        )));
    }
    Ok(SweepOutput {
        csv,
        n_stable,
        n_points,
    })
}

pub fn write_file(dir: &std::path::Path, name: &str, content: &str) -> CmdResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CmdError::Other(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, content)
        .map_err(|e| CmdError::Other(format!("cannot write {}: {e}", path.display())))
}
