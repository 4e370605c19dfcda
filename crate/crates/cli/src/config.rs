//! JSON configuration documents for the batch commands. All structures
//! reject unknown keys so typos fail fast.

use serde::{Deserialize, Serialize};

use nlab_core::{Error as CoreError, OptConfig, SystemParams};

/// Bell functionals requested alongside the standard measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellChoice {
    Parity,
    Onoff,
}

/// Optimizer knobs, all optional. A seed given here overrides the
/// command-line `--seed`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptSpec {
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub budget: Option<usize>,
    pub box_halfwidth: Option<f64>,
}

impl OptSpec {
    pub fn resolve(&self, cli_seed: u64) -> OptConfig {
        let mut cfg = OptConfig::default();
        cfg.seed = self.seed.unwrap_or(cli_seed);
        if let Some(s) = self.starts {
            cfg.n_starts = s;
        }
        if let Some(b) = self.budget {
            cfg.max_evals = b;
        }
        if let Some(w) = self.box_halfwidth {
            cfg.box_halfwidth = w;
        }
        cfg
    }
}

/// `steady` command: one steady state, one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyConfig {
    pub params: SystemParams,
    #[serde(default)]
    pub bell: Vec<BellChoice>,
    #[serde(default)]
    pub opt: OptSpec,
}

/// Sampling grid of an `evolve` run: exactly one of the three forms.
///
/// * `times`: explicit list starting at 0;
/// * `t_max` + `samples`: uniform grid on [0, t_max];
/// * `periods` + `samples_per_period`: uniform grid in units of 2π/Δ̃.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periods: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_period: Option<usize>,
}

impl TimeSpec {
    pub fn resolve(&self, delta_eff: f64) -> Result<Vec<f64>, CoreError> {
        let explicit = self.times.is_some();
        let linear = self.t_max.is_some() || self.samples.is_some();
        let periodic = self.periods.is_some() || self.samples_per_period.is_some();
        match (explicit, linear, periodic) {
            (true, false, false) => {
                let t = self.times.clone().unwrap();
                if t.first() != Some(&0.0) {
                    return Err(CoreError::InvalidParam(
                        "explicit time grid must start at 0".into(),
                    ));
                }
                Ok(t)
            }
            (false, true, false) => {
                let t_max = self.t_max.ok_or_else(|| {
                    CoreError::InvalidParam("t_max requires samples and vice versa".into())
                })?;
                let samples = self.samples.ok_or_else(|| {
                    CoreError::InvalidParam("t_max requires samples and vice versa".into())
                })?;
                if !(t_max > 0.0) || samples < 2 {
                    return Err(CoreError::InvalidParam(
                        "need t_max > 0 and samples >= 2".into(),
                    ));
                }
                Ok((0..samples)
                    .map(|i| t_max * i as f64 / (samples - 1) as f64)
                    .collect())
            }
            (false, false, true) => {
                let periods = self.periods.ok_or_else(|| {
                    CoreError::InvalidParam(
                        "periods requires samples_per_period and vice versa".into(),
                    )
                })?;
                let spp = self.samples_per_period.ok_or_else(|| {
                    CoreError::InvalidParam(
                        "periods requires samples_per_period and vice versa".into(),
                    )
                })?;
                if delta_eff == 0.0 {
                    return Err(CoreError::InvalidParam(
                        "period-based time grid needs a nonzero detuning".into(),
                    ));
                }
                if periods == 0 || spp == 0 {
                    return Err(CoreError::InvalidParam(
                        "need periods >= 1 and samples_per_period >= 1".into(),
                    ));
                }
                let period = std::f64::consts::TAU / delta_eff.abs();
                Ok((0..=periods as usize * spp)
                    .map(|i| period * i as f64 / spp as f64)
                    .collect())
            }
            _ => Err(CoreError::InvalidParam(
                "time grid must be given as exactly one of: times, t_max+samples, periods+samples_per_period"
                    .into(),
            )),
        }
    }
}

/// `evolve` command: trajectory of the covariance matrix with measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub params: SystemParams,
    pub time: TimeSpec,
    #[serde(default)]
    pub bell: Vec<BellChoice>,
    #[serde(default)]
    pub opt: OptSpec,
}

/// One linear sweep axis. `param` is a `SystemParams` field name or one of
/// the linked axes `g1_ratio` (G1 = value·G2), `gamma` (γ₁ = γ₂ = value),
/// `nbar_pair` (n̄₁ = value, n̄₂ = value/2), `kappa_pair` (κ₁ = κ₂ = value/2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| {
                if self.count == 1 {
                    self.min
                } else {
                    self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
                }
            })
            .collect()
    }
}

/// `sweep` command: one- or two-axis grid of steady (or fixed-time) states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub params: SystemParams,
    pub axes: Vec<AxisSpec>,
    /// Evolve each grid point from the separable initial state to this time
    /// instead of solving for the steady state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluate_at: Option<f64>,
    #[serde(default)]
    pub bell: Vec<BellChoice>,
    #[serde(default)]
    pub opt: OptSpec,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(CoreError::InvalidParam(format!(
                "sweep needs one or two axes, got {}",
                self.axes.len()
            )));
        }
        for ax in &self.axes {
            if ax.count < 2 {
                return Err(CoreError::InvalidParam(format!(
                    "axis '{}' needs count >= 2",
                    ax.param
                )));
            }
            let mut probe = self.params.clone();
            apply_axis(&mut probe, &ax.param, ax.min)?;
        }
        if let Some(t) = self.evaluate_at {
            if !(t > 0.0) {
                return Err(CoreError::InvalidParam(format!(
                    "evaluate_at = {t} must be > 0"
                )));
            }
        }
        Ok(())
    }
}

/// Set one swept parameter on a parameter set.
pub fn apply_axis(p: &mut SystemParams, name: &str, value: f64) -> Result<(), CoreError> {
    match name {
        "kappa1" => p.kappa1 = value,
        "kappa2" => p.kappa2 = value,
        "r_B" => p.r_b = value,
        "theta" => p.theta = value,
        "Delta" => p.delta = value,
        "G1" => p.g1 = value,
        "G2" => p.g2 = value,
        "gamma1" => p.gamma1 = value,
        "gamma2" => p.gamma2 = value,
        "nbar1" => p.nbar1 = value,
        "nbar2" => p.nbar2 = value,
        "omega1" => p.omega1 = value,
        "omega2" => p.omega2 = value,
        "g1_ratio" => p.g1 = value * p.g2,
        "gamma" => {
            p.gamma1 = value;
            p.gamma2 = value;
        }
        "nbar_pair" => {
            p.nbar1 = value;
            p.nbar2 = value / 2.0;
        }
        "kappa_pair" => {
            p.kappa1 = value / 2.0;
            p.kappa2 = value / 2.0;
        }
        other => {
            return Err(CoreError::InvalidParam(format!(
                "unknown sweep parameter '{other}'"
            )))
        }
    }
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> anyhow::Result<T> {
    let doc = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&doc).map_err(|e| anyhow::anyhow!("bad config {}: {e}", path.display()))
}
