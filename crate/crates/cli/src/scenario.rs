//! Scenario configuration: a single TOML file per experiment. Unknown keys
//! are rejected so typos surface as config errors instead of silently using
//! defaults.

use std::path::Path;

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Phase,
    Static,
    Dynamic,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Phase => "phase",
            Kind::Static => "static",
            Kind::Dynamic => "dynamic",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsSection {
    pub slave: String,
    pub master: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleSection {
    /// Seed state for the limit-cycle search.
    pub seed_point: Vec<f64>,
    pub period_guess: f64,
    /// Optional point the master cycle's time origin is moved to.
    pub master_anchor: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSection {
    pub epsilon: f64,
    pub delta: f64,
    pub x0: Vec<f64>,
    pub n_periods: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    /// Master initial condition generating the reference trajectory.
    pub x0: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKey {
    Raw,
    Sliding,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticSection {
    pub gains: Vec<f64>,
    pub mode: ModeKey,
    pub x0: Vec<f64>,
    pub t_end: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicSection {
    /// Diagonal gain matrix, exclusive with `b`.
    pub b_diag: Option<Vec<f64>>,
    /// Full gain matrix rows, exclusive with `b_diag`.
    pub b: Option<Vec<Vec<f64>>>,
    /// Diagonal surface matrix, exclusive with `c`.
    pub c_diag: Option<Vec<f64>>,
    /// Full symmetric surface matrix rows.
    pub c: Option<Vec<Vec<f64>>>,
    pub epsilon: f64,
    pub xi0: Vec<f64>,
    pub t_end: f64,
    /// Integration step; defaults to `epsilon/20`.
    pub h: Option<f64>,
    /// Custom initial control (defaults to the equivalent control at 0).
    pub u0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    /// `p(t) = amplitude · sin(frequency·t) · (1, …, 1)`.
    pub amplitude: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Trace sampling interval; defaults to horizon/4096.
    pub trace_dt: Option<f64>,
    /// Plot windows (phase: in period units; others: in time units).
    pub plot_windows: Option<Vec<(f64, f64)>>,
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsSection {
    // phase
    pub lag_reduction_max: Option<f64>,
    pub final_lag_max_period_fraction: Option<f64>,
    pub control_lag_change_max: Option<f64>,
    pub prop_residual_max: Option<f64>,
    // static
    pub post_hit_max_err: Option<f64>,
    pub hit_within_bound: Option<bool>,
    pub contact_rate_ratio_min: Option<f64>,
    // dynamic
    pub tail_error_max: Option<f64>,
    pub chatter_max: Option<usize>,
}

/// A fully parsed scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Kind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub models: ModelsSection,
    pub cycle: Option<CycleSection>,
    pub phase: Option<PhaseSection>,
    pub reference: Option<ReferenceSection>,
    #[serde(rename = "static")]
    pub static_: Option<StaticSection>,
    pub certify: Option<CertifySection>,
    pub dynamic: Option<DynamicSection>,
    pub perturbation: Option<PerturbationSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub thresholds: ThresholdsSection,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let scenario: Scenario = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source: Box::new(source),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        for name in [&self.models.slave, &self.models.master] {
            if synclab_core::models::by_name(name).is_none() {
                return invalid(format!(
                    "unknown model '{name}' (available: {})",
                    synclab_core::models::MODEL_NAMES.join(", ")
                ));
            }
        }
        match self.kind {
            Kind::Phase => {
                let cycle = self
                    .cycle
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("phase runs need a [cycle] table".into()))?;
                let phase = self
                    .phase
                    .as_ref()
                    .ok_or_else(|| ConfigError::Invalid("phase runs need a [phase] table".into()))?;
                if phase.epsilon < 0.0 || phase.delta < 0.0 {
                    return invalid("epsilon and delta must be non-negative".into());
                }
                if phase.n_periods < 2 {
                    return invalid("n_periods must be at least 2".into());
                }
                if cycle.period_guess <= 0.0 {
                    return invalid("period_guess must be positive".into());
                }
            }
            Kind::Static => {
                let st = self.static_.as_ref().ok_or_else(|| {
                    ConfigError::Invalid("static runs need a [static] table".into())
                })?;
                self.reference.as_ref().ok_or_else(|| {
                    ConfigError::Invalid("static runs need a [reference] table".into())
                })?;
                if st.gains.iter().any(|&b| b >= 0.0) {
                    return invalid("all gains must be negative".into());
                }
                if st.h <= 0.0 || st.t_end <= 0.0 {
                    return invalid("h and t_end must be positive".into());
                }
                if let Some(cert) = &self.certify {
                    if cert.box_lo.len() != cert.box_hi.len()
                        || cert.box_lo.iter().zip(&cert.box_hi).any(|(a, b)| a > b)
                    {
                        return invalid("certify box must satisfy box_lo <= box_hi".into());
                    }
                }
            }
            Kind::Dynamic => {
                let dy = self.dynamic.as_ref().ok_or_else(|| {
                    ConfigError::Invalid("dynamic runs need a [dynamic] table".into())
                })?;
                self.reference.as_ref().ok_or_else(|| {
                    ConfigError::Invalid("dynamic runs need a [reference] table".into())
                })?;
                if dy.epsilon <= 0.0 {
                    return invalid("epsilon must be positive".into());
                }
                match (&dy.b_diag, &dy.b) {
                    (Some(_), Some(_)) => {
                        return invalid("give either b_diag or b, not both".into())
                    }
                    (None, None) => return invalid("dynamic runs need b_diag or b".into()),
                    _ => {}
                }
                match (&dy.c_diag, &dy.c) {
                    (Some(_), Some(_)) => {
                        return invalid("give either c_diag or c, not both".into())
                    }
                    (None, None) => return invalid("dynamic runs need c_diag or c".into()),
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Sweep configuration: a base scenario plus one varied parameter.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Path of the base scenario, relative to the sweep file.
    pub scenario: String,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// `"epsilon"` (dynamic), `"gain"` (static, all components), or `"x0"`.
    pub parameter: String,
    /// Scalar grid for `epsilon`/`gain`.
    pub values: Option<Vec<f64>>,
    /// Vector grid for `x0`.
    pub points: Option<Vec<Vec<f64>>>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: SweepConfig = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source: Box::new(source),
        })?;
        match cfg.sweep.parameter.as_str() {
            "epsilon" | "gain" => {
                if cfg.sweep.values.is_none() || cfg.sweep.points.is_some() {
                    return Err(ConfigError::Invalid(format!(
                        "parameter '{}' takes scalar `values`",
                        cfg.sweep.parameter
                    )));
                }
            }
            "x0" => {
                if cfg.sweep.points.is_none() || cfg.sweep.values.is_some() {
                    return Err(ConfigError::Invalid(
                        "parameter 'x0' takes vector `points`".into(),
                    ));
                }
            }
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown sweep parameter '{other}' (epsilon, gain, x0)"
                )))
            }
        }
        Ok(cfg)
    }
}
