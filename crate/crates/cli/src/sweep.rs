//! Parameter sweeps: run a base scenario across a grid and aggregate the
//! scalar metrics into one CSV. Per-row failures land in the error column;
//! the sweep itself always completes.

use std::path::{Path, PathBuf};

use crate::csvio::fmt_f64;
use crate::runner::{run_loaded_scenario, Overrides, RunError};
use crate::scenario::{ConfigError, Kind, Scenario, SweepConfig};

pub struct SweepOutcome {
    pub csv: String,
    pub rows: usize,
    pub out_dir: PathBuf,
}

fn apply_parameter(scenario: &mut Scenario, parameter: &str, value: &SweepValue) -> Result<(), ConfigError> {
    match (parameter, value) {
        ("epsilon", SweepValue::Scalar(v)) => {
            let dy = scenario
                .dynamic
                .as_mut()
                .ok_or_else(|| ConfigError::Invalid("epsilon sweep needs a dynamic scenario".into()))?;
            dy.epsilon = *v;
            Ok(())
        }
        ("gain", SweepValue::Scalar(v)) => {
            let st = scenario
                .static_
                .as_mut()
                .ok_or_else(|| ConfigError::Invalid("gain sweep needs a static scenario".into()))?;
            for g in &mut st.gains {
                *g = *v;
            }
            Ok(())
        }
        ("x0", SweepValue::Point(p)) => {
            match scenario.kind {
                Kind::Phase => scenario.phase.as_mut().unwrap().x0 = p.clone(),
                Kind::Static => scenario.static_.as_mut().unwrap().x0 = p.clone(),
                Kind::Dynamic => scenario.dynamic.as_mut().unwrap().xi0 = p.clone(),
            }
            Ok(())
        }
        _ => Err(ConfigError::Invalid(format!(
            "parameter '{parameter}' does not accept this value shape"
        ))),
    }
}

enum SweepValue {
    Scalar(f64),
    Point(Vec<f64>),
}

impl SweepValue {
    fn label(&self) -> String {
        match self {
            SweepValue::Scalar(v) => fmt_f64(*v),
            SweepValue::Point(p) => p
                .iter()
                .map(|v| fmt_f64(*v))
                .collect::<Vec<_>>()
                .join(";"),
        }
    }
}

pub fn run_sweep(path: &Path, overrides: &Overrides) -> Result<SweepOutcome, RunError> {
    let cfg = SweepConfig::load(path)?;
    let base_path = path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&cfg.scenario);
    let base = Scenario::load(&base_path)?;

    let values: Vec<SweepValue> = match (&cfg.sweep.values, &cfg.sweep.points) {
        (Some(vs), None) => vs.iter().map(|&v| SweepValue::Scalar(v)).collect(),
        (None, Some(ps)) => ps.iter().map(|p| SweepValue::Point(p.clone())).collect(),
        _ => unreachable!("validated at load"),
    };

    let out_dir = overrides
        .out_dir
        .clone()
        .unwrap_or_else(|| {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "sweep".to_string());
            PathBuf::from("runs").join(stem)
        });

    // Header comes from a dry-run metric listing once the first row succeeds;
    // until then collect rows as (label, metrics-or-error).
    let mut header: Option<Vec<String>> = None;
    let mut lines: Vec<(String, Result<Vec<(String, f64)>, String>)> = Vec::new();

    for value in &values {
        let mut scenario = base.clone();
        let row = apply_parameter(&mut scenario, &cfg.sweep.parameter, value)
            .map_err(RunError::from)
            .and_then(|()| {
                scenario.validate()?;
                run_loaded_scenario(
                    &base_path,
                    &scenario,
                    &Overrides {
                        out_dir: None,
                        seed: overrides.seed,
                        quiet: true,
                    },
                    false,
                )
            });
        match row {
            Ok(outcome) => {
                let metrics = outcome.report.scalar_metrics();
                if header.is_none() {
                    header = Some(metrics.iter().map(|(k, _)| k.clone()).collect());
                }
                lines.push((value.label(), Ok(metrics)));
            }
            Err(e) => lines.push((value.label(), Err(e.to_string()))),
        }
    }

    let metric_names = header.unwrap_or_default();
    let mut csv = String::new();
    csv.push_str(&cfg.sweep.parameter);
    for name in &metric_names {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push_str(",error\n");
    for (label, row) in &lines {
        csv.push_str(label);
        match row {
            Ok(metrics) => {
                for name in &metric_names {
                    csv.push(',');
                    let value = metrics
                        .iter()
                        .find(|(k, _)| k == name)
                        .map(|(_, v)| *v)
                        .unwrap_or(f64::NAN);
                    csv.push_str(&fmt_f64(value));
                }
                csv.push_str(",\n");
            }
            Err(msg) => {
                for _ in &metric_names {
                    csv.push(',');
                }
                csv.push(',');
                csv.push_str(&msg.replace([',', '\n'], ";"));
                csv.push('\n');
            }
        }
    }

    let rows = lines.len();
    Ok(SweepOutcome { csv, rows, out_dir })
}
