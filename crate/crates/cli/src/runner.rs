//! Scenario execution: build the pipeline for the scenario kind, write
//! trace.csv / report.json / plot.svg, and evaluate thresholds.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use synclab_core::cycle::{find_limit_cycle, LimitCycle};
use synclab_core::field::{ClosureField, SharedField, StateVec, VectorField};
use synclab_core::linalg::SymMatrix;
use synclab_core::models;
use synclab_core::ode::integrate_adaptive;
use synclab_core::phase::{simulate_phase_sync, PhaseCoupling};
use synclab_core::singular::{
    simulate_dynamic, simulate_dynamic_perturbed, DynamicFeedback, DynamicRunOptions,
};
use synclab_core::sliding::{
    certify_gains, simulate_static, BoxRegion, SlidingError, SlidingMode, StaticFeedback,
};
use synclab_core::traj::Trajectory;

use crate::csvio::render_csv;
use crate::report::{
    DynamicMetrics, PhaseMetrics, StaticMetrics, SyncReport, ThresholdCheck,
};
use crate::scenario::{ConfigError, Kind, ModeKey, Scenario};
use crate::svg::{decimate, render, LineStyle, Panel, Series};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl RunError {
    /// run: exit 0 ok, 1 threshold fail, 2 config error, 3 simulation failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Simulation(_) | RunError::Io { .. } => 3,
        }
    }
}

fn sim_err<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Simulation(e.to_string())
}

/// CLI-level overrides applied on top of the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub quiet: bool,
}

pub struct RunOutcome {
    pub report: SyncReport,
    pub out_dir: PathBuf,
}

fn resolve_out_dir(path: &Path, scenario: &Scenario, overrides: &Overrides) -> PathBuf {
    if let Some(dir) = &overrides.out_dir {
        return dir.clone();
    }
    if let Some(dir) = &scenario.output.out_dir {
        return PathBuf::from(dir);
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "scenario".to_string());
    PathBuf::from("runs").join(stem)
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| RunError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn field_by_name(name: &str) -> SharedField {
    models::by_name(name).expect("validated at config load")
}

/// Integrate the master reference trajectory used by the static and dynamic
/// pipelines.
pub fn master_reference(
    master: &SharedField,
    x0: &[f64],
    t_end: f64,
) -> Result<Trajectory, RunError> {
    integrate_adaptive(
        master,
        &DVector::from_column_slice(x0),
        0.0,
        t_end,
        1e-10,
        1e-12,
        0.01,
    )
    .map_err(sim_err)
}

/// Run one scenario file end to end.
pub fn run_scenario(path: &Path, overrides: &Overrides) -> Result<RunOutcome, RunError> {
    let scenario = Scenario::load(path)?;
    run_loaded_scenario(path, &scenario, overrides, true)
}

/// Run an already-parsed scenario (sweeps reuse this without artifacts).
pub fn run_loaded_scenario(
    path: &Path,
    scenario: &Scenario,
    overrides: &Overrides,
    write_artifacts: bool,
) -> Result<RunOutcome, RunError> {
    let seed = overrides.seed.unwrap_or(scenario.seed);
    let out_dir = resolve_out_dir(path, scenario, overrides);
    let scenario_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_default();

    let (report, artifacts) = match scenario.kind {
        Kind::Phase => run_phase(scenario, seed, &scenario_name)?,
        Kind::Static => run_static(scenario, seed, &scenario_name)?,
        Kind::Dynamic => run_dynamic(scenario, seed, &scenario_name)?,
    };

    if write_artifacts {
        write_file(&out_dir.join("trace.csv"), &artifacts.trace_csv)?;
        write_file(
            &out_dir.join("report.json"),
            &format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable")),
        )?;
        write_file(&out_dir.join("plot.svg"), &artifacts.plot_svg)?;
        if !overrides.quiet {
            println!("wrote {}", out_dir.display());
            for check in &report.thresholds {
                println!(
                    "  [{}] {} = {:.6} {} {:.6}",
                    if check.pass { "pass" } else { "FAIL" },
                    check.name,
                    check.value,
                    check.op,
                    check.limit
                );
            }
        }
    }

    Ok(RunOutcome { report, out_dir })
}

struct Artifacts {
    trace_csv: String,
    plot_svg: String,
}

fn trace_grid(t_end: f64, trace_dt: Option<f64>) -> Vec<f64> {
    let dt = trace_dt.unwrap_or(t_end / 4096.0);
    let n = (t_end / dt).floor() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    if *ts.last().unwrap() < t_end - 1e-12 * t_end {
        ts.push(t_end);
    }
    ts
}

fn series(points: Vec<(f64, f64)>, label: &str, style: LineStyle, color: &'static str) -> Series {
    Series {
        label: label.to_string(),
        style,
        color,
        points: decimate(points, 1200),
    }
}

// ---------------------------------------------------------------------------
// phase
// ---------------------------------------------------------------------------

/// Locate the slave/master cycles for a phase scenario. Exposed for the
/// acceptance suite, which reuses the exact pipeline.
pub fn phase_cycles(scenario: &Scenario) -> Result<(LimitCycle, LimitCycle), RunError> {
    let cycle_cfg = scenario.cycle.as_ref().expect("validated");
    let seed_point = DVector::from_column_slice(&cycle_cfg.seed_point);
    let slave_field = field_by_name(&scenario.models.slave);
    let slave_cycle = find_limit_cycle(slave_field, &seed_point, cycle_cfg.period_guess)
        .map_err(sim_err)?;

    let master_cycle = if scenario.models.master == scenario.models.slave {
        slave_cycle.clone()
    } else {
        let master_field = field_by_name(&scenario.models.master);
        find_limit_cycle(master_field, &seed_point, cycle_cfg.period_guess).map_err(sim_err)?
    };
    let master_cycle = match &cycle_cfg.master_anchor {
        Some(anchor) => master_cycle
            .reanchor(&DVector::from_column_slice(anchor))
            .map_err(sim_err)?,
        None => master_cycle,
    };
    // Same model: use the same (re-anchored) cycle on both sides so the
    // preferred offset is zero by construction.
    let slave_cycle = if scenario.models.master == scenario.models.slave {
        master_cycle.clone()
    } else {
        slave_cycle
    };
    Ok((slave_cycle, master_cycle))
}

fn run_phase(
    scenario: &Scenario,
    seed: u64,
    name: &str,
) -> Result<(SyncReport, Artifacts), RunError> {
    let phase_cfg = scenario.phase.as_ref().expect("validated");
    let (slave_cycle, master_cycle) = phase_cycles(scenario)?;
    let coupling = PhaseCoupling::new(
        slave_cycle,
        master_cycle,
        phase_cfg.epsilon,
        phase_cfg.delta,
    )
    .map_err(sim_err)?;
    let period = coupling.period();
    let x0 = DVector::from_column_slice(&phase_cfg.x0);
    let (traj, ph_report) =
        simulate_phase_sync(&coupling, &x0, phase_cfg.n_periods).map_err(sim_err)?;

    let lag_first = ph_report.period_lags[1];
    let lag_last = *ph_report.period_lags.last().unwrap();

    let metrics = PhaseMetrics {
        period,
        theta0: ph_report.theta0,
        d_min: ph_report.d_min,
        lag_first_window: lag_first,
        lag_last_window: lag_last,
        lag_per_period: ph_report.period_lags.clone(),
        prop_residual: ph_report.prop_residual,
    };

    let mut checks = Vec::new();
    let th = &scenario.thresholds;
    if let Some(limit) = th.lag_reduction_max {
        let ratio = if lag_first.abs() > 0.0 {
            lag_last.abs() / lag_first.abs()
        } else {
            0.0
        };
        checks.push(ThresholdCheck::le("lag_reduction_ratio", ratio, limit));
    }
    if let Some(limit) = th.final_lag_max_period_fraction {
        checks.push(ThresholdCheck::le(
            "final_lag_period_fraction",
            lag_last.abs() / period,
            limit,
        ));
    }
    if let Some(limit) = th.prop_residual_max {
        checks.push(ThresholdCheck::le(
            "prop_residual",
            ph_report.prop_residual,
            limit,
        ));
    }

    // Trace over the full horizon.
    let t_end = phase_cfg.n_periods as f64 * period;
    let ts = trace_grid(t_end, scenario.output.trace_dt);
    let n = coupling.master().dim();
    let mut columns = vec!["t".to_string()];
    for prefix in ["x", "y0", "e"] {
        for i in 1..=n {
            columns.push(format!("{prefix}_{i}"));
        }
    }
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let x = traj.sample(t).map_err(sim_err)?;
        let y0 = coupling.master().state_at(t);
        let mut row = vec![t];
        row.extend(x.iter());
        row.extend(y0.iter());
        row.extend((x - y0).iter());
        rows.push(row);
    }

    // Two-panel figure over the configured period windows.
    let windows = scenario
        .output
        .plot_windows
        .clone()
        .unwrap_or_else(|| vec![(1.0, 2.0), ((phase_cfg.n_periods - 1) as f64, phase_cfg.n_periods as f64)]);
    let mut panels = Vec::new();
    for (a, b) in windows {
        let (w0, w1) = (a * period, b * period);
        let m = 800;
        let sample = |f: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> {
            (0..=m)
                .map(|k| {
                    let t = w0 + (w1 - w0) * k as f64 / m as f64;
                    (t, f(t))
                })
                .collect()
        };
        let x1 = sample(&|t| traj.sample(t).map(|v| v[0]).unwrap_or(f64::NAN));
        let y1 = sample(&|t| coupling.master().state_at(t)[0]);
        panels.push(Panel {
            title: format!("periods [{a}, {b}]"),
            x_label: "t".into(),
            y_label: "x_1".into(),
            series: vec![
                series(x1, "slave x_1", LineStyle::Solid, "#000000"),
                series(y1, "master y0_1", LineStyle::Dashed, "#888888"),
            ],
        });
    }

    let report = SyncReport {
        kind: "phase".into(),
        scenario: name.into(),
        seed,
        phase: Some(metrics),
        static_: None,
        dynamic: None,
        pass: checks.iter().all(|c| c.pass),
        thresholds: checks,
    };
    Ok((
        report,
        Artifacts {
            trace_csv: render_csv(&columns, &rows),
            plot_svg: render(&panels, 980, 380),
        },
    ))
}

// ---------------------------------------------------------------------------
// static
// ---------------------------------------------------------------------------

fn run_static(
    scenario: &Scenario,
    seed: u64,
    name: &str,
) -> Result<(SyncReport, Artifacts), RunError> {
    let st = scenario.static_.as_ref().expect("validated");
    let reference = scenario.reference.as_ref().expect("validated");
    let slave = field_by_name(&scenario.models.slave);
    let master = field_by_name(&scenario.models.master);
    let y0ref = master_reference(&master, &reference.x0, st.t_end)?;

    let mode = match st.mode {
        ModeKey::Raw => SlidingMode::Raw,
        ModeKey::Sliding => SlidingMode::FilippovSliding,
    };
    let fb = StaticFeedback::new(st.gains.clone(), mode).map_err(sim_err)?;

    let box_i = match &scenario.certify {
        Some(c) => BoxRegion::new(c.box_lo.clone(), c.box_hi.clone()),
        None => BoxRegion::new(vec![-10.0; fb.dim()], vec![10.0; fb.dim()]),
    };
    let certificate = match &scenario.certify {
        Some(c) => match certify_gains(&fb, &slave, &master, &y0ref, &box_i, c.samples, seed) {
            Ok(cert) => Some(Ok(cert)),
            Err(SlidingError::GainTooSmall { m_bound, mu }) => Some(Err((m_bound, mu))),
            Err(e) => return Err(sim_err(e)),
        },
        None => None,
    };

    let x0 = DVector::from_column_slice(&st.x0);
    let (traj, log, run) =
        simulate_static(&fb, &slave, &y0ref, &x0, st.t_end, st.h, &box_i).map_err(sim_err)?;

    let n = fb.dim();
    let mut pre_rates = vec![0.0; n];
    let mut post_rates = vec![0.0; n];
    for i in 0..n {
        if let Some(&first) = log.times[i].first() {
            if first > 0.0 {
                pre_rates[i] = log.rate(i, 0.0, 0.99 * first);
            }
            post_rates[i] = log.rate(i, first, st.t_end);
        }
    }

    let (cert_valid, m_bound, mu, t_hit_bound) = match &certificate {
        Some(Ok(cert)) => (
            true,
            Some(cert.m_bound),
            Some(cert.mu),
            Some(cert.hit_bound_for(run.v0)),
        ),
        Some(Err((m_bound, mu))) => (false, Some(*m_bound), Some(*mu), None),
        None => (false, None, None, None),
    };

    let metrics = StaticMetrics {
        v0: run.v0,
        hitting_time: run.hitting_time,
        capture_time: run.capture_time,
        post_hit_sup_err: run.post_hit_sup_err,
        v_final: run.v_final,
        certificate_valid: cert_valid,
        m_bound,
        mu,
        t_hit_bound,
        pre_contact_rates: pre_rates.clone(),
        post_contact_rates: post_rates.clone(),
        switch_counts: log.times.iter().map(|s| s.len()).collect(),
    };

    let mut checks = Vec::new();
    let th = &scenario.thresholds;
    if let Some(limit) = th.post_hit_max_err {
        checks.push(ThresholdCheck::le(
            "post_hit_sup_err",
            run.post_hit_sup_err.unwrap_or(f64::INFINITY),
            limit,
        ));
    }
    if th.hit_within_bound == Some(true) {
        let ok = match (&certificate, run.hitting_time) {
            (Some(Ok(cert)), Some(hit)) => hit <= cert.hit_bound_for(run.v0),
            _ => false,
        };
        checks.push(ThresholdCheck::boolean("hit_within_certificate_bound", ok));
    }
    if let Some(limit) = th.contact_rate_ratio_min {
        for i in 0..n {
            let ratio = if pre_rates[i] > 0.0 {
                post_rates[i] / pre_rates[i]
            } else if post_rates[i] > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            checks.push(ThresholdCheck::ge(
                &format!("contact_rate_ratio_{}", i + 1),
                ratio,
                limit,
            ));
        }
    }

    // Trace.
    let ts = trace_grid(st.t_end, scenario.output.trace_dt);
    let mut columns = vec!["t".to_string()];
    for prefix in ["x", "y0", "e"] {
        for i in 1..=n {
            columns.push(format!("{prefix}_{i}"));
        }
    }
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let x = traj.sample(t).map_err(sim_err)?;
        let y0 = y0ref.sample(t).map_err(sim_err)?;
        let mut row = vec![t];
        row.extend(x.iter());
        row.extend(y0.iter());
        row.extend((x - y0).iter());
        rows.push(row);
    }

    // Figure: full run plus a zoom around the hitting zone.
    let zoom = match run.hitting_time {
        Some(hit) => {
            let w0 = (hit - 0.5).max(0.0);
            (w0, (w0 + 2.0).min(st.t_end))
        }
        None => (0.8 * st.t_end, st.t_end),
    };
    let full_pts = |col: usize, from_ref: bool, (w0, w1): (f64, f64)| -> Vec<(f64, f64)> {
        // Sample at native step resolution inside the window, decimated later;
        // aliasing the raw switching into a dense band is the point.
        let m = 6000;
        (0..=m)
            .map(|k| {
                let t = w0 + (w1 - w0) * k as f64 / m as f64;
                let v = if from_ref {
                    y0ref.sample(t).map(|v| v[0]).unwrap_or(f64::NAN)
                } else {
                    traj.sample(t).map(|v| v[0]).unwrap_or(f64::NAN)
                };
                (t, v)
            })
            .collect()
    };
    let panels = vec![
        Panel {
            title: format!("t in [0, {:.2}]", st.t_end),
            x_label: "t".into(),
            y_label: "x_1".into(),
            series: vec![
                series(full_pts(0, false, (0.0, st.t_end)), "slave x_1", LineStyle::Solid, "#000000"),
                series(full_pts(0, true, (0.0, st.t_end)), "master y0_1", LineStyle::Dotted, "#888888"),
            ],
        },
        Panel {
            title: format!("hitting zone [{:.2}, {:.2}]", zoom.0, zoom.1),
            x_label: "t".into(),
            y_label: "x_1".into(),
            series: vec![
                series(full_pts(0, false, zoom), "slave x_1", LineStyle::Solid, "#000000"),
                series(full_pts(0, true, zoom), "master y0_1", LineStyle::Dotted, "#888888"),
            ],
        },
    ];

    let report = SyncReport {
        kind: "static".into(),
        scenario: name.into(),
        seed,
        phase: None,
        static_: Some(metrics),
        dynamic: None,
        pass: checks.iter().all(|c| c.pass),
        thresholds: checks,
    };
    Ok((
        report,
        Artifacts {
            trace_csv: render_csv(&columns, &rows),
            plot_svg: render(&panels, 980, 380),
        },
    ))
}

// ---------------------------------------------------------------------------
// dynamic
// ---------------------------------------------------------------------------

/// Build the dynamic feedback from a scenario (shared with the acceptance
/// suite and sweeps).
pub fn dynamic_feedback(scenario: &Scenario) -> Result<DynamicFeedback, RunError> {
    let dy = scenario.dynamic.as_ref().expect("validated");
    let n = dy.xi0.len();
    let b = match (&dy.b_diag, &dy.b) {
        (Some(diag), None) => DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        (None, Some(rows)) => matrix_from_rows(rows, n)?,
        _ => unreachable!("validated"),
    };
    let c_mat = match (&dy.c_diag, &dy.c) {
        (Some(diag), None) => SymMatrix::from_diag(diag),
        (None, Some(rows)) => SymMatrix::new(matrix_from_rows(rows, n)?).map_err(sim_err)?,
        _ => unreachable!("validated"),
    };
    DynamicFeedback::new(b, c_mat, dy.epsilon, DVector::from_column_slice(&dy.xi0))
        .map_err(sim_err)
}

fn matrix_from_rows(rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>, RunError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(RunError::Config(ConfigError::Invalid(format!(
            "matrix must be {n}x{n}"
        ))));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(n, n, &flat))
}

fn run_dynamic(
    scenario: &Scenario,
    seed: u64,
    name: &str,
) -> Result<(SyncReport, Artifacts), RunError> {
    let dy = scenario.dynamic.as_ref().expect("validated");
    let reference = scenario.reference.as_ref().expect("validated");
    let slave = field_by_name(&scenario.models.slave);
    let y0ref = {
        let master = field_by_name(&scenario.models.master);
        master_reference(&master, &reference.x0, dy.t_end)?
    };
    let fb = dynamic_feedback(scenario)?;
    let opts = DynamicRunOptions {
        u0: dy.u0.as_ref().map(|u| DVector::from_column_slice(u)),
        h: dy.h,
        output_dt: scenario.output.trace_dt.map(|dt| dt.min(dy.t_end / 64.0)),
    };

    // The master model is needed by value for the surface function; builtin
    // models are unit structs so match on the name.
    let (x_traj, u_traj, run) = match scenario.perturbation.as_ref() {
        None => match scenario.models.master.as_str() {
            "forced_master_nn" => simulate_dynamic(
                &fb,
                &slave,
                &models::ForcedMasterNn,
                &y0ref,
                dy.t_end,
                &opts,
            )
            .map_err(sim_err)?,
            other => {
                return Err(RunError::Config(ConfigError::Invalid(format!(
                    "dynamic runs support the forced_master_nn master (got {other})"
                ))))
            }
        },
        Some(p) => {
            let (amp, freq) = (p.amplitude, p.frequency);
            let n = fb.dim();
            let pert = ClosureField::new(n, false, move |t: f64, _: &StateVec| {
                DVector::from_element(n, amp * (freq * t).sin())
            });
            match scenario.models.master.as_str() {
                "forced_master_nn" => simulate_dynamic_perturbed(
                    &fb,
                    &slave,
                    &models::ForcedMasterNn,
                    &y0ref,
                    &pert,
                    dy.t_end,
                    &opts,
                )
                .map_err(sim_err)?,
                other => {
                    return Err(RunError::Config(ConfigError::Invalid(format!(
                        "dynamic runs support the forced_master_nn master (got {other})"
                    ))))
                }
            }
        }
    };

    let chatter = run.chatter_flips(0.5);
    let metrics = DynamicMetrics {
        epsilon: dy.epsilon,
        tail_error: run.tail_error,
        sup_tracking_error: run.sup_tracking_error,
        sup_reduced_mismatch: run.sup_reduced_mismatch,
        sup_u_mismatch_tail: run.sup_u_mismatch_tail,
        u_total_variation: run.u_total_variation.clone(),
        chatter_flips: chatter.clone(),
        u_zero_crossings: run.u_flip_times.iter().map(|f| f.len()).collect(),
    };

    let mut checks = Vec::new();
    let th = &scenario.thresholds;
    if let Some(limit) = th.tail_error_max {
        checks.push(ThresholdCheck::le("tail_error", run.tail_error, limit));
    }
    if let Some(limit) = th.chatter_max {
        checks.push(ThresholdCheck::le(
            "chatter_flips_max",
            chatter.iter().copied().max().unwrap_or(0) as f64,
            limit as f64,
        ));
    }

    // Trace with control columns.
    let n = fb.dim();
    let ts = trace_grid(dy.t_end, scenario.output.trace_dt);
    let mut columns = vec!["t".to_string()];
    for prefix in ["x", "y0", "e", "u"] {
        for i in 1..=n {
            columns.push(format!("{prefix}_{i}"));
        }
    }
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let x = x_traj.sample(t).map_err(sim_err)?;
        let u = u_traj.sample(t).map_err(sim_err)?;
        let y0 = y0ref.sample(t).map_err(sim_err)?;
        let mut row = vec![t];
        row.extend(x.iter());
        row.extend(y0.iter());
        row.extend((x - y0).iter());
        row.extend(u.iter());
        rows.push(row);
    }

    // Figure: full horizon plus a zoom near t = 2π.
    let two_pi = std::f64::consts::TAU;
    let zoom = (
        (two_pi - 0.5).max(0.0),
        (two_pi + 0.5).min(dy.t_end),
    );
    let sample_pts = |traj: &Trajectory, (w0, w1): (f64, f64)| -> Vec<(f64, f64)> {
        let m = 3000;
        (0..=m)
            .map(|k| {
                let t = w0 + (w1 - w0) * k as f64 / m as f64;
                (t, traj.sample(t).map(|v| v[0]).unwrap_or(f64::NAN))
            })
            .collect()
    };
    let panels = vec![
        Panel {
            title: format!("t in [0, {:.2}]", dy.t_end),
            x_label: "t".into(),
            y_label: "x_1".into(),
            series: vec![
                series(sample_pts(&x_traj, (0.0, dy.t_end)), "slave x_1", LineStyle::Solid, "#000000"),
                series(sample_pts(&y0ref, (0.0, dy.t_end)), "master y0_1", LineStyle::Dotted, "#888888"),
            ],
        },
        Panel {
            title: format!("zoom [{:.2}, {:.2}]", zoom.0, zoom.1),
            x_label: "t".into(),
            y_label: "x_1".into(),
            series: vec![
                series(sample_pts(&x_traj, zoom), "slave x_1", LineStyle::Solid, "#000000"),
                series(sample_pts(&y0ref, zoom), "master y0_1", LineStyle::Dotted, "#888888"),
            ],
        },
    ];

    let report = SyncReport {
        kind: "dynamic".into(),
        scenario: name.into(),
        seed,
        phase: None,
        static_: None,
        dynamic: Some(metrics),
        pass: checks.iter().all(|c| c.pass),
        thresholds: checks,
    };
    Ok((
        report,
        Artifacts {
            trace_csv: render_csv(&columns, &rows),
            plot_svg: render(&panels, 980, 380),
        },
    ))
}
