//! Explicit ODE integration: classical fixed-step RK4 and an embedded
//! Dormand–Prince 5(4) pair with step-size control.
//!
//! The fixed-step solver is the reference integrator for discontinuous
//! right-hand sides, where adaptive error control thrashes on sign switches
//! and ruins reproducibility. The adaptive solver is the default everywhere
//! else. Both store the derivative at every node so the returned
//! [`Trajectory`] has cubic-Hermite dense output.

use thiserror::Error;

use crate::field::{StateVec, VectorField};
use crate::traj::Trajectory;

/// Smallest step the adaptive controller may request before giving up.
pub const MIN_STEP: f64 = 1e-14;

const MAX_STEPS: usize = 100_000_000;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("state became non-finite at t = {t} (blow-up or step too large)")]
    NonFiniteState { t: f64 },
    #[error("required step {h:.3e} below {MIN_STEP:.0e} at t = {t} (stiffness or singularity)")]
    StepUnderflow { t: f64, h: f64 },
    #[error("exceeded {MAX_STEPS} steps before reaching the end time")]
    TooManySteps,
}

fn all_finite(x: &StateVec) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// One classical RK4 step from `(t, x)` with step `h`, given `k1 = f(t, x)`.
pub fn rk4_step<F: VectorField + ?Sized>(
    field: &F,
    t: f64,
    x: &StateVec,
    k1: &StateVec,
    h: f64,
) -> StateVec {
    let k2 = field.eval(t + 0.5 * h, &(x + k1 * (0.5 * h)));
    let k3 = field.eval(t + 0.5 * h, &(x + &k2 * (0.5 * h)));
    let k4 = field.eval(t + h, &(x + &k3 * h));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Fixed-step RK4 over `[t0, t1]`, sampled at every step.
///
/// Node times are computed as `t0 + k·h` (not accumulated) so the grid is
/// reproducible; a shortened final step lands on `t1` exactly.
pub fn integrate_fixed<F: VectorField + ?Sized>(
    field: &F,
    x0: &StateVec,
    t0: f64,
    t1: f64,
    h: f64,
) -> Result<Trajectory, OdeError> {
    assert!(h > 0.0, "step must be positive");
    assert!(t1 > t0, "t1 must exceed t0");
    let span = t1 - t0;
    let mut n_full = (span / h).floor() as usize;
    let mut remainder = span - n_full as f64 * h;
    if remainder <= 1e-9 * h {
        // Grid divides the span: absorb the sliver into the last full step.
        if n_full == 0 {
            n_full = 1;
        }
        remainder = 0.0;
    }
    let n_nodes = n_full + if remainder > 0.0 { 1 } else { 0 } + 1;
    if n_nodes > MAX_STEPS {
        return Err(OdeError::TooManySteps);
    }

    let mut times = Vec::with_capacity(n_nodes);
    let mut states = Vec::with_capacity(n_nodes);
    let mut derivs = Vec::with_capacity(n_nodes);

    let mut x = x0.clone();
    let mut t = t0;
    let mut k1 = field.eval(t, &x);
    times.push(t);
    states.push(x.clone());
    derivs.push(k1.clone());

    for step in 0..n_full {
        let target = if remainder == 0.0 && step == n_full - 1 {
            t1
        } else {
            t0 + (step + 1) as f64 * h
        };
        let x_new = rk4_step(field, t, &x, &k1, target - t);
        if !all_finite(&x_new) {
            return Err(OdeError::NonFiniteState { t: target });
        }
        t = target;
        x = x_new;
        k1 = field.eval(t, &x);
        times.push(t);
        states.push(x.clone());
        derivs.push(k1.clone());
    }
    if remainder > 0.0 {
        let x_new = rk4_step(field, t, &x, &k1, t1 - t);
        if !all_finite(&x_new) {
            return Err(OdeError::NonFiniteState { t: t1 });
        }
        x = x_new;
        k1 = field.eval(t1, &x);
        times.push(t1);
        states.push(x);
        derivs.push(k1);
    }
    Ok(Trajectory::new(times, states, derivs))
}

/// Outcome of an adaptive integration, with step statistics.
pub struct AdaptiveRun {
    pub trajectory: Trajectory,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// b (5th order) equals the last row of A (FSAL); b* is the embedded 4th order.
const B_ERR: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Embedded RK5(4) with per-step error control `|err_i| ≤ atol + rtol·|x_i|`.
pub fn integrate_adaptive<F: VectorField + ?Sized>(
    field: &F,
    x0: &StateVec,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    h_max: f64,
) -> Result<Trajectory, OdeError> {
    integrate_adaptive_detailed(field, x0, t0, t1, rtol, atol, h_max).map(|run| run.trajectory)
}

/// As [`integrate_adaptive`], also reporting accepted/rejected step counts.
pub fn integrate_adaptive_detailed<F: VectorField + ?Sized>(
    field: &F,
    x0: &StateVec,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    h_max: f64,
) -> Result<AdaptiveRun, OdeError> {
    assert!(rtol > 0.0 && atol > 0.0, "tolerances must be positive");
    assert!(t1 > t0, "t1 must exceed t0");
    let h_max = h_max.min(t1 - t0);

    let mut t = t0;
    let mut x = x0.clone();
    let mut k1 = field.eval(t, &x);
    let mut h = (h_max / 10.0).min((t1 - t0) / 100.0).max(MIN_STEP * 10.0);

    let mut times = vec![t];
    let mut states = vec![x.clone()];
    let mut derivs = vec![k1.clone()];
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    let mut k = vec![StateVec::zeros(x.len()); 7];
    while t < t1 {
        if accepted + rejected > MAX_STEPS {
            return Err(OdeError::TooManySteps);
        }
        h = h.min(t1 - t).min(h_max);
        if h < MIN_STEP {
            return Err(OdeError::StepUnderflow { t, h });
        }

        k[0] = k1.clone();
        for stage in 0..6 {
            let mut xs = x.clone();
            for (j, kj) in k.iter().take(stage + 1).enumerate() {
                let a = A[stage][j];
                if a != 0.0 {
                    xs += kj * (a * h);
                }
            }
            k[stage + 1] = field.eval(t + C[stage] * h, &xs);
        }
        // 5th-order solution: stage 6 was evaluated at x + h·Σ a6j kj, which is
        // exactly x_new (FSAL), so rebuild it from the same combination.
        let mut x_new = x.clone();
        for (j, kj) in k.iter().take(6).enumerate() {
            let a = A[5][j];
            if a != 0.0 {
                x_new += kj * (a * h);
            }
        }

        let mut err_norm: f64 = 0.0;
        for i in 0..x.len() {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += B_ERR[j] * kj[i];
            }
            e *= h;
            let tol = atol + rtol * x[i].abs().max(x_new[i].abs());
            err_norm = err_norm.max((e / tol).abs());
        }

        if !all_finite(&x_new) || !err_norm.is_finite() {
            // Retry with a smaller step before declaring blow-up.
            if h <= MIN_STEP * 2.0 {
                return Err(OdeError::NonFiniteState { t });
            }
            h *= 0.1;
            rejected += 1;
            continue;
        }

        if err_norm <= 1.0 {
            t += h;
            x = x_new;
            k1 = k[6].clone();
            times.push(t);
            states.push(x.clone());
            derivs.push(k1.clone());
            accepted += 1;
        } else {
            rejected += 1;
        }

        let scale = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= scale;
    }

    Ok(AdaptiveRun {
        trajectory: Trajectory::new(times, states, derivs),
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}
