//! Scalar event detection on stored trajectories: Poincaré-section hits and
//! sign-switch instants.

use crate::field::StateVec;
use crate::traj::Trajectory;

/// Which zero crossings of the scalar to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// Scalar passes from negative to positive.
    Rising,
    /// Scalar passes from positive to negative.
    Falling,
    Both,
}

const TIME_TOL: f64 = 1e-10;
const VALUE_TOL: f64 = 1e-8;

/// Locate zero crossings of `scalar(t, x(t))` along `traj`.
///
/// Each root is bracketed on the stored grid and refined by bisection on the
/// interpolant to time tolerance `1e-10`; the refined root is additionally
/// polished until the interpolated scalar is below `1e-8` in magnitude.
/// Returns `(time, state)` pairs in increasing time order; empty if the scalar
/// never crosses.
pub fn detect_crossing<S: Fn(f64, &StateVec) -> f64>(
    traj: &Trajectory,
    scalar: S,
    direction: CrossingDirection,
) -> Vec<(f64, StateVec)> {
    let times = traj.times();
    let mut out: Vec<(f64, StateVec)> = Vec::new();
    if times.len() < 2 {
        return out;
    }
    let values: Vec<f64> = times
        .iter()
        .zip(traj.states())
        .map(|(&t, x)| scalar(t, x))
        .collect();

    let dir_ok = |va: f64, vb: f64| match direction {
        CrossingDirection::Rising => va < 0.0 && vb > 0.0,
        CrossingDirection::Falling => va > 0.0 && vb < 0.0,
        CrossingDirection::Both => (va < 0.0 && vb > 0.0) || (va > 0.0 && vb < 0.0),
    };

    let push_root = |t: f64, out: &mut Vec<(f64, StateVec)>| {
        if let Some((t_prev, _)) = out.last() {
            if (t - t_prev).abs() < 10.0 * TIME_TOL {
                return;
            }
        }
        if let Ok(x) = traj.sample(t) {
            out.push((t, x));
        }
    };

    for k in 0..times.len() - 1 {
        let (va, vb) = (values[k], values[k + 1]);
        if va == 0.0 {
            // Root exactly on a node: classify from the neighboring values.
            let before = if k > 0 { values[k - 1] } else { -vb };
            if dir_ok(before, vb) || (vb == 0.0 && direction == CrossingDirection::Both) {
                push_root(times[k], &mut out);
            }
            continue;
        }
        if vb == 0.0 || !dir_ok(va, vb) {
            continue;
        }
        // Bisection on the interpolated scalar.
        let (mut lo, mut hi) = (times[k], times[k + 1]);
        let mut f_lo = va;
        let mut root = 0.5 * (lo + hi);
        for _ in 0..80 {
            root = 0.5 * (lo + hi);
            let f_mid = traj
                .sample(root)
                .map(|x| scalar(root, &x))
                .unwrap_or(f64::NAN);
            if !f_mid.is_finite() {
                break;
            }
            if f_mid == 0.0 {
                break;
            }
            if (f_mid > 0.0) == (f_lo > 0.0) {
                lo = root;
                f_lo = f_mid;
            } else {
                hi = root;
            }
            if hi - lo < TIME_TOL && f_mid.abs() <= VALUE_TOL {
                break;
            }
        }
        push_root(root, &mut out);
    }
    out
}
