//! Phase synchronization of two limit cycles of equal period.
//!
//! The master cycle `y₀` and slave cycle `x₀` are compared through the
//! phase-distance functional
//!
//! ```text
//! D(s) = ∫₀ᵀ |x₀(τ+s) − y₀(τ)|² dτ,
//! ```
//!
//! whose unique minimizer `θ₀` is the preferred phase offset. The coupled
//! slave
//!
//! ```text
//! ẋ = f(x) + ε(|x−y₀(t)|² − Dmin/T − δ)·f(x)
//! ```
//!
//! locks, for small `ε` and `δ`, onto a T-periodic solution whose phase is a
//! zero of the bifurcation function `F_δ(θ) = D(θ) − Dmin − Tδ`. This module
//! evaluates `D`, locates `θ₀` and the zeros of `F_δ`, simulates the coupled
//! system, and measures per-period phase lags.

use thiserror::Error;

use crate::cycle::LimitCycle;
use crate::field::{StateVec, VectorField};
use crate::ode::{integrate_adaptive, OdeError};
use crate::traj::Trajectory;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("cycle periods differ by {rel:.3e} relative (limit 1e-6)")]
    PeriodMismatch { rel: f64 },
    #[error(
        "phase-distance minimum is not unique: D({theta_a:.6}) = {value_a:.6e} vs D({theta_b:.6}) = {value_b:.6e}"
    )]
    NonUniqueMin {
        theta_a: f64,
        value_a: f64,
        theta_b: f64,
        value_b: f64,
    },
    #[error("coupling strength and detuning must be non-negative")]
    InvalidParameter,
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Samples used by the phase-distance quadrature (trapezoid on a periodic
/// integrand, so accuracy is spectral in this count).
const QUAD_SAMPLES: usize = 2048;
/// Coarse grid for the argmin scan and the bifurcation-function profile.
const THETA_GRID: usize = 512;
/// Shifts tried by the per-period lag estimator.
const LAG_SHIFTS: usize = 512;

fn check_periods(slave: &LimitCycle, master: &LimitCycle) -> Result<f64, PhaseError> {
    let rel = (slave.period() - master.period()).abs() / master.period();
    if rel > 1e-6 {
        return Err(PhaseError::PeriodMismatch { rel });
    }
    Ok(master.period())
}

/// `∫₀ᵀ |x₀(τ+s) − y₀(τ)|² dτ` with the slave orbit shifted by `s`
/// (periodic interpolation on both cycles).
pub fn distance_integral(
    slave: &LimitCycle,
    master: &LimitCycle,
    s: f64,
) -> Result<f64, PhaseError> {
    let period = check_periods(slave, master)?;
    let n = QUAD_SAMPLES;
    let dt = period / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let tau = i as f64 * dt;
        let diff = slave.state_at(tau + s) - master.state_at(tau);
        acc += diff.norm_squared();
    }
    Ok(acc * dt)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    let v = f(t);
    (t, v)
}

fn circ_dist(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Argmin `θ₀` of the phase distance and the minimum value `Dmin`.
///
/// A 512-point grid scan is refined by golden-section search to `1e-8` in θ.
/// Two well-separated local minima agreeing within `1e-6` surface the
/// uniqueness hypothesis failing and are reported as
/// [`PhaseError::NonUniqueMin`].
pub fn theta_star(slave: &LimitCycle, master: &LimitCycle) -> Result<(f64, f64), PhaseError> {
    let period = check_periods(slave, master)?;
    let n = THETA_GRID;
    let dtheta = period / n as f64;
    let values: Vec<f64> = (0..n)
        .map(|j| distance_integral(slave, master, j as f64 * dtheta))
        .collect::<Result<_, _>>()?;

    // Local minima on the circular grid.
    let mut minima: Vec<usize> = Vec::new();
    for j in 0..n {
        let prev = values[(j + n - 1) % n];
        let next = values[(j + 1) % n];
        if values[j] <= prev && values[j] <= next {
            minima.push(j);
        }
    }
    // Drop plateau duplicates (adjacent indices).
    minima.dedup_by(|b, a| (*b + n - *a) % n <= 1);

    let refine = |j: usize| -> (f64, f64) {
        let theta = j as f64 * dtheta;
        let f = |t: f64| distance_integral(slave, master, t).unwrap_or(f64::INFINITY);
        let (t, v) = golden_min(f, theta - dtheta, theta + dtheta, 1e-8);
        (t.rem_euclid(period), v)
    };

    let mut refined: Vec<(f64, f64)> = minima.iter().map(|&j| refine(j)).collect();
    refined.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let best = refined[0];
    if refined.len() > 1 {
        let second = refined[1];
        let sep = circ_dist(best.0, second.0, period);
        if (second.1 - best.1).abs() < 1e-6 && sep > 5.0 * dtheta {
            return Err(PhaseError::NonUniqueMin {
                theta_a: best.0,
                value_a: best.1,
                theta_b: second.0,
                value_b: second.1,
            });
        }
    }
    Ok(best)
}

/// One transversal zero of `F_δ` with the sign of `F_δ′` there.
#[derive(Debug, Clone, Copy)]
pub struct MalkinRoot {
    pub theta: f64,
    pub slope: f64,
}

/// Sampled profile of the bifurcation function `F_δ(θ) = D(θ) − Dmin − Tδ`.
///
/// The zero with positive slope nearest `θ₀` is the phase this construction
/// selects; the slope sign of every root is reported so stability can also be
/// read under the opposite convention.
#[derive(Debug, Clone)]
pub struct MalkinProfile {
    pub delta: f64,
    pub theta0: f64,
    pub d_min: f64,
    /// θ grid over `[0, T]` (endpoint included).
    pub thetas: Vec<f64>,
    /// `F_δ` on the grid.
    pub values: Vec<f64>,
    /// Transversal zeros, in increasing θ.
    pub roots: Vec<MalkinRoot>,
    f0_at_theta0: f64,
    period: f64,
}

impl MalkinProfile {
    /// The root with `F′ > 0` closest to `θ₀` (circularly), if any.
    pub fn selected_root(&self) -> Option<&MalkinRoot> {
        self.roots.iter().filter(|r| r.slope > 0.0).min_by(|a, b| {
            let da = circ_dist(a.theta, self.theta0, self.period);
            let db = circ_dist(b.theta, self.theta0, self.period);
            da.partial_cmp(&db).unwrap()
        })
    }

    /// Endpoint mismatch `|F(T) − F(0)|` (periodicity witness).
    pub fn periodicity_mismatch(&self) -> f64 {
        (self.values.last().unwrap() - self.values.first().unwrap()).abs()
    }

    /// `F₀(θ₀) = D(θ₀) − Dmin`; zero up to refinement error by construction.
    pub fn f0_at_theta0(&self) -> f64 {
        self.f0_at_theta0
    }
}

/// Evaluate the Malkin bifurcation function for detuning `δ ≥ 0`.
pub fn malkin_profile(
    slave: &LimitCycle,
    master: &LimitCycle,
    delta: f64,
) -> Result<MalkinProfile, PhaseError> {
    if delta < 0.0 {
        return Err(PhaseError::InvalidParameter);
    }
    let period = check_periods(slave, master)?;
    let (theta0, d_min) = theta_star(slave, master)?;
    let f = |theta: f64| -> Result<f64, PhaseError> {
        Ok(distance_integral(slave, master, theta)? - d_min - period * delta)
    };

    let n = THETA_GRID;
    let mut thetas = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let theta = period * j as f64 / n as f64;
        thetas.push(theta);
        values.push(f(theta)?);
    }

    let mut roots = Vec::new();
    for j in 0..n {
        let (va, vb) = (values[j], values[j + 1]);
        if va == 0.0 || va * vb >= 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (thetas[j], thetas[j + 1]);
        let mut f_lo = va;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid)?;
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm > 0.0) == (f_lo > 0.0) {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-10 {
                break;
            }
        }
        let theta = 0.5 * (lo + hi);
        let h = period / 8192.0;
        let slope = (f(theta + h)? - f(theta - h)?) / (2.0 * h);
        roots.push(MalkinRoot { theta, slope });
    }

    let f0_at_theta0 = distance_integral(slave, master, theta0)? - d_min;
    Ok(MalkinProfile {
        delta,
        theta0,
        d_min,
        thetas,
        values,
        roots,
        f0_at_theta0,
        period,
    })
}

/// Controller configuration for the phase coupling.
#[derive(Clone)]
pub struct PhaseCoupling {
    /// Coupling strength; `0` gives the uncoupled control run.
    pub epsilon: f64,
    /// Detuning offset.
    pub delta: f64,
    slave: LimitCycle,
    master: LimitCycle,
    theta0: f64,
    d_min: f64,
    period: f64,
}

impl PhaseCoupling {
    pub fn new(
        slave: LimitCycle,
        master: LimitCycle,
        epsilon: f64,
        delta: f64,
    ) -> Result<Self, PhaseError> {
        if epsilon < 0.0 || delta < 0.0 {
            return Err(PhaseError::InvalidParameter);
        }
        let period = check_periods(&slave, &master)?;
        let (theta0, d_min) = theta_star(&slave, &master)?;
        Ok(Self {
            epsilon,
            delta,
            slave,
            master,
            theta0,
            d_min,
            period,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// `min_s ∫₀ᵀ |x₀(τ+s) − y₀(τ)|² dτ` (plain integral, no 1/T factor).
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn master(&self) -> &LimitCycle {
        &self.master
    }

    pub fn slave(&self) -> &LimitCycle {
        &self.slave
    }

    /// Right-hand side of the coupled slave:
    /// `(1 + ε(|x−y₀(t)|² − Dmin/T − δ))·f(x)`.
    ///
    /// The subtracted constant is the time-averaged minimum, hence the `1/T`
    /// on the stored plain-integral `d_min`.
    pub fn coupled_rhs(&self, t: f64, x: &StateVec) -> StateVec {
        let f = self.slave.field().eval(t, x);
        let y0 = self.master.state_at(t);
        let dist2 = (x - y0).norm_squared();
        let factor = 1.0 + self.epsilon * (dist2 - self.d_min / self.period - self.delta);
        f * factor
    }
}

/// The coupled slave as a [`VectorField`] (non-autonomous through `y₀(t)`).
pub struct PhaseCoupledField<'a>(pub &'a PhaseCoupling);

impl VectorField for PhaseCoupledField<'_> {
    fn dim(&self) -> usize {
        self.0.slave.dim()
    }
    fn eval(&self, t: f64, x: &StateVec) -> StateVec {
        self.0.coupled_rhs(t, x)
    }
}

/// Per-run metrics of a phase-synchronization simulation.
#[derive(Debug, Clone)]
pub struct PhaseReport {
    /// Signed lag per period window `[kT, (k+1)T]`, wrapped to `(−T/2, T/2]`;
    /// positive means the slave trails the master.
    pub period_lags: Vec<f64>,
    /// `|∫ over the final period |x−y₀|² dτ − Dmin|` (the property the locked
    /// T-periodic solution satisfies for small ε, δ).
    pub prop_residual: f64,
    pub theta0: f64,
    pub d_min: f64,
}

/// Integrate the coupled system over `n_periods` master periods and measure
/// per-period phase lags.
pub fn simulate_phase_sync(
    coupling: &PhaseCoupling,
    x_init: &StateVec,
    n_periods: usize,
) -> Result<(Trajectory, PhaseReport), PhaseError> {
    assert!(n_periods >= 1);
    let period = coupling.period;
    let field = PhaseCoupledField(coupling);
    let t_end = n_periods as f64 * period;
    let traj = integrate_adaptive(&field, x_init, 0.0, t_end, 1e-9, 1e-11, period / 256.0)?;

    let mut period_lags = Vec::with_capacity(n_periods);
    for k in 0..n_periods {
        period_lags.push(lag_over_window(&traj, coupling.master(), k as f64 * period));
    }

    // Property residual over the final period.
    let n = QUAD_SAMPLES;
    let dt = period / n as f64;
    let t_base = (n_periods - 1) as f64 * period;
    let mut acc = 0.0;
    for i in 0..n {
        let t = t_base + i as f64 * dt;
        let x = traj.sample(t).expect("inside simulated span");
        let diff = x - coupling.master.state_at(t);
        acc += diff.norm_squared();
    }
    let prop_residual = (acc * dt - coupling.d_min).abs();

    Ok((
        traj,
        PhaseReport {
            period_lags,
            prop_residual,
            theta0: coupling.theta0,
            d_min: coupling.d_min,
        },
    ))
}

/// Phase lag of `traj` relative to the master cycle over the one-period
/// window starting at `t_start`: the argmin over cyclic shifts of the
/// one-period L² distance (512-shift grid scan with parabolic refinement),
/// wrapped to `(−T/2, T/2]`. Positive lag: the slave trails the master.
pub fn lag_over_window(traj: &Trajectory, master: &LimitCycle, t_start: f64) -> f64 {
    let period = master.period();
    let m = LAG_SHIFTS;
    let dt = period / m as f64;
    let xs: Vec<StateVec> = (0..m)
        .map(|i| {
            traj.sample(t_start + i as f64 * dt)
                .expect("window inside simulated span")
        })
        .collect();
    let ys: Vec<StateVec> = (0..m)
        .map(|i| master.state_at(t_start + i as f64 * dt))
        .collect();

    let dists: Vec<f64> = (0..m)
        .map(|j| {
            let mut acc = 0.0;
            for i in 0..m {
                acc += (&xs[i] - &ys[(i + j) % m]).norm_squared();
            }
            acc
        })
        .collect();
    let (j_star, _) = dists
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();

    // Parabolic refinement through the circular neighbors.
    let d0 = dists[(j_star + m - 1) % m];
    let d1 = dists[j_star];
    let d2 = dists[(j_star + 1) % m];
    let denom = d0 - 2.0 * d1 + d2;
    let offset = if denom.abs() > 1e-30 {
        (0.5 * (d0 - d2) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    // Shift s = j·dt aligns x(τ) with y₀(τ + s); the slave therefore trails
    // by −s modulo T.
    let s = (j_star as f64 + offset) * dt;
    let mut lag = (-s).rem_euclid(period);
    if lag > 0.5 * period {
        lag -= period;
    }
    lag
}
