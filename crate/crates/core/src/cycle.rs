//! Limit-cycle location and Floquet/adjoint data.
//!
//! [`find_limit_cycle`] relaxes a seed onto an attracting orbit, then runs
//! Newton iteration on the Poincaré return map of a section orthogonal to the
//! flow. [`monodromy`] integrates the variational equation over one period;
//! [`adjoint_cycle`] produces the T-periodic adjoint solution `z*` normalized
//! so that `⟨z*(t), ẋ₀(t)⟩ = 1` — the oscillator's infinitesimal phase
//! response.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

use crate::events::{detect_crossing, CrossingDirection};
use crate::field::{SharedField, StateVec, VectorField};
use crate::ode::{integrate_adaptive, OdeError};
use crate::traj::Trajectory;

#[derive(Debug, Error)]
pub enum CycleError {
    #[error("field must be autonomous to carry a limit cycle")]
    NotAutonomous,
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("trajectory escaped the bounding box (|x|max = {max_abs:.3e}) during the transient")]
    TransientEscape { max_abs: f64 },
    #[error("Floquet multiplier 1 is not simple (singular values {sigma_min:.3e}, {sigma_next:.3e})")]
    DegenerateMultiplier { sigma_min: f64, sigma_next: f64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Tuning knobs for the cycle search; the defaults suit desk-scale systems.
#[derive(Debug, Clone)]
pub struct FindOptions {
    /// Transient integration length before shooting, in units of the period guess.
    pub burn_in_periods: f64,
    /// Newton iteration cap on the return map.
    pub max_newton: usize,
    /// Required closure `‖orbit(T) − orbit(0)‖∞`.
    pub closure_tol: f64,
    /// Escape guard: `|x|∞` beyond this during the transient is an error.
    pub bounding_box: f64,
    /// Minimum number of stored samples along the returned orbit.
    pub orbit_samples: usize,
}

impl Default for FindOptions {
    fn default() -> Self {
        Self {
            burn_in_periods: 20.0,
            max_newton: 50,
            closure_tol: 1e-8,
            bounding_box: 1e3,
            orbit_samples: 2048,
        }
    }
}

/// A periodic orbit `x₀(t)` of an autonomous field, with its period and a
/// densely sampled interpolant over one period.
#[derive(Clone)]
pub struct LimitCycle {
    field: SharedField,
    period: f64,
    orbit: Trajectory,
    anchor: StateVec,
}

impl std::fmt::Debug for LimitCycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LimitCycle")
            .field("period", &self.period)
            .field("anchor", &self.anchor)
            .finish_non_exhaustive()
    }
}

impl LimitCycle {
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn orbit(&self) -> &Trajectory {
        &self.orbit
    }

    pub fn anchor(&self) -> &StateVec {
        &self.anchor
    }

    pub fn field(&self) -> &SharedField {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    /// Point on the cycle at phase `t`, extended T-periodically to all `t`.
    pub fn state_at(&self, t: f64) -> StateVec {
        let tau = t.rem_euclid(self.period);
        self.orbit
            .sample(tau)
            .expect("wrapped phase is inside the orbit domain")
    }

    /// Exact velocity `ẋ₀(t) = f(x₀(t))` from the field, not the interpolant.
    pub fn deriv_at(&self, t: f64) -> StateVec {
        self.field.eval(0.0, &self.state_at(t))
    }

    /// Rebuild the cycle with its time origin moved to the orbit point closest
    /// to `point` (Euclidean projection onto the sampled orbit).
    pub fn reanchor(&self, point: &StateVec) -> Result<LimitCycle, CycleError> {
        let n_scan = 4096;
        let mut best_t = 0.0;
        let mut best_d = f64::INFINITY;
        for k in 0..n_scan {
            let t = self.period * k as f64 / n_scan as f64;
            let d = (self.state_at(t) - point).norm_squared();
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        // Golden-section polish around the best grid sample.
        let h = self.period / n_scan as f64;
        let dist = |t: f64| (self.state_at(t) - point).norm_squared();
        let t_star = golden_min(dist, best_t - h, best_t + h, 1e-12);
        let anchor = self.state_at(t_star);
        build_cycle(self.field.clone(), anchor, self.period, &FindOptions::default())
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
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
    0.5 * (a + b)
}

/// Orthonormal basis of the hyperplane orthogonal to `v`.
fn orthonormal_complement(v: &StateVec) -> Vec<StateVec> {
    let n = v.len();
    let vhat = v / v.norm();
    let mut basis: Vec<StateVec> = vec![vhat.clone()];
    for j in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w = StateVec::zeros(n);
        w[j] = 1.0;
        for b in &basis {
            let proj = b.dot(&w);
            w -= b * proj;
        }
        let norm = w.norm();
        if norm > 1e-8 {
            basis.push(w / norm);
        }
    }
    basis.remove(0);
    basis
}

struct Section {
    origin: StateVec,
    normal: StateVec,
    basis: Vec<StateVec>,
}

impl Section {
    fn point(&self, coords: &DVector<f64>) -> StateVec {
        let mut p = self.origin.clone();
        for (c, b) in coords.iter().zip(&self.basis) {
            p += b * *c;
        }
        p
    }

    fn coords(&self, x: &StateVec) -> DVector<f64> {
        DVector::from_fn(self.basis.len(), |i, _| self.basis[i].dot(&(x - &self.origin)))
    }

    fn offset(&self, x: &StateVec) -> f64 {
        self.normal.dot(&(x - &self.origin))
    }
}

/// First same-direction section crossing after `t > 0.5·t_guess`; returns the
/// return time and the crossing state.
fn return_map<F: VectorField + ?Sized>(
    field: &F,
    section: &Section,
    start: &StateVec,
    t_guess: f64,
) -> Result<(f64, StateVec), CycleError> {
    let traj = integrate_adaptive(field, start, 0.0, 2.5 * t_guess, 1e-10, 1e-12, t_guess / 64.0)?;
    let hits = detect_crossing(&traj, |_, x| section.offset(x), CrossingDirection::Rising);
    hits.into_iter()
        .find(|(t, _)| *t > 0.5 * t_guess)
        .ok_or_else(|| {
            CycleError::NoConvergence("no section return within 2.5 period guesses".into())
        })
}

/// Integrate one period from `anchor` and package the orbit, enforcing the
/// closure and non-vanishing-velocity invariants.
///
/// The period estimate from the Newton stage carries the coarser return-map
/// tolerance, so the section return is re-detected here under the tight orbit
/// tolerance before the stored orbit is built.
fn build_cycle(
    field: SharedField,
    anchor: StateVec,
    period_est: f64,
    opts: &FindOptions,
) -> Result<LimitCycle, CycleError> {
    let h_max = period_est / opts.orbit_samples as f64;
    let normal = field.eval(0.0, &anchor);
    let probe = integrate_adaptive(&field, &anchor, 0.0, 1.05 * period_est, 1e-11, 1e-13, h_max)?;
    let period = detect_crossing(
        &probe,
        |_, x| normal.dot(&(x - &anchor)),
        CrossingDirection::Rising,
    )
    .into_iter()
    .map(|(t, _)| t)
    .find(|t| (t - period_est).abs() < 0.05 * period_est)
    .unwrap_or(period_est);
    let orbit = integrate_adaptive(&field, &anchor, 0.0, period, 1e-11, 1e-13, h_max)?;
    let closure = (orbit.last_state() - orbit.first_state()).amax();
    if closure > opts.closure_tol {
        return Err(CycleError::NoConvergence(format!(
            "orbit closure {closure:.3e} exceeds {:.1e}",
            opts.closure_tol
        )));
    }
    let min_speed = orbit
        .times()
        .iter()
        .zip(orbit.states())
        .map(|(&t, x)| field.eval(t, x).norm())
        .fold(f64::INFINITY, f64::min);
    if min_speed <= 1e-9 {
        return Err(CycleError::NoConvergence(
            "velocity vanishes along the orbit (equilibrium, not a cycle)".into(),
        ));
    }
    Ok(LimitCycle {
        field,
        period,
        orbit,
        anchor,
    })
}

/// Locate an attracting limit cycle near `seed` with period near `t_guess`.
///
/// The seed is first relaxed for `burn_in_periods·t_guess`; a Poincaré section
/// orthogonal to the flow is placed at the relaxed point, and Newton iteration
/// on the return map pins the fixed point and return time.
pub fn find_limit_cycle(
    field: SharedField,
    seed: &StateVec,
    t_guess: f64,
) -> Result<LimitCycle, CycleError> {
    find_limit_cycle_with(field, seed, t_guess, &FindOptions::default())
}

pub fn find_limit_cycle_with(
    field: SharedField,
    seed: &StateVec,
    t_guess: f64,
    opts: &FindOptions,
) -> Result<LimitCycle, CycleError> {
    if !field.is_autonomous() {
        return Err(CycleError::NotAutonomous);
    }
    assert!(t_guess > 0.0, "period guess must be positive");

    // Transient burn-in: orbital stability makes relaxation cheap and Newton robust.
    let burn = integrate_adaptive(
        &field,
        seed,
        0.0,
        opts.burn_in_periods * t_guess,
        1e-9,
        1e-11,
        t_guess / 20.0,
    )?;
    let max_abs = burn.max_abs_state();
    if max_abs > opts.bounding_box {
        return Err(CycleError::TransientEscape { max_abs });
    }
    let relaxed = burn.last_state().clone();
    let normal = field.eval(0.0, &relaxed);
    if normal.norm() < 1e-10 {
        return Err(CycleError::NoConvergence(
            "relaxed seed sits at an equilibrium".into(),
        ));
    }
    let section = Section {
        origin: relaxed.clone(),
        normal: &normal / normal.norm(),
        basis: orthonormal_complement(&normal),
    };

    let m = section.basis.len();
    let mut coords = DVector::zeros(m);
    let fd_step = 1e-7;

    let residual = |c: &DVector<f64>| -> Result<(DVector<f64>, f64), CycleError> {
        let (tau, hit) = return_map(&field, &section, &section.point(c), t_guess)?;
        Ok((section.coords(&hit) - c, tau))
    };

    let (mut res, mut tau) = residual(&coords)?;
    let mut period = tau;

    // The return-map Jacobian, also used to reject non-isolated cycles
    // (for a family of cycles R′ = I and Newton's matrix is singular).
    let mut jac_checked = false;
    for iter in 0..opts.max_newton {
        if res.amax() < 1e-10 {
            if !jac_checked {
                let jac = newton_jacobian(&residual, &coords, &res, fd_step)?;
                check_return_map_regular(&jac)?;
            }
            break;
        }
        let jac = newton_jacobian(&residual, &coords, &res, fd_step)?;
        check_return_map_regular(&jac)?;
        jac_checked = true;
        let delta = jac
            .clone()
            .lu()
            .solve(&res)
            .ok_or_else(|| CycleError::NoConvergence("singular Newton system".into()))?;
        coords -= delta;
        let (r, t) = residual(&coords)?;
        res = r;
        tau = t;
        period = tau;
        if iter + 1 == opts.max_newton && res.amax() >= 1e-10 {
            return Err(CycleError::NoConvergence(format!(
                "Newton stalled after {} iterations (residual {:.3e})",
                opts.max_newton,
                res.amax()
            )));
        }
    }

    build_cycle(field, section.point(&coords), period, opts)
}

fn newton_jacobian<R>(
    residual: &R,
    coords: &DVector<f64>,
    res0: &DVector<f64>,
    fd_step: f64,
) -> Result<DMatrix<f64>, CycleError>
where
    R: Fn(&DVector<f64>) -> Result<(DVector<f64>, f64), CycleError>,
{
    let m = coords.len();
    let mut jac = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut cp = coords.clone();
        cp[j] += fd_step;
        let (rp, _) = residual(&cp)?;
        for i in 0..m {
            jac[(i, j)] = (rp[i] - res0[i]) / fd_step;
        }
    }
    Ok(jac)
}

fn check_return_map_regular(jac: &DMatrix<f64>) -> Result<(), CycleError> {
    // jac = R' − I; a non-isolated cycle family has R' = I.
    if jac.determinant().abs() < 1e-8 {
        return Err(CycleError::NoConvergence(
            "return map is singular (non-isolated cycles)".into(),
        ));
    }
    Ok(())
}

/// Monodromy matrix and Floquet multipliers of a cycle.
#[derive(Debug, Clone)]
pub struct FloquetData {
    pub monodromy: DMatrix<f64>,
    pub multipliers: Vec<Complex<f64>>,
}

impl FloquetData {
    /// The multiplier closest to 1 (always present for an autonomous cycle).
    pub fn trivial_multiplier(&self) -> Complex<f64> {
        *self
            .multipliers
            .iter()
            .min_by(|a, b| {
                let da = (*a - Complex::new(1.0, 0.0)).norm_sqr();
                let db = (*b - Complex::new(1.0, 0.0)).norm_sqr();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
    }

    /// Moduli of the non-trivial multipliers.
    pub fn nontrivial_moduli(&self) -> Vec<f64> {
        let trivial = self.trivial_multiplier();
        let mut skipped = false;
        let mut out = Vec::new();
        for m in &self.multipliers {
            if !skipped && *m == trivial {
                skipped = true;
                continue;
            }
            out.push(m.norm());
        }
        out
    }
}

/// Joint system (x, Y): ẋ = f(x), Ẏ = f′(x)·Y, flattened column-major.
struct VariationalField<'a> {
    inner: &'a SharedField,
    n: usize,
}

impl VectorField for VariationalField<'_> {
    fn dim(&self) -> usize {
        self.n + self.n * self.n
    }

    fn eval(&self, t: f64, z: &StateVec) -> StateVec {
        let n = self.n;
        let x = z.rows(0, n).into_owned();
        let jac = self.inner.jacobian(t, &x);
        let mut out = StateVec::zeros(n + n * n);
        out.rows_mut(0, n).copy_from(&self.inner.eval(t, &x));
        for col in 0..n {
            let y_col = z.rows(n + col * n, n);
            let dy = &jac * y_col;
            out.rows_mut(n + col * n, n).copy_from(&dy);
        }
        out
    }

    fn is_autonomous(&self) -> bool {
        true
    }
}

/// Integrate the variational equation `Ẏ = f′(x₀(t))Y`, `Y(0) = I`, over one
/// period; multipliers are the eigenvalues of `Y(T)`.
pub fn monodromy(cycle: &LimitCycle) -> Result<FloquetData, CycleError> {
    let n = cycle.dim();
    let var = VariationalField {
        inner: cycle.field(),
        n,
    };
    let mut z0 = StateVec::zeros(n + n * n);
    z0.rows_mut(0, n).copy_from(cycle.anchor());
    for i in 0..n {
        z0[n + i * n + i] = 1.0;
    }
    let traj = integrate_adaptive(&var, &z0, 0.0, cycle.period(), 1e-10, 1e-12, cycle.period() / 256.0)?;
    let zt = traj.last_state();
    let mut mono = DMatrix::zeros(n, n);
    for col in 0..n {
        for row in 0..n {
            mono[(row, col)] = zt[n + col * n + row];
        }
    }
    let multipliers: Vec<Complex<f64>> = mono.complex_eigenvalues().iter().copied().collect();
    Ok(FloquetData {
        monodromy: mono,
        multipliers,
    })
}

/// The T-periodic adjoint solution `z*` with `⟨z*(t), ẋ₀(t)⟩ = 1`.
#[derive(Clone)]
pub struct AdjointCycle {
    period: f64,
    z: Trajectory,
    /// `‖z*(T) − z*(0)‖∞` as realized by the integration.
    pub periodicity_defect: f64,
}

impl AdjointCycle {
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.z
    }

    /// `z*(t)`, extended T-periodically.
    pub fn z_at(&self, t: f64) -> StateVec {
        let tau = t.rem_euclid(self.period);
        self.z.sample(tau).expect("wrapped phase inside domain")
    }
}

/// Adjoint ODE `ż = −f′(x₀(t))ᵀ z` along the stored orbit interpolant.
struct AdjointField<'a> {
    cycle: &'a LimitCycle,
    /// Integrate `ζ(s) = z(T − s)` when reversed (the stable direction for a
    /// contracting cycle, whose adjoint expands forward in time).
    reversed: bool,
}

impl VectorField for AdjointField<'_> {
    fn dim(&self) -> usize {
        self.cycle.dim()
    }

    fn eval(&self, t: f64, z: &StateVec) -> StateVec {
        let tau = if self.reversed {
            self.cycle.period() - t
        } else {
            t
        };
        let x = self.cycle.state_at(tau);
        let jt = self.cycle.field().jacobian(0.0, &x).transpose();
        let dz = -(&jt * z);
        if self.reversed {
            -dz
        } else {
            dz
        }
    }
}

/// Compute the adjoint cycle.
///
/// `z*(0)` is the eigenvector of the transposed monodromy for eigenvalue 1
/// (extracted via SVD of `Mᵀ − I`), scaled so `⟨z*(0), f(x₀(0))⟩ = 1`. The
/// trajectory is then obtained by integrating the adjoint ODE backward from
/// `z*(T) = z*(0)` over one period: backward is the contracting direction for
/// the adjoint of an attracting cycle, so the expanding mode cannot amplify
/// the eigenvector error.
pub fn adjoint_cycle(cycle: &LimitCycle) -> Result<AdjointCycle, CycleError> {
    let floquet = monodromy(cycle)?;
    let n = cycle.dim();
    let mt_minus_i = floquet.monodromy.transpose() - DMatrix::<f64>::identity(n, n);
    let svd = mt_minus_i.svd(true, true);
    let v_t = svd.v_t.as_ref().unwrap();
    let mut sv: Vec<(f64, usize)> = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    sv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (sigma_min, idx_min) = sv[0];
    let sigma_next = if sv.len() > 1 { sv[1].0 } else { f64::INFINITY };
    if sigma_min > 1e-3 || sigma_next < 1e-3 {
        return Err(CycleError::DegenerateMultiplier {
            sigma_min,
            sigma_next,
        });
    }
    let mut z0 = StateVec::from_fn(n, |i, _| v_t[(idx_min, i)]);
    let speed0 = cycle.field().eval(0.0, cycle.anchor());
    let pairing = z0.dot(&speed0);
    if pairing.abs() < 1e-12 {
        return Err(CycleError::DegenerateMultiplier {
            sigma_min,
            sigma_next,
        });
    }
    z0 /= pairing;

    let period = cycle.period();
    let adj = AdjointField {
        cycle,
        reversed: true,
    };
    let run = integrate_adaptive(&adj, &z0, 0.0, period, 1e-11, 1e-13, period / 2048.0)?;

    // Reverse s back into t = T − s; derivatives flip sign.
    let m = run.len();
    let mut times = Vec::with_capacity(m);
    let mut states = Vec::with_capacity(m);
    let mut derivs = Vec::with_capacity(m);
    for k in (0..m).rev() {
        times.push(period - run.times()[k]);
        states.push(run.states()[k].clone());
        derivs.push(-&run.derivs()[k]);
    }
    // Guard against duplicate endpoint times from roundoff.
    times[0] = 0.0;
    *times.last_mut().unwrap() = period;
    let z = Trajectory::new(times, states, derivs);

    let defect = (z.last_state() - z.first_state()).amax();
    let adjoint = AdjointCycle {
        period,
        z,
        periodicity_defect: defect,
    };

    // Normalization must hold at every phase, not just t = 0.
    for k in 0..100 {
        let t = period * k as f64 / 100.0;
        let pairing = adjoint.z_at(t).dot(&cycle.deriv_at(t));
        if (pairing - 1.0).abs() > 1e-5 {
            return Err(CycleError::NoConvergence(format!(
                "adjoint normalization drifted to {pairing} at t = {t}"
            )));
        }
    }
    Ok(adjoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ClosureField;
    use crate::models;
    use nalgebra::dvector;
    use std::f64::consts::PI;
    use std::sync::Arc;

    /// Planar normal form ẋ = x(1 − |x|²) plus unit rotation: the unit circle
    /// is a cycle with T = 2π and non-trivial multiplier e^{−4π}.
    fn normal_form() -> SharedField {
        Arc::new(ClosureField::new(2, true, |_, x: &StateVec| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            dvector![x[0] * (1.0 - r2) - x[1], x[1] * (1.0 - r2) + x[0]]
        }))
    }

    #[test]
    fn normal_form_cycle_period_and_multipliers() {
        let cycle = find_limit_cycle(normal_form(), &dvector![1.3, 0.0], 6.0).unwrap();
        assert!((cycle.period() - 2.0 * PI).abs() < 1e-8);
        let fl = monodromy(&cycle).unwrap();
        let trivial = fl.trivial_multiplier();
        assert!((trivial.re - 1.0).abs() < 1e-6 && trivial.im.abs() < 1e-6);
        let nontrivial = fl.nontrivial_moduli();
        assert_eq!(nontrivial.len(), 1);
        assert!(
            (nontrivial[0] - (-4.0 * PI).exp()).abs() < 1e-6,
            "got {} want {}",
            nontrivial[0],
            (-4.0 * PI).exp()
        );
    }

    #[test]
    fn normal_form_adjoint_matches_closed_form() {
        // On the unit circle ‖ẋ₀‖ = 1, so z*(t) = ẋ₀(t) by symmetry.
        let cycle = find_limit_cycle(normal_form(), &dvector![0.5, 0.5], 6.3).unwrap();
        let adj = adjoint_cycle(&cycle).unwrap();
        for k in 0..16 {
            let t = cycle.period() * k as f64 / 16.0;
            let diff = (adj.z_at(t) - cycle.deriv_at(t)).amax();
            assert!(diff < 1e-5, "diff {diff} at t={t}");
        }
        assert!(adj.periodicity_defect < 1e-6);
    }

    #[test]
    fn harmonic_oscillator_rejected_as_non_isolated() {
        let field: SharedField = Arc::new(ClosureField::new(2, true, |_, x: &StateVec| {
            dvector![x[1], -x[0]]
        }));
        let res = find_limit_cycle(field, &dvector![1.0, 0.0], 6.3);
        assert!(
            matches!(res, Err(CycleError::NoConvergence(_))),
            "expected NoConvergence, got {res:?}",
        );
    }

    #[test]
    fn non_autonomous_field_rejected() {
        let field: SharedField = Arc::new(models::ForcedMasterNn);
        let res = find_limit_cycle(field, &dvector![1.0, 0.0, -1.0], 6.3);
        assert!(matches!(res, Err(CycleError::NotAutonomous)));
    }
}
