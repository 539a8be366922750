//! Chattering-free synchronization via a singularly perturbed dynamic
//! feedback.
//!
//! The slave is driven by `−Bu` where the control state `u` obeys
//!
//! ```text
//! ẋ  = φ(t,x) − Bu
//! εu̇ = ∂s/∂t + ∂s/∂x·[φ(t,x) − Bu] =: g(t, ξ₀, x, u)
//! ```
//!
//! built around the surface function
//! `s(t, ξ₀, x) = e^{Ct}(ξ₀ − y₀(0)) − (x − y₀(t))` with `∂s/∂x = −I`.
//! For negative-definite `B` the `u`-equation is a fast contraction onto the
//! equivalent control; on the slow manifold the tracking error obeys
//! `x₀(t) − y₀(t) = e^{Ct}(ξ₀ − y₀(0))` exactly, so `max λ(C) ≤ −α < 0`
//! drives it to zero. The control stays absolutely continuous, which is what
//! removes the chattering of the static design.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::field::{SharedField, StateVec, VectorField};
use crate::linalg::{sym_part, LinalgError, SymMatrix};
use crate::ode::OdeError;
use crate::traj::Trajectory;

/// Two sign flips of a control component closer than this dwell time count
/// as chattering; isolated slow zero crossings of a smooth periodic control
/// do not.
pub const CHATTER_DWELL: f64 = 0.05;

#[derive(Debug, Error)]
pub enum SingularError {
    #[error("C must have all eigenvalues below zero (max λ = {max_lambda})")]
    NotContracting { max_lambda: f64 },
    #[error("B must have a negative-definite symmetric part (max λ((B+Bᵀ)/2) = {max_lambda})")]
    NotNegativeDefinite { max_lambda: f64 },
    #[error("B is singular")]
    SingularB,
    #[error("epsilon must be positive")]
    InvalidEpsilon,
    #[error("dimension mismatch between B, C, and the initial state")]
    DimensionMismatch,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Configuration of the dynamic feedback: the gain matrix `B`, the surface
/// matrix `C`, the singular parameter `ε`, and the shared start `ξ₀` of the
/// slave state and the surface anchor.
#[derive(Debug, Clone)]
pub struct DynamicFeedback {
    b: DMatrix<f64>,
    b_inv: DMatrix<f64>,
    c: SymMatrix,
    pub epsilon: f64,
    pub xi0: StateVec,
    /// `−max λ(C)`: decay rate of the reduced tracking error.
    pub alpha: f64,
    /// `−max λ((B+Bᵀ)/2)`: contraction rate of the boundary layer.
    pub nu: f64,
}

impl DynamicFeedback {
    pub fn new(
        b: DMatrix<f64>,
        c: SymMatrix,
        epsilon: f64,
        xi0: StateVec,
    ) -> Result<Self, SingularError> {
        let n = xi0.len();
        if b.nrows() != n || b.ncols() != n || c.dim() != n {
            return Err(SingularError::DimensionMismatch);
        }
        if epsilon <= 0.0 {
            return Err(SingularError::InvalidEpsilon);
        }
        let max_c = c.max_eigenvalue();
        if max_c >= 0.0 {
            return Err(SingularError::NotContracting { max_lambda: max_c });
        }
        let max_b_sym = sym_part(&b)?.max_eigenvalue();
        if max_b_sym >= 0.0 {
            return Err(SingularError::NotNegativeDefinite {
                max_lambda: max_b_sym,
            });
        }
        let b_inv = b
            .clone()
            .try_inverse()
            .ok_or(SingularError::SingularB)?;
        Ok(Self {
            b,
            b_inv,
            c,
            epsilon,
            xi0,
            alpha: -max_c,
            nu: -max_b_sym,
        })
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &SymMatrix {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.xi0.len()
    }
}

/// The surface function `s(t, ξ₀, x) = e^{Ct}(ξ₀ − y₀(0)) − (x − y₀(t))`,
/// with the matrix exponential cached through the eigenbasis of `C` and
/// `ẏ₀(t)` evaluated exactly from the master field (never by differencing
/// the stored reference).
pub struct SFunction {
    master: SharedField,
    y0ref: Trajectory,
    /// Eigenbasis `C = Q diag(λ) Qᵀ`.
    q: DMatrix<f64>,
    lambda: DVector<f64>,
    /// `Qᵀ(ξ₀ − y₀(0))`.
    qt_anchor: DVector<f64>,
    anchor: StateVec,
}

impl SFunction {
    pub fn new(c: &SymMatrix, master: SharedField, y0ref: Trajectory, xi0: &StateVec) -> Self {
        let y00 = y0ref.sample(y0ref.t0()).expect("reference start");
        let anchor = xi0 - y00;
        let (q, lambda) = c.eigen_basis();
        let qt_anchor = q.transpose() * &anchor;
        Self {
            master,
            y0ref,
            q,
            lambda,
            qt_anchor,
            anchor,
        }
    }

    pub fn reference(&self) -> &Trajectory {
        &self.y0ref
    }

    /// `ξ₀ − y₀(0)`.
    pub fn anchor(&self) -> &StateVec {
        &self.anchor
    }

    /// `e^{Ct}(ξ₀ − y₀(0))`.
    pub fn exp_ct_anchor(&self, t: f64) -> StateVec {
        let scaled = DVector::from_fn(self.lambda.len(), |i, _| {
            (self.lambda[i] * t).exp() * self.qt_anchor[i]
        });
        &self.q * scaled
    }

    /// `C e^{Ct}(ξ₀ − y₀(0))`.
    pub fn c_exp_ct_anchor(&self, t: f64) -> StateVec {
        let scaled = DVector::from_fn(self.lambda.len(), |i, _| {
            self.lambda[i] * (self.lambda[i] * t).exp() * self.qt_anchor[i]
        });
        &self.q * scaled
    }

    pub fn y0(&self, t: f64) -> StateVec {
        self.y0ref.sample(t).expect("t inside reference domain")
    }

    /// `ẏ₀(t) = ψ(t, y₀(t))` from the master field.
    pub fn y0_dot(&self, t: f64) -> StateVec {
        self.master.eval(t, &self.y0(t))
    }

    /// `s(t, ξ₀, x)`.
    pub fn eval(&self, t: f64, x: &StateVec) -> StateVec {
        self.exp_ct_anchor(t) - (x - self.y0(t))
    }

    /// `(∂s/∂t, ∂s/∂x)`; the state gradient is `−I` identically.
    pub fn partials(&self, t: f64, _x: &StateVec) -> (StateVec, DMatrix<f64>) {
        let dt = self.c_exp_ct_anchor(t) + self.y0_dot(t);
        let n = self.anchor.len();
        (dt, -DMatrix::<f64>::identity(n, n))
    }

    /// Reduced (slow-manifold) solution `x₀(t) = y₀(t) + e^{Ct}(ξ₀ − y₀(0))`.
    pub fn reduced_solution(&self, t: f64) -> StateVec {
        self.y0(t) + self.exp_ct_anchor(t)
    }
}

/// Right-hand side of the closed loop, `(ẋ, u̇)` stacked as a `2n` vector:
/// `ẋ = φ(t,x) − Bu`, `u̇ = g(t, ξ₀, x, u)/ε` with
/// `g = Ce^{Ct}(ξ₀ − y₀(0)) + ẏ₀(t) − φ(t,x) + Bu`.
pub fn coupled_dynamic_rhs<F: VectorField + ?Sized>(
    fb: &DynamicFeedback,
    slave: &F,
    sf: &SFunction,
    t: f64,
    xu: &StateVec,
) -> StateVec {
    let n = fb.dim();
    let x = xu.rows(0, n).into_owned();
    let u = xu.rows(n, n).into_owned();
    let phi = slave.eval(t, &x);
    let bu = &fb.b * &u;
    let g = sf.c_exp_ct_anchor(t) + sf.y0_dot(t) - &phi + &bu;
    let mut out = StateVec::zeros(2 * n);
    out.rows_mut(0, n).copy_from(&(phi - bu));
    out.rows_mut(n, n).copy_from(&(g / fb.epsilon));
    out
}

/// Frozen-argument fast equation `ż = g(t̂, ξ₀, x̂, z)`; its equilibrium is
/// the pointwise control the layer collapses onto.
pub fn frozen_layer_equilibrium<F: VectorField + ?Sized>(
    fb: &DynamicFeedback,
    slave: &F,
    sf: &SFunction,
    t_hat: f64,
    x_hat: &StateVec,
) -> StateVec {
    let rhs = sf.c_exp_ct_anchor(t_hat) + sf.y0_dot(t_hat) - slave.eval(t_hat, x_hat);
    -(&fb.b_inv * rhs)
}

/// The equivalent control
/// `u₀(t) = −B⁻¹[Ce^{Ct}(ξ₀−y₀(0)) + ψ(t,y₀(t)) − φ(t,x₀(t))]`
/// along the reduced solution `x₀(t)`; it keeps `s ≡ 0` exactly.
pub fn equivalent_control<F: VectorField + ?Sized>(
    fb: &DynamicFeedback,
    slave: &F,
    sf: &SFunction,
    t: f64,
) -> StateVec {
    let x0 = sf.reduced_solution(t);
    let rhs = sf.c_exp_ct_anchor(t) + sf.y0_dot(t) - slave.eval(t, &x0);
    -(&fb.b_inv * rhs)
}

/// Knobs for [`simulate_dynamic`].
#[derive(Debug, Clone, Default)]
pub struct DynamicRunOptions {
    /// Initial control; defaults to the equivalent control at `t = 0`, which
    /// starts with the boundary layer already collapsed.
    pub u0: Option<StateVec>,
    /// Fixed RK4 step; defaults to `ε/20` (explicit stability needs
    /// `h·ν/ε < 2.8`).
    pub h: Option<f64>,
    /// Output decimation interval for the stored trajectories; defaults to
    /// `t_end/8192`.
    pub output_dt: Option<f64>,
}

/// Metrics of one dynamic-feedback run.
#[derive(Debug, Clone)]
pub struct DynamicRunReport {
    /// `sup ‖x(t) − y₀(t)‖∞` over the last 20% of the horizon.
    pub tail_error: f64,
    /// `sup ‖x(t) − y₀(t)‖∞` over the whole horizon.
    pub sup_tracking_error: f64,
    /// `sup ‖x(t) − x₀(t)‖∞` against the closed-form reduced solution.
    pub sup_reduced_mismatch: f64,
    /// `sup ‖u(t) − u₀(t)‖∞` over `t ≥ 1`.
    pub sup_u_mismatch_tail: f64,
    /// Discrete total variation `Σ|uᵢ(t_{k+1}) − uᵢ(t_k)|` per component.
    pub u_total_variation: Vec<f64>,
    /// Sign-flip instants of each control component.
    pub u_flip_times: Vec<Vec<f64>>,
    /// Decimated `(t, ‖x−y₀‖∞)` history.
    pub err_history: Vec<(f64, f64)>,
}

impl DynamicRunReport {
    /// Chattering flips per component after `t_min`: sign flips following a
    /// previous flip by less than [`CHATTER_DWELL`].
    pub fn chatter_flips(&self, t_min: f64) -> Vec<usize> {
        self.u_flip_times
            .iter()
            .map(|flips| {
                flips
                    .windows(2)
                    .filter(|w| w[1] > t_min && w[1] - w[0] < CHATTER_DWELL)
                    .count()
            })
            .collect()
    }
}

/// Simulate the closed loop over `[0, t_end]` with `x(0) = ξ₀`.
pub fn simulate_dynamic<F, G>(
    fb: &DynamicFeedback,
    slave: &F,
    master: &G,
    y0ref: &Trajectory,
    t_end: f64,
    opts: &DynamicRunOptions,
) -> Result<(Trajectory, Trajectory, DynamicRunReport), SingularError>
where
    F: VectorField + ?Sized,
    G: VectorField + Send + Sync + Clone + 'static,
{
    simulate_dynamic_inner::<F, G, dyn VectorField>(fb, slave, master, y0ref, None, t_end, opts)
}

/// Simulate the perturbed loop: `φ + p` replaces `φ` in both equations.
pub fn simulate_dynamic_perturbed<F, G, P>(
    fb: &DynamicFeedback,
    slave: &F,
    master: &G,
    y0ref: &Trajectory,
    perturbation: &P,
    t_end: f64,
    opts: &DynamicRunOptions,
) -> Result<(Trajectory, Trajectory, DynamicRunReport), SingularError>
where
    F: VectorField + ?Sized,
    G: VectorField + Send + Sync + Clone + 'static,
    P: VectorField + ?Sized,
{
    simulate_dynamic_inner(fb, slave, master, y0ref, Some(perturbation), t_end, opts)
}

fn simulate_dynamic_inner<F, G, P>(
    fb: &DynamicFeedback,
    slave: &F,
    master: &G,
    y0ref: &Trajectory,
    perturbation: Option<&P>,
    t_end: f64,
    opts: &DynamicRunOptions,
) -> Result<(Trajectory, Trajectory, DynamicRunReport), SingularError>
where
    F: VectorField + ?Sized,
    G: VectorField + Send + Sync + Clone + 'static,
    P: VectorField + ?Sized,
{
    let n = fb.dim();
    assert_eq!(slave.dim(), n);
    let sf = SFunction::new(
        fb.c(),
        std::sync::Arc::new(master.clone()),
        y0ref.clone(),
        &fb.xi0,
    );

    let h = opts.h.unwrap_or(fb.epsilon / 20.0);
    assert!(h > 0.0);
    let steps = (t_end / h).ceil() as usize;
    let output_dt = opts.output_dt.unwrap_or(t_end / 8192.0);
    let stride = (output_dt / h).round().max(1.0) as usize;

    // φ + p, applied identically in both equations.
    let phi_p = |t: f64, x: &StateVec| -> StateVec {
        let mut v = slave.eval(t, x);
        if let Some(p) = perturbation {
            v += p.eval(t, x);
        }
        v
    };
    let rhs = |t: f64, xu: &StateVec| -> StateVec {
        let x = xu.rows(0, n).into_owned();
        let u = xu.rows(n, n).into_owned();
        let phi = phi_p(t, &x);
        let bu = &fb.b * &u;
        let g = sf.c_exp_ct_anchor(t) + sf.y0_dot(t) - &phi + &bu;
        let mut out = StateVec::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&(phi - bu));
        out.rows_mut(n, n).copy_from(&(g / fb.epsilon));
        out
    };

    let u_init = match &opts.u0 {
        Some(u) => u.clone(),
        None => equivalent_control(fb, slave, &sf, 0.0),
    };
    let mut xu = StateVec::zeros(2 * n);
    xu.rows_mut(0, n).copy_from(&fb.xi0);
    xu.rows_mut(n, n).copy_from(&u_init);

    let tail_start = 0.8 * t_end;
    let mut tail_error: f64 = 0.0;
    let mut sup_tracking: f64 = 0.0;
    let mut sup_reduced: f64 = 0.0;
    let mut sup_u_tail: f64 = 0.0;
    let mut u_tv = vec![0.0; n];
    let mut u_flips: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut last_u_sign = vec![0.0f64; n];
    let mut err_history = Vec::new();

    let mut times = Vec::new();
    let mut x_states = Vec::new();
    let mut x_derivs = Vec::new();
    let mut u_states = Vec::new();
    let mut u_derivs = Vec::new();

    let mut u_prev = u_init.clone();
    for step in 0..=steps {
        let t = (step as f64 * h).min(t_end);
        let x = xu.rows(0, n).into_owned();
        let u = xu.rows(n, n).into_owned();
        if x.iter().chain(u.iter()).any(|v| !v.is_finite()) {
            return Err(OdeError::NonFiniteState { t }.into());
        }

        let err = (&x - sf.y0(t)).amax();
        sup_tracking = sup_tracking.max(err);
        if t >= tail_start {
            tail_error = tail_error.max(err);
        }
        sup_reduced = sup_reduced.max((&x - sf.reduced_solution(t)).amax());
        if t >= 1.0 {
            let u0 = equivalent_control(fb, slave, &sf, t);
            sup_u_tail = sup_u_tail.max((&u - u0).amax());
        }
        for i in 0..n {
            u_tv[i] += (u[i] - u_prev[i]).abs();
            let s = if u[i] > 0.0 {
                1.0
            } else if u[i] < 0.0 {
                -1.0
            } else {
                0.0
            };
            if s != 0.0 {
                if last_u_sign[i] != 0.0 && s != last_u_sign[i] {
                    u_flips[i].push(t);
                }
                last_u_sign[i] = s;
            }
        }
        u_prev = u.clone();

        if step % stride == 0 || step == steps {
            let deriv = rhs(t, &xu);
            times.push(t);
            x_states.push(x.clone());
            x_derivs.push(deriv.rows(0, n).into_owned());
            u_states.push(u.clone());
            u_derivs.push(deriv.rows(n, n).into_owned());
            err_history.push((t, err));
        }

        if step == steps {
            break;
        }
        let h_step = ((step + 1) as f64 * h).min(t_end) - t;
        let k1 = rhs(t, &xu);
        let k2 = rhs(t + 0.5 * h_step, &(&xu + &k1 * (0.5 * h_step)));
        let k3 = rhs(t + 0.5 * h_step, &(&xu + &k2 * (0.5 * h_step)));
        let k4 = rhs(t + h_step, &(&xu + &k3 * h_step));
        xu += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h_step / 6.0);
    }

    let x_traj = Trajectory::new(times.clone(), x_states, x_derivs);
    let u_traj = Trajectory::new(times, u_states, u_derivs);
    let report = DynamicRunReport {
        tail_error,
        sup_tracking_error: sup_tracking,
        sup_reduced_mismatch: sup_reduced,
        sup_u_mismatch_tail: sup_u_tail,
        u_total_variation: u_tv,
        u_flip_times: u_flips,
        err_history,
    };
    Ok((x_traj, u_traj, report))
}
