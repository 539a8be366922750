//! Builtin vector fields for the numerical experiments: a FitzHugh–Nagumo
//! oscillator, a chaotic cellular neural network, and a forced master network
//! with a known 2π-periodic solution.

use std::sync::Arc;

use nalgebra::{dvector, DMatrix, DVector};

use crate::field::{SharedField, StateVec, VectorField};

/// FitzHugh–Nagumo type oscillator:
///
/// ```text
/// ẋ₁ = 2(x₁ − x₁³/3 + x₂ − 9/20)
/// ẋ₂ = −(1/2)(x₁ + (4/5)x₂ − 7/10)
/// ```
///
/// It has an asymptotically stable limit cycle with period T ≈ 9.83.
#[derive(Debug, Clone, Copy, Default)]
pub struct Fhn;

pub fn fhn() -> Fhn {
    Fhn
}

impl VectorField for Fhn {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, _t: f64, x: &StateVec) -> StateVec {
        dvector![
            2.0 * (x[0] - x[0] * x[0] * x[0] / 3.0 + x[1] - 9.0 / 20.0),
            -0.5 * (x[0] + 0.8 * x[1] - 0.7)
        ]
    }

    fn is_autonomous(&self) -> bool {
        true
    }

    fn jacobian(&self, _t: f64, x: &StateVec) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[2.0 * (1.0 - x[0] * x[0]), 2.0, -0.5, -0.4])
    }
}

/// Piecewise-linear saturation `f(s) = (|s+1| − |s−1|)/2`: identity on
/// `[−1, 1]`, clipped to ±1 outside.
pub fn saturation(s: f64) -> f64 {
    0.5 * ((s + 1.0).abs() - (s - 1.0).abs())
}

/// Slope of [`saturation`]; the kinks `|s| = 1` take the interior value 1
/// (the kink set has measure zero along trajectories).
pub fn saturation_slope(s: f64) -> f64 {
    if s.abs() <= 1.0 {
        1.0
    } else {
        0.0
    }
}

const CNN_W: [[f64; 3]; 3] = [[1.25, -3.2, -3.2], [-3.2, 1.1, -4.4], [-3.2, 4.4, 1.0]];

/// Three-cell cellular neural network `ẋ = −x + W·f(x)` with the saturation
/// activation; it carries a chaotic (double-scroll) attractor.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChaoticCnn;

pub fn chaotic_cnn() -> ChaoticCnn {
    ChaoticCnn
}

impl VectorField for ChaoticCnn {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, _t: f64, x: &StateVec) -> StateVec {
        let f = [saturation(x[0]), saturation(x[1]), saturation(x[2])];
        let mut out = DVector::zeros(3);
        for i in 0..3 {
            let mut acc = -x[i];
            for j in 0..3 {
                acc += CNN_W[i][j] * f[j];
            }
            out[i] = acc;
        }
        out
    }

    fn is_autonomous(&self) -> bool {
        true
    }

    fn jacobian(&self, _t: f64, x: &StateVec) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                jac[(i, j)] = CNN_W[i][j] * saturation_slope(x[j]) - if i == j { 1.0 } else { 0.0 };
            }
        }
        jac
    }
}

const MASTER_D: [f64; 3] = [10.0 / 7.0, 1.0, 0.1];
const MASTER_W: [[f64; 3]; 3] = [
    [-20.0 / 7.0, 10.0, 0.0],
    [1.0, -30.0, 1.0],
    [0.0, 100.0 / 7.0, -1.9],
];

/// Master neural network `ẏ = −D y + W̃ σ(y) + I(t)`, `σ(y) = (y₁³, y₂, y₃)`,
/// with the periodic forcing `I(t)` chosen in closed form so that
/// `y₀(t) = (cos t, sin t, −cos t)` is an exact 2π-periodic solution.
#[derive(Debug, Clone, Copy, Default)]
pub struct ForcedMasterNn;

pub fn forced_master_nn() -> ForcedMasterNn {
    ForcedMasterNn
}

impl ForcedMasterNn {
    /// The forcing `I(t) = ẏ₀ + D y₀ − W̃ σ(y₀)`, expanded in trig terms:
    ///
    /// ```text
    /// I₁(t) = (10/7)cos t + (20/7)cos³t − 11 sin t
    /// I₂(t) = 31 sin t + 2 cos t − cos³t
    /// I₃(t) = −(93/7) sin t − 2 cos t
    /// ```
    pub fn forcing(t: f64) -> StateVec {
        let (s, c) = t.sin_cos();
        let c3 = c * c * c;
        dvector![
            10.0 / 7.0 * c + 20.0 / 7.0 * c3 - 11.0 * s,
            31.0 * s + 2.0 * c - c3,
            -93.0 / 7.0 * s - 2.0 * c
        ]
    }

    /// The exact reference solution `y₀(t) = (cos t, sin t, −cos t)`.
    pub fn reference_solution(t: f64) -> StateVec {
        let (s, c) = t.sin_cos();
        dvector![c, s, -c]
    }
}

impl VectorField for ForcedMasterNn {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, t: f64, y: &StateVec) -> StateVec {
        let sigma = [y[0] * y[0] * y[0], y[1], y[2]];
        let forcing = Self::forcing(t);
        let mut out = DVector::zeros(3);
        for i in 0..3 {
            let mut acc = -MASTER_D[i] * y[i] + forcing[i];
            for j in 0..3 {
                acc += MASTER_W[i][j] * sigma[j];
            }
            out[i] = acc;
        }
        out
    }

    fn jacobian(&self, _t: f64, y: &StateVec) -> DMatrix<f64> {
        let slope = [3.0 * y[0] * y[0], 1.0, 1.0];
        let mut jac = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                jac[(i, j)] = MASTER_W[i][j] * slope[j] - if i == j { MASTER_D[i] } else { 0.0 };
            }
        }
        jac
    }
}

/// Model names recognized by [`by_name`].
pub const MODEL_NAMES: [&str; 3] = ["fhn", "chaotic_cnn", "forced_master_nn"];

/// Look up a builtin model by name.
pub fn by_name(name: &str) -> Option<SharedField> {
    match name {
        "fhn" => Some(Arc::new(Fhn)),
        "chaotic_cnn" => Some(Arc::new(ChaoticCnn)),
        "forced_master_nn" => Some(Arc::new(ForcedMasterNn)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::jacobian_deviation;
    use crate::ode::integrate_adaptive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn fhn_value_and_jacobian_at_origin() {
        let f = fhn();
        let x = dvector![0.0, 0.0];
        let v = f.eval(0.0, &x);
        assert!((v[0] + 0.9).abs() < 1e-15);
        assert!((v[1] - 0.35).abs() < 1e-15);
        let j = f.jacobian(0.0, &x);
        let want = DMatrix::from_row_slice(2, 2, &[2.0, 2.0, -0.5, -0.4]);
        assert!((j - want).amax() < 1e-15);
    }

    #[test]
    fn saturation_values() {
        assert_eq!(saturation(0.5), 0.5);
        assert_eq!(saturation(3.0), 1.0);
        assert_eq!(saturation(-3.0), -1.0);
    }

    #[test]
    fn cnn_hand_computed_value() {
        let f = chaotic_cnn();
        let v = f.eval(0.0, &dvector![-1.0, 1.0, 1.0]);
        assert!((v[0] + 6.65).abs() < 1e-12);
        assert!((v[1] + 1.1).abs() < 1e-12);
        assert!((v[2] - 7.6).abs() < 1e-12);
    }

    #[test]
    fn master_forcing_at_zero() {
        let i0 = ForcedMasterNn::forcing(0.0);
        assert!((i0[0] - 30.0 / 7.0).abs() < 1e-14);
        assert!((i0[1] - 1.0).abs() < 1e-14);
        assert!((i0[2] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn master_residual_along_reference() {
        // The defining check for the forcing: substituting y0 into the field
        // must reproduce dy0/dt to machine precision.
        let f = forced_master_nn();
        for k in 0..1000 {
            let t = 2.0 * PI * k as f64 / 1000.0;
            let y0 = ForcedMasterNn::reference_solution(t);
            let (s, c) = t.sin_cos();
            let dy0 = dvector![-s, c, s];
            let resid = (f.eval(t, &y0) - dy0).amax();
            assert!(resid <= 1e-12, "residual {resid} at t={t}");
        }
    }

    #[test]
    fn master_reference_is_periodic_under_integration() {
        let f = forced_master_nn();
        let y0 = dvector![1.0, 0.0, -1.0];
        let traj = integrate_adaptive(&f, &y0, 0.0, 2.0 * PI, 1e-10, 1e-12, 0.1).unwrap();
        assert!((traj.last_state() - &y0).amax() < 1e-6);
    }

    #[test]
    fn master_reference_attracts_random_starts() {
        // y0 is globally exponentially stable; random starts should land on it.
        let f = forced_master_nn();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let y: StateVec = dvector![
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0)
            ];
            let traj = integrate_adaptive(&f, &y, 0.0, 8.0 * PI, 1e-8, 1e-10, 0.1).unwrap();
            let t1 = traj.t1();
            let err = (traj.last_state() - ForcedMasterNn::reference_solution(t1)).amax();
            assert!(err < 1e-3, "final offset {err}");
        }
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fields: Vec<(SharedField, &str)> = MODEL_NAMES
            .iter()
            .map(|&n| (by_name(n).unwrap(), n))
            .collect();
        for (field, name) in &fields {
            let mut checked = 0;
            while checked < 100 {
                let x = StateVec::from_fn(field.dim(), |_, _| rng.gen_range(-2.0..2.0));
                // Stay clear of the activation kinks where the one-sided
                // derivative choice makes finite differences disagree.
                if *name == "chaotic_cnn" && x.iter().any(|v| (v.abs() - 1.0).abs() < 1e-3) {
                    continue;
                }
                let t = rng.gen_range(0.0..10.0);
                let dev = jacobian_deviation(&**field, t, &x);
                assert!(dev < 1e-5, "{name}: deviation {dev} at {x:?}");
                checked += 1;
            }
        }
    }

    #[test]
    fn cnn_long_run_bounded_and_aperiodic() {
        let f = chaotic_cnn();
        let traj =
            integrate_adaptive(&f, &dvector![-1.0, 1.0, 1.0], 0.0, 500.0, 1e-9, 1e-11, 0.05)
                .unwrap();
        assert!(traj.max_abs_state() < 10.0, "trajectory left [-10,10]^3");

        // Aperiodicity: any close return of one anchor point must fail to be a
        // shared period for other anchors.
        let sample = |t: f64| traj.sample(t).unwrap();
        let anchor_t = 400.0;
        let anchor = sample(anchor_t);
        let mut candidates = Vec::new();
        let mut tau = 0.5;
        while tau <= 99.0 {
            if (sample(anchor_t + tau) - &anchor).amax() < 1e-2 {
                candidates.push(tau);
            }
            tau += 0.01;
        }
        for tau in candidates {
            let verified = [100.0, 150.0, 200.0, 250.0, 300.0].iter().all(|&t| {
                (sample(t + tau) - sample(t)).amax() < 1e-2
            });
            assert!(!verified, "found an apparent period {tau}");
        }
    }
}
