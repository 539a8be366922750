//! Dynamic-feedback behavior on the neural-network pair, including the
//! singular-perturbation ladder and the bounded-perturbation runs.

use nalgebra::{dvector, DMatrix};
use std::f64::consts::PI;
use synclab_core::field::{ClosureField, StateVec};
use synclab_core::linalg::SymMatrix;
use synclab_core::models::{self, ForcedMasterNn};
use synclab_core::ode::integrate_adaptive;
use synclab_core::singular::{
    simulate_dynamic, simulate_dynamic_perturbed, DynamicFeedback, DynamicRunOptions,
};
use synclab_core::traj::Trajectory;

const T_END: f64 = 4.0 * PI;

fn reference() -> Trajectory {
    integrate_adaptive(
        &ForcedMasterNn,
        &dvector![1.0, 0.0, -1.0],
        0.0,
        T_END,
        1e-10,
        1e-12,
        0.01,
    )
    .unwrap()
}

fn feedback(epsilon: f64) -> DynamicFeedback {
    let b = DMatrix::from_diagonal(&dvector![-1.0, -1.0, -1.0]);
    let c = SymMatrix::from_diag(&[-1.0, -1.0, -1.0]);
    DynamicFeedback::new(b, c, epsilon, dvector![-1.0, 1.0, 1.0]).unwrap()
}

#[test]
fn smooth_tracking_without_chattering() {
    let y0ref = reference();
    let fb = feedback(0.001);
    let (_, _, report) = simulate_dynamic(
        &fb,
        &models::ChaoticCnn,
        &ForcedMasterNn,
        &y0ref,
        T_END,
        &DynamicRunOptions::default(),
    )
    .unwrap();
    assert!(report.tail_error < 0.05, "tail error {}", report.tail_error);
    // The control crosses zero only slowly; no flip pair closer than the
    // chattering dwell after the transient.
    let chatter = report.chatter_flips(0.5);
    assert!(chatter.iter().all(|&c| c == 0), "chatter {chatter:?}");
    // Bounded discrete total variation (raw switching would give ~2·|b|·rate·T).
    assert!(report.u_total_variation.iter().all(|&tv| tv < 100.0));
}

#[test]
fn epsilon_ladder_shrinks_both_mismatches_monotonically() {
    let y0ref = reference();
    let slave = models::ChaoticCnn;
    let mut reduced = Vec::new();
    let mut control = Vec::new();
    for epsilon in [0.01, 0.003, 0.001] {
        let fb = feedback(epsilon);
        let (_, _, report) = simulate_dynamic(
            &fb,
            &slave,
            &ForcedMasterNn,
            &y0ref,
            T_END,
            &DynamicRunOptions::default(),
        )
        .unwrap();
        reduced.push(report.sup_reduced_mismatch);
        control.push(report.sup_u_mismatch_tail);
    }
    assert!(
        reduced.windows(2).all(|w| w[1] < w[0]),
        "sup|x_eps - x0| not monotone: {reduced:?}"
    );
    assert!(
        control.windows(2).all(|w| w[1] < w[0]),
        "sup|u_eps - u0| not monotone: {control:?}"
    );
    // At the smallest epsilon the trajectory rides the closed-form reduced
    // solution y0(t) + e^{Ct}(xi0 - y0(0)) to within a few epsilon.
    assert!(reduced[2] < 0.02, "reduced mismatch {}", reduced[2]);
}

#[test]
fn bounded_perturbation_keeps_tracking() {
    let y0ref = reference();
    let fb = feedback(0.001);
    let p = ClosureField::new(3, false, |t: f64, _: &StateVec| {
        let v = 0.1 * (5.0 * t).sin();
        dvector![v, v, v]
    });
    let (_, _, report) = simulate_dynamic_perturbed(
        &fb,
        &models::ChaoticCnn,
        &ForcedMasterNn,
        &y0ref,
        &p,
        T_END,
        &DynamicRunOptions::default(),
    )
    .unwrap();
    assert!(report.tail_error < 0.05, "tail error {}", report.tail_error);
    assert!(report.chatter_flips(0.5).iter().all(|&c| c == 0));
}

#[test]
fn oversized_perturbation_degrades_but_does_not_crash() {
    let y0ref = reference();
    let fb = feedback(0.1);
    let p = ClosureField::new(3, false, |t: f64, _: &StateVec| {
        let v = 10.0 * (5.0 * t).sin();
        dvector![v, v, v]
    });
    let (_, _, report) = simulate_dynamic_perturbed(
        &fb,
        &models::ChaoticCnn,
        &ForcedMasterNn,
        &y0ref,
        &p,
        T_END,
        &DynamicRunOptions::default(),
    )
    .unwrap();
    // Tracking quality collapses, and the report records it.
    assert!(report.tail_error > 0.05);
    assert!(report.tail_error.is_finite());
}

#[test]
fn visible_boundary_layer_with_custom_u0() {
    // Starting u away from the equivalent control shows a fast transient that
    // collapses within a few epsilon.
    let y0ref = reference();
    let fb = feedback(0.001);
    let opts = DynamicRunOptions {
        u0: Some(dvector![0.0, 0.0, 0.0]),
        ..Default::default()
    };
    let (_, u_traj, report) = simulate_dynamic(
        &fb,
        &models::ChaoticCnn,
        &ForcedMasterNn,
        &y0ref,
        T_END,
        &opts,
    )
    .unwrap();
    assert_eq!(u_traj.first_state(), &dvector![0.0, 0.0, 0.0]);
    // The layer is long gone by t = 1 and the tail behaves as usual.
    assert!(report.tail_error < 0.05);
}
