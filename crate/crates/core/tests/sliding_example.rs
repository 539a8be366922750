//! Static-feedback behavior on the neural-network pair: the chaotic CNN slave
//! tracking the forced master's reference `y₀(t) = (cos t, sin t, −cos t)`.
//!
//! Two regimes are covered deliberately. With the demonstration gains
//! `b = −3.5` the decay-rate hypothesis `bᵢ < −M_I` fails (already along the
//! reference, `sup|φ₁ − ψ₁| ≈ 4.09 > 3.5`), so capture is only intermittent;
//! the runs still show the finite-time approach and, in raw stepping, the
//! chattering. With certified gains (`b = −16 < −M_I`) the theorem applies
//! end-to-end: hitting before the bound, exact capture afterwards.

use nalgebra::dvector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use synclab_core::field::{StateVec, VectorField};
use synclab_core::models::{self, ForcedMasterNn};
use synclab_core::ode::integrate_adaptive;
use synclab_core::sliding::{
    certify_gains, simulate_static, BoxRegion, SlidingError, SlidingMode, StaticFeedback,
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

fn example_box() -> BoxRegion {
    BoxRegion::new(vec![-2.0; 3], vec![2.0; 3])
}

#[test]
fn demonstration_gains_do_not_certify() {
    // sup_t |φ₁(t, y₀(t)) − ψ₁(t, y₀(t))| = |3.45 cos t − 2.2 sin t| peaks at
    // √(3.45² + 2.2²) ≈ 4.09 > 3.5, so μ_I ≥ 0 for any honest M_I estimate.
    let slave = models::ChaoticCnn;
    let master = ForcedMasterNn;
    let y0ref = reference();
    let mut along_reference: f64 = 0.0;
    for k in 0..2000 {
        let t = T_END * k as f64 / 2000.0;
        let y0 = y0ref.sample(t).unwrap();
        let gap = (slave.eval(t, &y0) - master.eval(t, &y0)).amax();
        along_reference = along_reference.max(gap);
    }
    assert!(along_reference > 3.5, "gap along reference {along_reference}");

    let fb = StaticFeedback::new(vec![-3.5; 3], SlidingMode::FilippovSliding).unwrap();
    let res = certify_gains(&fb, &slave, &master, &y0ref, &example_box(), 10_000, 42);
    assert!(matches!(res, Err(SlidingError::GainTooSmall { .. })));
}

#[test]
fn demonstration_run_captures_then_escapes() {
    // Finite-time approach is visible, but with the sliding condition failing
    // on part of each period the error cannot stay pinned.
    let slave = models::ChaoticCnn;
    let y0ref = reference();
    let fb = StaticFeedback::new(vec![-3.5; 3], SlidingMode::FilippovSliding).unwrap();
    let (_, _, report) = simulate_static(
        &fb,
        &slave,
        &y0ref,
        &dvector![-1.0, 1.0, 1.0],
        T_END,
        2e-5,
        &example_box(),
    )
    .unwrap();
    let hit = report.hitting_time.expect("V reaches the tolerance");
    assert!(hit < 6.0, "hit at {hit}");
    assert!(report.capture_time.is_some());
    // Escape windows push the error back out — orders of magnitude above the
    // exact-capture level that certified gains would maintain.
    assert!(report.post_hit_sup_err.unwrap() > 1e-2);
}

#[test]
fn raw_mode_chatters_after_each_component_contacts() {
    let slave = models::ChaoticCnn;
    let y0ref = reference();
    let h = 2e-5;
    let fb = StaticFeedback::new(vec![-3.5; 3], SlidingMode::Raw).unwrap();
    let (_, log, report) = simulate_static(
        &fb,
        &slave,
        &y0ref,
        &dvector![-1.0, 1.0, 1.0],
        T_END,
        h,
        &example_box(),
    )
    .unwrap();
    assert!(report.hitting_time.is_some());
    for i in 0..3 {
        let first = *log.times[i].first().expect("every component contacts");
        let pre_rate = log.rate(i, 0.0, 0.99 * first);
        let post_rate = log.rate(i, first, T_END);
        // Before a component reaches its surface it does not switch at all;
        // afterwards the discretized switch flips at a rate set by the step.
        assert!(
            post_rate >= 100.0 * pre_rate.max(1.0),
            "component {i}: pre {pre_rate}, post {post_rate}"
        );
        assert!(post_rate >= 1.0 / (200.0 * h), "component {i} rate {post_rate}");
    }
}

#[test]
fn certified_gains_hit_before_bound_and_stay() {
    let slave = models::ChaoticCnn;
    let master = ForcedMasterNn;
    let y0ref = reference();
    let box_i = example_box();
    let fb = StaticFeedback::new(vec![-16.0; 3], SlidingMode::FilippovSliding).unwrap();
    let cert = certify_gains(&fb, &slave, &master, &y0ref, &box_i, 10_000, 42).unwrap();
    assert!(cert.mu < 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..20 {
        let x0 = StateVec::from_fn(3, |_, _| rng.gen_range(-2.0..2.0));
        let (_, _, report) =
            simulate_static(&fb, &slave, &y0ref, &x0, T_END, 1e-4, &box_i).unwrap();
        let hit = report.hitting_time.unwrap_or(f64::INFINITY);
        let bound = cert.hit_bound_for(report.v0);
        assert!(hit <= bound, "trial {trial}: hit {hit} > bound {bound}");
        assert!(
            report.post_hit_sup_err.unwrap() <= 1e-6,
            "trial {trial}: residual error {:?}",
            report.post_hit_sup_err
        );
        // Lyapunov decay up to the per-step tolerance.
        assert!(report.max_v_step_increase <= 1e-6, "trial {trial}");
    }
}
