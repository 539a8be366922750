//! Property tests over randomized inputs.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use synclab_core::events::{detect_crossing, CrossingDirection};
use synclab_core::field::{ClosureField, StateVec};
use synclab_core::linalg::{sym_expm, sym_part, SymMatrix};
use synclab_core::models;
use synclab_core::ode::{integrate_adaptive, integrate_fixed};
use synclab_core::field::VectorField;

fn sym3(entries: [f64; 6]) -> SymMatrix {
    let m = DMatrix::from_row_slice(
        3,
        3,
        &[
            entries[0], entries[1], entries[2], //
            entries[1], entries[3], entries[4], //
            entries[2], entries[4], entries[5],
        ],
    );
    sym_part(&m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expm_semigroup(
        entries in prop::array::uniform6(-2.0f64..2.0),
        s in 0.0f64..1.5,
        t in 0.0f64..1.5,
    ) {
        let c = sym3(entries);
        let lhs = sym_expm(&c, s) * sym_expm(&c, t);
        let rhs = sym_expm(&c, s + t);
        prop_assert!((lhs - rhs).amax() < 1e-9);
    }

    #[test]
    fn crossing_roots_have_tiny_residual(freq in 0.5f64..4.0, phase in 0.0f64..6.0) {
        // x(t) = sin(freq·t + phase) via its harmonic oscillator.
        let field = ClosureField::new(2, true, move |_, x: &StateVec| {
            DVector::from_column_slice(&[x[1], -freq * freq * x[0]])
        });
        let x0 = DVector::from_column_slice(&[phase.sin(), freq * phase.cos()]);
        let traj = integrate_adaptive(&field, &x0, 0.0, 9.0, 1e-10, 1e-12, 0.05).unwrap();
        for (t, x) in detect_crossing(&traj, |_, x| x[0], CrossingDirection::Both) {
            prop_assert!(x[0].abs() <= 1e-8, "residual {} at t={t}", x[0]);
        }
    }

    #[test]
    fn fixed_and_adaptive_agree_on_linear_systems(
        a11 in -1.0f64..0.0,
        a12 in -1.0f64..1.0,
        a21 in -1.0f64..1.0,
        a22 in -1.0f64..0.0,
        x0 in prop::array::uniform2(-2.0f64..2.0),
    ) {
        let field = ClosureField::new(2, true, move |_, x: &StateVec| {
            DVector::from_column_slice(&[a11 * x[0] + a12 * x[1], a21 * x[0] + a22 * x[1]])
        });
        let start = DVector::from_column_slice(&x0);
        let (rtol, atol) = (1e-9, 1e-11);
        let adaptive = integrate_adaptive(&field, &start, 0.0, 3.0, rtol, atol, 0.1).unwrap();
        let fixed = integrate_fixed(&field, &start, 0.0, 3.0, 1e-4).unwrap();
        let diff = (adaptive.last_state() - fixed.last_state()).amax();
        let scale = adaptive.last_state().amax();
        prop_assert!(diff <= 10.0 * (atol + rtol * scale.max(1.0)), "diff {diff}");
    }
}

/// The builtin models agree between the adaptive solver and fine fixed steps
/// over horizons where neighboring trajectories have not yet separated.
#[test]
fn builtin_models_adaptive_matches_fixed_step() {
    let (rtol, atol) = (1e-9, 1e-11);
    let cases: Vec<(Box<dyn VectorField>, StateVec, f64)> = vec![
        (
            Box::new(models::Fhn),
            DVector::from_column_slice(&[1.0, 1.0]),
            5.0,
        ),
        (
            Box::new(models::ForcedMasterNn),
            DVector::from_column_slice(&[1.0, 0.0, -1.0]),
            2.0 * std::f64::consts::PI,
        ),
        (
            Box::new(models::ChaoticCnn),
            DVector::from_column_slice(&[-1.0, 1.0, 1.0]),
            1.0,
        ),
    ];
    for (field, x0, t_end) in &cases {
        let adaptive =
            integrate_adaptive(field.as_ref(), x0, 0.0, *t_end, rtol, atol, 0.05).unwrap();
        let fixed = integrate_fixed(field.as_ref(), x0, 0.0, *t_end, 1e-5).unwrap();
        let diff = (adaptive.last_state() - fixed.last_state()).amax();
        let scale = adaptive.last_state().amax();
        assert!(
            diff <= 10.0 * (atol + rtol * scale.max(1.0)),
            "dim {}: diff {diff}",
            field.dim()
        );
    }
}
