//! Vector fields: the right-hand sides `ẋ = f(t, x)` driven by the integrators.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

/// State vector `x ∈ ℝⁿ`. Dimension is fixed per system.
pub type StateVec = DVector<f64>;

/// Shared, thread-safe handle to a vector field.
pub type SharedField = Arc<dyn VectorField + Send + Sync>;

/// A (possibly time-dependent) ODE right-hand side with Jacobian access.
///
/// `eval` must be deterministic. Implementors with an analytic Jacobian should
/// override [`VectorField::jacobian`]; the default is a central finite
/// difference of `eval`.
pub trait VectorField {
    /// State dimension `n`.
    fn dim(&self) -> usize;

    /// Evaluate the field at `(t, x)`.
    fn eval(&self, t: f64, x: &StateVec) -> StateVec;

    /// `true` if the field does not depend on `t`.
    fn is_autonomous(&self) -> bool {
        false
    }

    /// Jacobian `∂f/∂x` at `(t, x)`.
    fn jacobian(&self, t: f64, x: &StateVec) -> DMatrix<f64> {
        jacobian_fd(self, t, x)
    }
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, t: f64, x: &StateVec) -> StateVec {
        (**self).eval(t, x)
    }
    fn is_autonomous(&self) -> bool {
        (**self).is_autonomous()
    }
    fn jacobian(&self, t: f64, x: &StateVec) -> DMatrix<f64> {
        (**self).jacobian(t, x)
    }
}

impl VectorField for SharedField {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, t: f64, x: &StateVec) -> StateVec {
        (**self).eval(t, x)
    }
    fn is_autonomous(&self) -> bool {
        (**self).is_autonomous()
    }
    fn jacobian(&self, t: f64, x: &StateVec) -> DMatrix<f64> {
        (**self).jacobian(t, x)
    }
}

/// A vector field defined by closures; handy for tests and ad-hoc systems.
pub struct ClosureField<F> {
    dim: usize,
    autonomous: bool,
    f: F,
}

impl<F: Fn(f64, &StateVec) -> StateVec> ClosureField<F> {
    pub fn new(dim: usize, autonomous: bool, f: F) -> Self {
        Self { dim, autonomous, f }
    }
}

impl<F: Fn(f64, &StateVec) -> StateVec> VectorField for ClosureField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: f64, x: &StateVec) -> StateVec {
        (self.f)(t, x)
    }
    fn is_autonomous(&self) -> bool {
        self.autonomous
    }
}

/// Central finite-difference Jacobian of `field.eval` at `(t, x)`.
pub fn jacobian_fd<F: VectorField + ?Sized>(field: &F, t: f64, x: &StateVec) -> DMatrix<f64> {
    let n = field.dim();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let fp = field.eval(t, &xp);
        let fm = field.eval(t, &xm);
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Maximum relative deviation between the analytic Jacobian and a central
/// finite difference at `(t, x)`, scaled by the largest Jacobian entry.
pub fn jacobian_deviation<F: VectorField + ?Sized>(field: &F, t: f64, x: &StateVec) -> f64 {
    let analytic = field.jacobian(t, x);
    let fd = jacobian_fd(field, t, x);
    let scale = analytic.amax().max(1.0);
    (&analytic - &fd).amax() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn finite_difference_jacobian_matches_linear_system() {
        // f(x) = A x has Jacobian A exactly.
        let field = ClosureField::new(2, true, |_, x: &StateVec| {
            dvector![2.0 * x[0] - x[1], 0.5 * x[0] + 3.0 * x[1]]
        });
        let jac = jacobian_fd(&field, 0.0, &dvector![1.0, -2.0]);
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, 0.5, 3.0]);
        assert!((jac - expected).amax() < 1e-8);
    }

    #[test]
    fn deviation_small_for_default_jacobian() {
        let field = ClosureField::new(1, true, |_, x: &StateVec| dvector![x[0].sin()]);
        assert!(jacobian_deviation(&field, 0.0, &dvector![0.7]) < 1e-9);
    }
}
