//! Densely sampled, interpolable solution curves.

use nalgebra::DVector;
use thiserror::Error;

use crate::field::StateVec;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("query time {t} outside trajectory domain [{t0}, {t1}]")]
    OutOfDomain { t: f64, t0: f64, t1: f64 },
}

/// How [`Trajectory::sample`] interpolates between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    Linear,
    /// Cubic Hermite from the stored endpoint derivatives (default).
    CubicHermite,
}

/// A solution curve sampled on a strictly increasing time grid, with the state
/// derivative stored at every node so queries between nodes interpolate to
/// O(h⁴).
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<StateVec>,
    derivs: Vec<StateVec>,
    interp: Interp,
}

impl Trajectory {
    /// Build from parallel node arrays. Panics if the grid is not strictly
    /// increasing or the arrays disagree in length.
    pub fn new(times: Vec<f64>, states: Vec<StateVec>, derivs: Vec<StateVec>) -> Self {
        assert!(!times.is_empty(), "trajectory needs at least one node");
        assert_eq!(times.len(), states.len());
        assert_eq!(times.len(), derivs.len());
        assert!(
            times.windows(2).all(|w| w[0] < w[1]),
            "time grid must be strictly increasing"
        );
        Self {
            times,
            states,
            derivs,
            interp: Interp::CubicHermite,
        }
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t1(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVec] {
        &self.states
    }

    pub fn derivs(&self) -> &[StateVec] {
        &self.derivs
    }

    pub fn first_state(&self) -> &StateVec {
        &self.states[0]
    }

    pub fn last_state(&self) -> &StateVec {
        self.states.last().unwrap()
    }

    /// Index of the segment containing `t`, i.e. `times[i] <= t <= times[i+1]`.
    fn segment(&self, t: f64) -> Result<usize, TrajectoryError> {
        let (t0, t1) = (self.t0(), self.t1());
        // Tolerate endpoint roundoff at one part in 1e12 of the span.
        let slack = 1e-12 * (t1 - t0).abs().max(1.0);
        if t < t0 - slack || t > t1 + slack {
            return Err(TrajectoryError::OutOfDomain { t, t0, t1 });
        }
        let t = t.clamp(t0, t1);
        let idx = self.times.partition_point(|&tk| tk <= t);
        Ok(idx.saturating_sub(1).min(self.times.len() - 2).max(0))
    }

    /// State at time `t`; errors outside `[t0, t1]`.
    pub fn sample(&self, t: f64) -> Result<StateVec, TrajectoryError> {
        if self.times.len() == 1 {
            let t0 = self.t0();
            if (t - t0).abs() > 1e-12 * t0.abs().max(1.0) {
                return Err(TrajectoryError::OutOfDomain { t, t0, t1: t0 });
            }
            return Ok(self.states[0].clone());
        }
        let i = self.segment(t)?;
        Ok(self.interp_on(i, t.clamp(self.t0(), self.t1())))
    }

    /// Derivative of the interpolant at time `t`.
    pub fn sample_deriv(&self, t: f64) -> Result<StateVec, TrajectoryError> {
        if self.times.len() == 1 {
            return Ok(self.derivs[0].clone());
        }
        let i = self.segment(t)?;
        let t = t.clamp(self.t0(), self.t1());
        let h = self.times[i + 1] - self.times[i];
        let s = (t - self.times[i]) / h;
        let (x0, x1) = (&self.states[i], &self.states[i + 1]);
        let (d0, d1) = (&self.derivs[i], &self.derivs[i + 1]);
        match self.interp {
            Interp::Linear => Ok((x1 - x0) / h),
            Interp::CubicHermite => {
                // d/dt of the Hermite basis.
                let h00 = (6.0 * s * s - 6.0 * s) / h;
                let h10 = 3.0 * s * s - 4.0 * s + 1.0;
                let h01 = (-6.0 * s * s + 6.0 * s) / h;
                let h11 = 3.0 * s * s - 2.0 * s;
                Ok(x0 * h00 + d0 * h10 + x1 * h01 + d1 * h11)
            }
        }
    }

    fn interp_on(&self, i: usize, t: f64) -> StateVec {
        let h = self.times[i + 1] - self.times[i];
        let s = (t - self.times[i]) / h;
        let (x0, x1) = (&self.states[i], &self.states[i + 1]);
        match self.interp {
            Interp::Linear => x0 * (1.0 - s) + x1 * s,
            Interp::CubicHermite => {
                let (d0, d1) = (&self.derivs[i], &self.derivs[i + 1]);
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                x0 * h00 + d0 * (h * h10) + x1 * h01 + d1 * (h * h11)
            }
        }
    }

    /// Largest absolute state entry over all nodes (blow-up guard).
    pub fn max_abs_state(&self) -> f64 {
        self.states.iter().map(|x| x.amax()).fold(0.0, f64::max)
    }
}

/// Convenience: a single-node trajectory (used for degenerate constant refs).
pub fn constant_trajectory(t: f64, x: StateVec) -> Trajectory {
    let d = DVector::zeros(x.len());
    Trajectory {
        times: vec![t],
        states: vec![x],
        derivs: vec![d],
        interp: Interp::CubicHermite,
    }
}
