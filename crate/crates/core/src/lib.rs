//! Simulation library for master–slave synchronization of nonlinear ODE systems.
//!
//! Three unidirectional coupling designs are implemented, each driving a slave
//! system `ẋ = φ(t,x)` toward a reference trajectory `y₀(t)` of a master system:
//!
//! * [`phase`] — phase synchronization of two limit cycles of equal period via a
//!   small multiplicative coupling `ε(|x−y₀(t)|² − c − δ)f(x)`; the attracting
//!   phase offset is predicted by a bifurcation function built from the cycle's
//!   adjoint solution.
//! * [`sliding`] — finite-time trajectory synchronization via the discontinuous
//!   static feedback `B·sgn(x−y₀(t))`, simulated either raw (which chatters) or
//!   with explicit per-component sliding on the surfaces `eᵢ = 0`.
//! * [`singular`] — chattering-free synchronization via a dynamic feedback `−Bu`
//!   whose control state `u` obeys a singularly perturbed equation `εu̇ = g`.
//!
//! Supporting layers: explicit ODE integrators with dense output ([`ode`]),
//! interpolable trajectories ([`traj`]), scalar event detection ([`events`]),
//! symmetric-matrix utilities ([`linalg`]), limit-cycle location with
//! Floquet/adjoint data ([`cycle`]), and the builtin example systems ([`models`]).

pub mod cycle;
pub mod events;
pub mod field;
pub mod linalg;
pub mod models;
pub mod ode;
pub mod phase;
pub mod singular;
pub mod sliding;
pub mod traj;

pub use field::{SharedField, StateVec, VectorField};
pub use traj::Trajectory;
