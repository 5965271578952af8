//! Morris-Shore reduction of degenerate two-level quantum systems and the
//! coupled quantum Householder reflections it produces.
//!
//! The lower level has `N` degenerate sublevels, the upper level `M`, and
//! every coupling shares one pulse envelope `f(t)` and one detuning `Δ`. A
//! constant change of basis splits the dynamics into independent two-state
//! systems (plus decoupled dark states), so any analytic two-state solution
//! lifts to the full `(N+M)`-state propagator.
//!
//! Modules, bottom-up:
//!
//! * [`linalg`]: dense complex matrices, Jacobi eigensolver, complex Γ.
//! * [`morris_shore`]: interaction matrices and their MS decomposition.
//! * [`two_state`]: Cayley-Klein parameters for resonant, Rosen-Zener and
//!   far-off-resonant pulses, plus the inverse phase design.
//! * [`mirrors`]: block propagators and generalized Householder reflections.
//! * [`linkages`]: angular-momentum interaction matrices.
//! * [`dynamics`]: direct integration of the Schrödinger equation.
//! * [`parallel`]: batch execution, rayon-backed with the `parallel` feature.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
mod error;
pub mod linalg;
pub mod linkages;
pub mod mirrors;
pub mod morris_shore;
pub mod ode;
pub mod parallel;
pub mod two_state;

pub use error::{Error, Result};
pub use num_complex::Complex64;
