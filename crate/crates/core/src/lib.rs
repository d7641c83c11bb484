//! Simulation of a fixed-particle-number Mach-Zehnder interferometer in the
//! two-mode Fock basis, with Bayesian phase estimation, Fisher-information
//! scaling analysis, and a population simulated-annealing search for input
//! states approaching Heisenberg-limited phase sensitivity.
//!
//! The two interferometer modes are mapped onto an angular-momentum algebra
//! with `j = N/2`; an input state is a vector of amplitudes over the
//! `|j,m⟩` basis, `m = -N/2..N/2`. Propagation through the interferometer is
//! the rotation `exp(-i φ Ĵ_y)`, and all estimation quantities derive from
//! the exit-port number distribution `P(m|φ)`.
//!
//! Modules:
//! - [`spin`]: operator construction and interferometer rotations
//! - [`states`]: input-state families and the state text format
//! - [`interferometer`]: propagation, outcome statistics, moments
//! - [`estimation`]: likelihoods, Fisher information, error propagation
//! - [`annealer`]: population simulated annealing over input amplitudes
//! - [`analysis`]: N-sweeps, power-law fits, state engineering

pub mod analysis;
pub mod annealer;
pub mod error;
pub mod estimation;
pub mod interferometer;
pub(crate) mod linalg;
pub mod spin;
pub mod states;
pub mod tolerances;

pub(crate) mod exec;

pub use error::{Error, Result};
pub use states::PureStateVector;
