//! Dynamics of two spatially indistinguishable qubits coupled to localized
//! Markovian noise, with sLOCC extraction of the distributed L–R state.
//!
//! The crate is organized bottom-up:
//!
//! - [`states`]: spatial configurations, symmetrized amplitudes, the
//!   channel-adapted bases and their selection rules.
//! - [`channels`]: effective decay rates and closed-form population dynamics
//!   for phase damping, depolarizing and amplitude damping noise.
//! - [`oracle`]: an independent Lindblad generator with RK4 and
//!   matrix-exponential propagation, used to cross-check the closed forms.
//! - [`slocc`]: projection onto the one-particle-per-region subspace.
//! - [`measures`]: concurrence and the entropic indistinguishability degree.
//! - [`pipeline`]: trajectories, sweeps, figure tables and self-validation.

pub mod channels;
pub mod error;
mod linalg;
pub mod measures;
pub mod oracle;
pub mod pipeline;
pub mod slocc;
pub mod states;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
