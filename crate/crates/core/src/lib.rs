//! Numerical toolkit for frames generated by operator orbits `{T^k φ}` on
//! `C^d`: construction, recovery of the generating operator, Stein-equation
//! characterization, spectral representation and perturbation bounds.

pub mod dynamics;
pub mod error;
pub mod frames;
pub mod numerics;
pub mod perturbation;
pub mod random;
pub mod tol;

pub use error::{FrameError, Result};
pub use numerics::{CMat, CVec};
pub use tol::Tolerances;
