//! SU(2)²-invariant G2-instantons on `R⁴ × S³` with cohomogeneity-one
//! coclosed G2-structures.
//!
//! The library builds structure profiles, solves the singular instanton ODEs
//! from the singular orbit outward, and verifies the resulting solutions.

pub mod algebra;
pub mod error;
pub mod format;
pub mod interp;
pub mod jet;
pub mod quadrature;
pub mod ode;
pub mod structures;
pub mod singular_ivp;
pub mod instantons;
pub mod verify;
mod dop853_tableau;

pub use error::{Error, Result};
