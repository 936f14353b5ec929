//! Construction and numerical verification of tangentially biharmonic
//! Lagrangian H-umbilical submanifolds of ℂⁿ, ℂPⁿ and ℂHⁿ.

pub mod error;
pub mod family;
pub mod immersion;
pub mod curves;
pub mod kernel;
pub mod legendre;
pub mod ode;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
