//! Parts of multi-party quantum states.
//!
//! Reduced density matrices, Bloch (Pauli-string) decompositions, marginal
//! compatibility checks, uniqueness tests for pure states and the parameter
//! counts behind them.

pub mod bloch;
pub mod compat;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod marginal;
pub mod rng;
pub mod tensor;
pub mod uniqueness;

pub use error::{Error, Result};
pub use tensor::{CMatrix, CVector, DensityMatrix, HermitianMatrix, PartySignature, PureState, Spectrum};
