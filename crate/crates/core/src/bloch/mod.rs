//! Pauli-string expansions `ρ = (1/D) Σ_k c_k Σ_k` and purity tests.
//!
//! Qubits use `[I, X, Y, Z]`. Higher local dimensions use generalized
//! Gell-Mann matrices scaled to `Tr(g_i g_j) = d·δ_ij`, so every
//! coefficient is an expectation value and the prefactor is `1/D`.

mod basis;
mod purity;
mod tensor;
mod three_qubit;
mod transform;

pub use basis::OperatorBasis;
pub use purity::{is_spectrally_pure, power_traces, purity_check, PurityReport};
pub use tensor::{decompose, decompose_hermitian, reconstruct, BlochTensor, DENSE_PARTY_CUTOFF};
pub use three_qubit::{purity_polys_3qubit, CubicGroups, ThreeQubitCoeffs};
pub use transform::BlochTransform;
