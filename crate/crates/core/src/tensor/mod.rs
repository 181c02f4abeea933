//! Dense states, density matrices and the linear algebra around them.

pub mod eigen;
pub mod ops;
pub mod partial;
pub mod random;
pub mod signature;
pub mod state;

pub use eigen::{eigh, eigh_unchecked, Spectrum};
pub use ops::{fidelity_pure, purify, trace_distance};
pub use partial::{partial_trace, partial_trace_matrix, permute_matrix, permute_vector, reduce_pure};
pub use random::{haar_random_pure, random_density, random_hermitian_trace_one};
pub use signature::PartySignature;
pub use state::{CMatrix, CVector, DensityMatrix, HermitianMatrix, PureState};
