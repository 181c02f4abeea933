//! Constructors for the standard (in)compatibility examples.
//!
//! Everything here is built from Pauli strings and basis kets with exactly
//! representable weights, so the matrices are exact in binary floating
//! point.

use crate::bloch::OperatorBasis;
use crate::marginal::Marginal;
use crate::tensor::{CMatrix, DensityMatrix, HermitianMatrix, PartySignature, PureState};

fn qubits(n: usize) -> PartySignature {
    PartySignature::qubits(n).expect("small qubit system")
}

/// `(I + Σ c σ_a ⊗ σ_b) / 4`; labels 1, 2, 3 are x, y, z.
pub fn two_qubit_state(terms: &[(usize, usize, f64)]) -> DensityMatrix {
    let ops = OperatorBasis::new(2);
    let mut m = CMatrix::identity(4, 4);
    for &(a, b, c) in terms {
        m += ops.ops()[a].kronecker(&ops.ops()[b]).scale(c);
    }
    DensityMatrix::new(qubits(2), m.unscale(4.0)).expect("valid two-qubit state")
}

fn marginal(subset: Vec<usize>, rho: DensityMatrix) -> Marginal {
    Marginal::new(qubits(3), subset, rho).expect("two-party marginal of three qubits")
}

/// `|Φ⁺⟩⟨Φ⁺|` on each of `AB`, `BC`, `AC`. The one-party reductions agree,
/// but entanglement monogamy rules out any global state.
pub fn bell_triple() -> Vec<Marginal> {
    let phi = PureState::bell().to_density();
    vec![
        marginal(vec![0, 1], phi.clone()),
        marginal(vec![1, 2], phi.clone()),
        marginal(vec![0, 2], phi),
    ]
}

/// `σ_AB = (I + Z⊗X)/4`, `τ_BC = η_AC = (I + Z⊗Z)/4`. Overlaps agree and
/// complementary spectra match, yet no pure state reduces to all three.
pub fn sigma_tau_eta() -> Vec<Marginal> {
    vec![
        marginal(vec![0, 1], two_qubit_state(&[(3, 1, 1.0)])),
        marginal(vec![1, 2], two_qubit_state(&[(3, 3, 1.0)])),
        marginal(vec![0, 2], two_qubit_state(&[(3, 3, 1.0)])),
    ]
}

/// `τ_BC` and `η_AC` alone: compatible with `(|000⟩ + e^{iθ}|111⟩)/√2`.
pub fn tau_eta() -> Vec<Marginal> {
    sigma_tau_eta().split_off(1)
}

/// `diag(½, ½, ½, −½)`: unit `Tr H²` but `Tr H³ = ¼`.
pub fn diag_counterexample() -> HermitianMatrix {
    HermitianMatrix::from_real_diagonal(&[0.5, 0.5, 0.5, -0.5])
}

/// `½(|0…0⟩⟨0…0| + |1…1⟩⟨1…1|)`, sharing every proper marginal of GHZ.
pub fn ghz_classical_mixture(n: usize) -> DensityMatrix {
    let sig = qubits(n);
    let zero = PureState::basis(sig.clone(), 0).expect("basis ket");
    let ones = PureState::basis(sig.clone(), sig.total_dim() - 1).expect("basis ket");
    DensityMatrix::mixture(&[(0.5, &zero), (0.5, &ones)]).expect("valid mixture")
}
