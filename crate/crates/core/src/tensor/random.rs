use super::signature::PartySignature;
use super::state::{symmetrize, trace, CMatrix, CVector, DensityMatrix, HermitianMatrix, PureState};
use crate::rng::{complex_normal, rng_from_seed, DetRng};

/// Haar-random pure state: i.i.d. standard complex Gaussian amplitudes,
/// drawn in index order, then normalized.
pub fn haar_random_pure(sig: &PartySignature, seed: u64) -> PureState {
    haar_random_pure_with(sig, &mut rng_from_seed(seed))
}

pub fn haar_random_pure_with(sig: &PartySignature, rng: &mut DetRng) -> PureState {
    let dim = sig.total_dim();
    loop {
        let amps = CVector::from_fn(dim, |_, _| complex_normal(rng));
        if let Ok(psi) = PureState::normalized(sig.clone(), amps) {
            return psi;
        }
    }
}

/// Ginibre-induced density matrix `G G† / Tr` with `G` of shape `D × rank`.
pub fn random_density(sig: &PartySignature, rank: usize, seed: u64) -> DensityMatrix {
    random_density_with(sig, rank, &mut rng_from_seed(seed))
}

pub fn random_density_with(sig: &PartySignature, rank: usize, rng: &mut DetRng) -> DensityMatrix {
    let dim = sig.total_dim();
    let g = CMatrix::from_fn(dim, rank.max(1), |_, _| complex_normal(rng));
    let mut m = &g * g.adjoint();
    let tr = trace(&m).re;
    m.unscale_mut(tr);
    DensityMatrix::new_unchecked(sig.clone(), symmetrize(&m))
}

/// Random Hermitian matrix with unit trace and no positivity constraint.
pub fn random_hermitian_trace_one(dim: usize, rng: &mut DetRng) -> HermitianMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let mut m = symmetrize(&g).scale(1.0 / dim as f64);
    let shift = (1.0 - trace(&m).re) / dim as f64;
    for i in 0..dim {
        m[(i, i)] += shift;
    }
    HermitianMatrix::from_hermitian_unchecked(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::eigen::eigh_unchecked;
    use crate::tensor::partial::reduce_pure;

    #[test]
    fn single_qubit_is_normalized() {
        let sig = PartySignature::qubits(1).unwrap();
        let psi = haar_random_pure(&sig, 11);
        assert!((psi.amps().norm_squared() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_seed_same_bits() {
        let sig = PartySignature::qubits(3).unwrap();
        assert_eq!(haar_random_pure(&sig, 5), haar_random_pure(&sig, 5));
        assert_ne!(haar_random_pure(&sig, 5), haar_random_pure(&sig, 6));
    }

    #[test]
    fn four_qubit_two_party_marginals_full_rank() {
        let sig = PartySignature::qubits(4).unwrap();
        let psi = haar_random_pure(&sig, 7);
        for keep in [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]] {
            let r = reduce_pure(&psi, &keep).unwrap();
            let s = eigh_unchecked(r.matrix());
            assert_eq!(s.rank(1e-10), 4, "keep={keep:?} {:?}", s.eigenvalues);
        }
    }

    #[test]
    fn random_density_is_valid() {
        let sig = PartySignature::new(vec![2, 3]).unwrap();
        let rho = random_density(&sig, 3, 1);
        DensityMatrix::new(sig, rho.into_matrix()).unwrap();
    }

    #[test]
    fn hermitian_trace_one() {
        let mut rng = rng_from_seed(3);
        let h = random_hermitian_trace_one(8, &mut rng);
        assert!((h.trace() - 1.0).abs() < 1e-14);
    }
}
