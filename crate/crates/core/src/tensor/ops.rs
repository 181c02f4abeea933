use num_complex::Complex64;

use super::eigen::eigh_unchecked;
use super::signature::PartySignature;
use super::state::{CVector, DensityMatrix, PureState};
use crate::error::{Error, Result};

/// Eigenvalues at or below this count as zero when ranking a state.
pub const RANK_TOL: f64 = 1e-12;

/// Spectral purification `Σ_k √λ_k |v_k⟩|k⟩_E`.
///
/// The environment is appended as a last party of dimension `env_dim`.
/// With `env_dim == 1` (only possible for a pure input) the environment
/// factor `|0⟩` is trivial and the state is returned on `rho`'s own
/// signature.
pub fn purify(rho: &DensityMatrix, env_dim: usize) -> Result<PureState> {
    let spec = eigh_unchecked(rho.matrix());
    let rank = spec.eigenvalues.iter().filter(|&&l| l > RANK_TOL).count();
    if env_dim < rank.max(1) {
        return Err(Error::EnvTooSmall { env_dim, rank });
    }
    let dim = rho.dim();
    if env_dim == 1 {
        let amps = spec.eigenvectors.column(0).into_owned();
        return PureState::normalized(rho.sig().clone(), amps);
    }
    let sig = rho.sig().join(&PartySignature::new(vec![env_dim])?)?;
    let mut amps = CVector::zeros(dim * env_dim);
    for k in 0..rank {
        let w = spec.eigenvalues[k].sqrt();
        for i in 0..dim {
            amps[i * env_dim + k] += spec.eigenvectors[(i, k)] * w;
        }
    }
    PureState::normalized(sig, amps)
}

/// `½‖a − b‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.sig() != b.sig() {
        return Err(Error::SignatureMismatch(format!(
            "{:?} vs {:?}",
            a.sig().dims(),
            b.sig().dims()
        )));
    }
    let diff = a.matrix() - b.matrix();
    let spec = eigh_unchecked(&diff);
    let d = 0.5 * spec.eigenvalues.iter().map(|l| l.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(psi: &PureState, rho: &DensityMatrix) -> Result<f64> {
    if psi.sig() != rho.sig() {
        return Err(Error::SignatureMismatch(format!(
            "{:?} vs {:?}",
            psi.sig().dims(),
            rho.sig().dims()
        )));
    }
    let v = rho.matrix() * psi.amps();
    let f: Complex64 = psi.amps().dotc(&v);
    Ok(f.re.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::partial::{partial_trace, reduce_pure};
    use crate::tensor::random::{haar_random_pure, random_density};
    use crate::tensor::state::CMatrix;

    #[test]
    fn pure_input_trivial_environment() {
        let sig = PartySignature::qubits(2).unwrap();
        let psi = haar_random_pure(&sig, 3);
        let out = purify(&psi.to_density(), 1).unwrap();
        assert_eq!(out.sig(), psi.sig());
        assert!((out.overlap(&psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_qubit_purifies_to_bell_type() {
        let rho = DensityMatrix::maximally_mixed(PartySignature::qubits(1).unwrap());
        let psi = purify(&rho, 2).unwrap();
        let r = reduce_pure(&psi, &[0]).unwrap();
        assert!((r.matrix() - rho.matrix()).norm() < 1e-12);
        let other = reduce_pure(&psi, &[1]).unwrap();
        assert!((other.matrix() - CMatrix::identity(2, 2).unscale(2.0)).norm() < 1e-12);
    }

    #[test]
    fn environment_too_small() {
        let sig = PartySignature::new(vec![3, 3]).unwrap();
        let rho = random_density(&sig, 3, 8);
        assert!(matches!(
            purify(&rho, 2),
            Err(Error::EnvTooSmall { env_dim: 2, rank: 3 })
        ));
    }

    #[test]
    fn purify_round_trip() {
        let sig = PartySignature::new(vec![2, 3]).unwrap();
        for seed in 0..10 {
            let rho = random_density(&sig, 4, seed);
            let psi = purify(&rho, 4).unwrap();
            let back = partial_trace(&psi.to_density(), &[0, 1]).unwrap();
            assert!((back.matrix() - rho.matrix()).norm() < 1e-9);
        }
    }

    #[test]
    fn distances() {
        let sig = PartySignature::qubits(1).unwrap();
        let zero = PureState::basis(sig.clone(), 0).unwrap();
        let one = PureState::basis(sig.clone(), 1).unwrap();
        let rho = random_density(&sig, 2, 3);
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-15);
        assert!((trace_distance(&zero.to_density(), &one.to_density()).unwrap() - 1.0).abs() < 1e-15);
        let psi = haar_random_pure(&PartySignature::qubits(3).unwrap(), 4);
        assert!((fidelity_pure(&psi, &psi.to_density()).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity_pure(&psi, &rho).is_err());
    }
}
