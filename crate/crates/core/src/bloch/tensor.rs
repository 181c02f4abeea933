use std::collections::BTreeMap;

use super::transform::BlochTransform;
use crate::error::{Error, Result};
use crate::tensor::state::{hermitian_deviation, HERMITIAN_TOL};
use crate::tensor::{DensityMatrix, HermitianMatrix, PartySignature};

/// Signatures with at most this many parties store coefficients densely.
pub const DENSE_PARTY_CUTOFF: usize = 3;

/// Identity coefficient tolerance.
const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Sparse(BTreeMap<Vec<usize>, f64>),
}

/// Coefficients `c_k = Tr(ρ Σ_k)` over Pauli strings `Σ_k = ⊗_m g_{k_m}`,
/// so that `ρ = (1/D) Σ_k c_k Σ_k`. The all-identity coefficient is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochTensor {
    sig: PartySignature,
    storage: Storage,
}

impl BlochTensor {
    /// Tensor with `c_0 = 1` and every other coefficient zero (the maximally
    /// mixed state).
    pub fn identity(sig: PartySignature) -> Self {
        let len: usize = sig.dims().iter().map(|d| d * d).product();
        let storage = if sig.parties() <= DENSE_PARTY_CUTOFF {
            let mut v = vec![0.0; len];
            v[0] = 1.0;
            Storage::Dense(v)
        } else {
            let mut m = BTreeMap::new();
            m.insert(vec![0; sig.parties()], 1.0);
            Storage::Sparse(m)
        };
        Self { sig, storage }
    }

    /// From a dense coefficient vector in flat multi-index order.
    pub fn from_dense(sig: PartySignature, coeffs: Vec<f64>) -> Result<Self> {
        let len: usize = sig.dims().iter().map(|d| d * d).product();
        if coeffs.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: coeffs.len(),
            });
        }
        if (coeffs[0] - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::BadNormalization(coeffs[0]));
        }
        let storage = if sig.parties() <= DENSE_PARTY_CUTOFF {
            let mut coeffs = coeffs;
            coeffs[0] = 1.0;
            Storage::Dense(coeffs)
        } else {
            let t = BlochTransform::new(&sig);
            let mut m = BTreeMap::new();
            for (flat, &v) in coeffs.iter().enumerate() {
                if v != 0.0 {
                    m.insert(t.multi_index(flat), if flat == 0 { 1.0 } else { v });
                }
            }
            Storage::Sparse(m)
        };
        Ok(Self { sig, storage })
    }

    /// From explicit `(multi-index, value)` entries; omitted entries are 0.
    /// An explicit identity entry must equal 1.
    pub fn from_entries(sig: PartySignature, entries: impl IntoIterator<Item = (Vec<usize>, f64)>) -> Result<Self> {
        let mut b = Self::identity(sig);
        for (k, v) in entries {
            b.check_index(&k)?;
            if k.iter().all(|&x| x == 0) {
                if (v - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::BadNormalization(v));
                }
                continue;
            }
            b.set_unchecked(&k, v);
        }
        Ok(b)
    }

    fn check_index(&self, k: &[usize]) -> Result<()> {
        if k.len() != self.sig.parties() {
            return Err(Error::DimensionMismatch {
                expected: self.sig.parties(),
                got: k.len(),
            });
        }
        for (p, (&kp, &d)) in k.iter().zip(self.sig.dims()).enumerate() {
            if kp >= d * d {
                return Err(Error::InvalidArgument(format!(
                    "basis label {kp} out of range for party {p} (dimension {d})"
                )));
            }
        }
        Ok(())
    }

    fn flat(&self, k: &[usize]) -> usize {
        k.iter().zip(self.sig.dims()).fold(0, |acc, (&kp, &d)| acc * d * d + kp)
    }

    fn set_unchecked(&mut self, k: &[usize], v: f64) {
        let flat = self.flat(k);
        match &mut self.storage {
            Storage::Dense(c) => c[flat] = v,
            Storage::Sparse(m) => {
                if v == 0.0 {
                    m.remove(k);
                } else {
                    m.insert(k.to_vec(), v);
                }
            }
        }
    }

    /// Sets a non-identity coefficient.
    pub fn set(&mut self, k: &[usize], v: f64) -> Result<()> {
        self.check_index(k)?;
        if k.iter().all(|&x| x == 0) {
            return Err(Error::BadNormalization(v));
        }
        self.set_unchecked(k, v);
        Ok(())
    }

    pub fn get(&self, k: &[usize]) -> f64 {
        match &self.storage {
            Storage::Dense(c) => c[self.flat(k)],
            Storage::Sparse(m) => m.get(k).copied().unwrap_or(0.0),
        }
    }

    pub fn sig(&self) -> &PartySignature {
        &self.sig
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(c) => c.clone(),
            Storage::Sparse(m) => {
                let len: usize = self.sig.dims().iter().map(|d| d * d).product();
                let mut out = vec![0.0; len];
                for (k, &v) in m {
                    out[self.flat(k)] = v;
                }
                out
            }
        }
    }

    /// Nonzero coefficients in multi-index order, identity included.
    pub fn nonzero(&self) -> Vec<(Vec<usize>, f64)> {
        match &self.storage {
            Storage::Dense(c) => {
                let t = BlochTransform::new(&self.sig);
                c.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(flat, &v)| (t.multi_index(flat), v))
                    .collect()
            }
            Storage::Sparse(m) => m.iter().map(|(k, &v)| (k.clone(), v)).collect(),
        }
    }
}

/// Bloch coefficients of a density matrix.
pub fn decompose(rho: &DensityMatrix) -> Result<BlochTensor> {
    decompose_hermitian(rho.sig(), &rho.to_hermitian())
}

/// Bloch coefficients of any Hermitian, unit-trace matrix on `sig`.
pub fn decompose_hermitian(sig: &PartySignature, h: &HermitianMatrix) -> Result<BlochTensor> {
    if h.dim() != sig.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: sig.total_dim(),
            got: h.dim(),
        });
    }
    let dev = hermitian_deviation(h.matrix());
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let t = BlochTransform::new(sig);
    BlochTensor::from_dense(sig.clone(), t.forward(h.matrix()))
}

/// `(1/D) Σ_k c_k Σ_k`.
pub fn reconstruct(b: &BlochTensor) -> Result<HermitianMatrix> {
    let dense = b.to_dense();
    if (dense[0] - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::BadNormalization(dense[0]));
    }
    let t = BlochTransform::new(b.sig());
    Ok(HermitianMatrix::from_hermitian_unchecked(t.inverse(&dense)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::tensor::random::{random_density, random_hermitian_trace_one};
    use crate::tensor::{CMatrix, PureState};

    #[test]
    fn maximally_mixed_has_no_correlations() {
        let sig = PartySignature::qubits(3).unwrap();
        let b = decompose(&DensityMatrix::maximally_mixed(sig)).unwrap();
        assert_eq!(b.nonzero(), vec![(vec![0, 0, 0], 1.0)]);
    }

    #[test]
    fn zero_state_bloch_vector() {
        let psi = PureState::basis(PartySignature::qubits(1).unwrap(), 0).unwrap();
        let b = decompose(&psi.to_density()).unwrap();
        assert!(b.get(&[1]).abs() < 1e-15);
        assert!(b.get(&[2]).abs() < 1e-15);
        assert!((b.get(&[3]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ghz3_coefficients() {
        // X=1, Y=2, Z=3
        let ghz = PureState::ghz(3, 2, 0.0).unwrap();
        let b = decompose(&ghz.to_density()).unwrap();
        let mut want = BTreeMap::new();
        want.insert(vec![0, 0, 0], 1.0);
        want.insert(vec![3, 3, 0], 1.0);
        want.insert(vec![3, 0, 3], 1.0);
        want.insert(vec![0, 3, 3], 1.0);
        want.insert(vec![1, 1, 1], 1.0);
        want.insert(vec![1, 2, 2], -1.0);
        want.insert(vec![2, 1, 2], -1.0);
        want.insert(vec![2, 2, 1], -1.0);
        let t = BlochTransform::new(ghz.sig());
        for flat in 0..64 {
            let k = t.multi_index(flat);
            let expect = want.get(&k).copied().unwrap_or(0.0);
            assert!((b.get(&k) - expect).abs() < 1e-14, "{k:?}");
        }
    }

    #[test]
    fn reconstruct_identity_and_pole() {
        let b = BlochTensor::identity(PartySignature::qubits(3).unwrap());
        let m = reconstruct(&b).unwrap();
        assert!((m.matrix() - CMatrix::identity(8, 8).unscale(8.0)).norm() < 1e-15);
        let mut z = BlochTensor::identity(PartySignature::qubits(1).unwrap());
        z.set(&[3], 1.0).unwrap();
        let m = reconstruct(&z).unwrap();
        assert!((m.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(m.matrix()[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn round_trip_dense_and_sparse() {
        let mut rng = rng_from_seed(5);
        for dims in [vec![2, 2, 2], vec![2, 2, 2, 2], vec![3, 2]] {
            let sig = PartySignature::new(dims).unwrap();
            let rho = random_density(&sig, 2, 3);
            let b = decompose(&rho).unwrap();
            assert_eq!(b.is_dense(), sig.parties() <= DENSE_PARTY_CUTOFF);
            let back = reconstruct(&b).unwrap();
            assert!((back.matrix() - rho.matrix()).norm() < 1e-10);
            let h = random_hermitian_trace_one(sig.total_dim(), &mut rng);
            let b = decompose_hermitian(&sig, &h).unwrap();
            assert!((reconstruct(&b).unwrap().matrix() - h.matrix()).norm() < 1e-10);
        }
    }

    #[test]
    fn normalization_is_enforced() {
        let sig = PartySignature::qubits(1).unwrap();
        assert!(matches!(
            BlochTensor::from_entries(sig.clone(), [(vec![0], 0.5)]),
            Err(Error::BadNormalization(_))
        ));
        let mut b = BlochTensor::identity(sig.clone());
        assert!(b.set(&[0], 2.0).is_err());
        assert!(b.set(&[4], 0.1).is_err());
        let m = CMatrix::identity(2, 2);
        let h = HermitianMatrix::new(m).unwrap();
        assert!(matches!(decompose_hermitian(&sig, &h), Err(Error::BadNormalization(_))));
    }
}
