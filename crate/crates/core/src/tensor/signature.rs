use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest total Hilbert-space dimension accepted by [`PartySignature`].
pub const MAX_TOTAL_DIM: usize = 1 << 16;

/// Local dimension of each party. Party 0 is the slowest-varying index of
/// the row-major amplitude layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PartySignature {
    dims: Vec<usize>,
}

impl PartySignature {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSignature("no parties".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSignature(format!("local dimension {d} < 2")));
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = total.checked_mul(d).filter(|&t| t <= MAX_TOTAL_DIM).ok_or_else(|| {
                Error::InvalidSignature(format!("total dimension of {dims:?} exceeds {MAX_TOTAL_DIM}"))
            })?;
        }
        Ok(Self { dims })
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_equidimensional(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    /// Validates a party subset: nonempty, strictly increasing, in range.
    pub fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        for &p in subset {
            if p >= self.parties() {
                return Err(Error::IndexOutOfRange {
                    index: p,
                    parties: self.parties(),
                });
            }
        }
        if subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedSubset(subset.to_vec()));
        }
        Ok(())
    }

    /// Signature of the parties in `subset`, in the order given.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        self.check_subset(subset)?;
        Self::new(subset.iter().map(|&p| self.dims[p]).collect())
    }

    /// Parties not in `subset`, increasing.
    pub fn complement(&self, subset: &[usize]) -> Vec<usize> {
        (0..self.parties()).filter(|p| !subset.contains(p)).collect()
    }

    /// Concatenation `self ⊗ other`.
    pub fn join(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(dims)
    }

    /// Row-major stride of each party.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.parties()];
        for p in (0..self.parties().saturating_sub(1)).rev() {
            strides[p] = strides[p + 1] * self.dims[p + 1];
        }
        strides
    }

    /// Splits a flat index into per-party digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.parties()];
        for p in (0..self.parties()).rev() {
            out[p] = index % self.dims[p];
            index /= self.dims[p];
        }
        out
    }
}

impl TryFrom<Vec<usize>> for PartySignature {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<PartySignature> for Vec<usize> {
    fn from(sig: PartySignature) -> Vec<usize> {
        sig.dims
    }
}

/// Flat offsets of every assignment of the parties in `parties`, enumerated
/// row-major over those parties, with all other digits zero.
pub(crate) fn subset_offsets(sig: &PartySignature, parties: &[usize]) -> Vec<usize> {
    let strides = sig.strides();
    let mut offsets = vec![0usize];
    for &p in parties {
        let d = sig.dims()[p];
        let mut next = Vec::with_capacity(offsets.len() * d);
        for &o in &offsets {
            for i in 0..d {
                next.push(o + i * strides[p]);
            }
        }
        offsets = next;
    }
    offsets
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dims() {
        assert!(PartySignature::new(vec![]).is_err());
        assert!(PartySignature::new(vec![1, 2]).is_err());
        assert!(PartySignature::new(vec![2; 17]).is_err());
        assert!(PartySignature::new(vec![2; 16]).is_ok());
    }

    #[test]
    fn strides_and_digits() {
        let sig = PartySignature::new(vec![2, 3, 2]).unwrap();
        assert_eq!(sig.strides(), vec![6, 2, 1]);
        assert_eq!(sig.digits(7), vec![1, 0, 1]);
        assert_eq!(sig.total_dim(), 12);
    }

    #[test]
    fn subset_validation() {
        let sig = PartySignature::qubits(4).unwrap();
        assert!(matches!(sig.check_subset(&[]), Err(Error::EmptySubset)));
        assert!(matches!(
            sig.check_subset(&[1, 4]),
            Err(Error::IndexOutOfRange { index: 4, .. })
        ));
        assert!(sig.check_subset(&[2, 1]).is_err());
        assert_eq!(sig.complement(&[1, 3]), vec![0, 2]);
    }

    #[test]
    fn offsets_enumerate_row_major() {
        let sig = PartySignature::new(vec![2, 3, 2]).unwrap();
        assert_eq!(subset_offsets(&sig, &[0, 2]), vec![0, 1, 6, 7]);
        assert_eq!(subset_offsets(&sig, &[1]), vec![0, 2, 4]);
    }
}
