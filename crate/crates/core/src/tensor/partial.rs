//! Partial traces and party permutations over the row-major layout.

use num_complex::Complex64;

use super::signature::{subset_offsets, PartySignature};
use super::state::{CMatrix, CVector, DensityMatrix, PureState};
use crate::error::Result;

/// Offset tables splitting a flat index into kept and traced parts.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub keep: Vec<usize>,
    pub rest: Vec<usize>,
}

impl Split {
    pub fn new(sig: &PartySignature, keep: &[usize]) -> Self {
        let traced = sig.complement(keep);
        Self {
            keep: subset_offsets(sig, keep),
            rest: subset_offsets(sig, &traced),
        }
    }

    /// Amplitudes reshaped to `dim(keep) × dim(rest)`.
    pub fn reshape(&self, amps: &CVector) -> CMatrix {
        CMatrix::from_fn(self.keep.len(), self.rest.len(), |a, t| {
            amps[self.keep[a] + self.rest[t]]
        })
    }

    pub fn flatten(&self, m: &CMatrix, dim: usize) -> CVector {
        let mut out = CVector::zeros(dim);
        for a in 0..self.keep.len() {
            for t in 0..self.rest.len() {
                out[self.keep[a] + self.rest[t]] = m[(a, t)];
            }
        }
        out
    }
}

/// Reduced matrix on `keep` of an arbitrary operator on `sig`.
pub fn partial_trace_matrix(sig: &PartySignature, mat: &CMatrix, keep: &[usize]) -> Result<CMatrix> {
    sig.check_subset(keep)?;
    let split = Split::new(sig, keep);
    let k = split.keep.len();
    let mut out = CMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &split.rest {
                acc += mat[(split.keep[a] + t, split.keep[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Reduced state on the parties in `keep` (strictly increasing, 0-based).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let sig = rho.sig().restrict(keep)?;
    let mat = partial_trace_matrix(rho.sig(), rho.matrix(), keep)?;
    Ok(DensityMatrix::new_unchecked(sig, mat))
}

/// Reduced state of `|ψ⟩⟨ψ|` without forming the full projector.
pub fn reduce_pure(psi: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    let sig = psi.sig().restrict(keep)?;
    let a = Split::new(psi.sig(), keep).reshape(psi.amps());
    let mat = &a * a.adjoint();
    Ok(DensityMatrix::new_unchecked(sig, mat))
}

/// Reorders parties so that new party `i` is old party `order[i]`.
pub fn permute_vector(sig: &PartySignature, amps: &CVector, order: &[usize]) -> Result<(PartySignature, CVector)> {
    let new_sig = PartySignature::new(order.iter().map(|&p| sig.dims()[p]).collect())?;
    let old_strides = sig.strides();
    let dim = sig.total_dim();
    let mut out = CVector::zeros(dim);
    for idx in 0..dim {
        let digits = new_sig.digits(idx);
        let old: usize = digits.iter().zip(order).map(|(&i, &p)| i * old_strides[p]).sum();
        out[idx] = amps[old];
    }
    Ok((new_sig, out))
}

/// Matrix version of [`permute_vector`].
pub fn permute_matrix(sig: &PartySignature, mat: &CMatrix, order: &[usize]) -> Result<(PartySignature, CMatrix)> {
    let new_sig = PartySignature::new(order.iter().map(|&p| sig.dims()[p]).collect())?;
    let old_strides = sig.strides();
    let dim = sig.total_dim();
    let map: Vec<usize> = (0..dim)
        .map(|idx| {
            new_sig
                .digits(idx)
                .iter()
                .zip(order)
                .map(|(&i, &p)| i * old_strides[p])
                .sum()
        })
        .collect();
    let out = CMatrix::from_fn(dim, dim, |i, j| mat[(map[i], map[j])]);
    Ok((new_sig, out))
}
