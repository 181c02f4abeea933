//! Fast change of basis between matrix entries and Bloch coefficients.
//!
//! A `D × D` matrix is first laid out as a tensor with one `d_m²`-sized
//! mode per party (mode index `i_m·d_m + j_m` for row digit `i_m` and
//! column digit `j_m`), then each mode is contracted with the sparse local
//! basis. Cost is `O(D² · Σ_m nnz_m)` rather than `O(D⁴)`.

use num_complex::Complex64;

use super::basis::OperatorBasis;
use crate::tensor::{CMatrix, PartySignature};

type Sparse = Vec<Vec<(usize, usize, Complex64)>>;

#[derive(Debug, Clone)]
pub struct BlochTransform {
    sig: PartySignature,
    bases: Vec<Sparse>,
    pair_dims: Vec<usize>,
    row_offset: Vec<usize>,
    col_offset: Vec<usize>,
    len: usize,
}

impl BlochTransform {
    pub fn new(sig: &PartySignature) -> Self {
        let pair_dims: Vec<usize> = sig.dims().iter().map(|d| d * d).collect();
        let n = sig.parties();
        let mut pair_strides = vec![1usize; n];
        for p in (0..n.saturating_sub(1)).rev() {
            pair_strides[p] = pair_strides[p + 1] * pair_dims[p + 1];
        }
        let dim = sig.total_dim();
        let mut row_offset = vec![0; dim];
        let mut col_offset = vec![0; dim];
        for idx in 0..dim {
            let digits = sig.digits(idx);
            for p in 0..n {
                row_offset[idx] += digits[p] * sig.dims()[p] * pair_strides[p];
                col_offset[idx] += digits[p] * pair_strides[p];
            }
        }
        let bases = sig.dims().iter().map(|&d| OperatorBasis::new(d).sparse()).collect();
        Self {
            sig: sig.clone(),
            bases,
            len: pair_dims.iter().product(),
            pair_dims,
            row_offset,
            col_offset,
        }
    }

    pub fn sig(&self) -> &PartySignature {
        &self.sig
    }

    /// Number of Bloch coefficients, `∏ d_m²`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn pair_dims(&self) -> &[usize] {
        &self.pair_dims
    }

    /// Flat coefficient index of a multi-index `(k_1, …, k_N)`.
    pub fn flat_index(&self, k: &[usize]) -> usize {
        k.iter().zip(&self.pair_dims).fold(0, |acc, (&ki, &n)| acc * n + ki)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.pair_dims.len()];
        for p in (0..self.pair_dims.len()).rev() {
            out[p] = flat % self.pair_dims[p];
            flat /= self.pair_dims[p];
        }
        out
    }

    /// `c_k = Tr(M · Σ_k)` for every Pauli string `Σ_k`; imaginary parts
    /// (zero for Hermitian `M`) are dropped.
    pub fn forward(&self, m: &CMatrix) -> Vec<f64> {
        self.forward_complex(m).into_iter().map(|z| z.re).collect()
    }

    pub fn forward_complex(&self, m: &CMatrix) -> Vec<Complex64> {
        let dim = self.sig.total_dim();
        let mut data = vec![Complex64::new(0.0, 0.0); self.len];
        for r in 0..dim {
            for c in 0..dim {
                data[self.row_offset[r] + self.col_offset[c]] = m[(r, c)];
            }
        }
        for mode in 0..self.pair_dims.len() {
            let d = self.sig.dims()[mode];
            let basis = &self.bases[mode];
            data = self.apply_mode(&data, mode, |input, out| {
                for (k, entries) in basis.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    // Tr(ρ σ) = Σ ρ_ji σ_ij
                    for &(r, c, v) in entries {
                        acc += v * input[c * d + r];
                    }
                    out[k] = acc;
                }
            });
        }
        data
    }

    /// `M = (1/D) Σ_k c_k Σ_k`.
    pub fn inverse(&self, coeffs: &[f64]) -> CMatrix {
        assert_eq!(coeffs.len(), self.len, "coefficient vector length");
        let mut data: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        for mode in 0..self.pair_dims.len() {
            let d = self.sig.dims()[mode];
            let basis = &self.bases[mode];
            data = self.apply_mode(&data, mode, |input, out| {
                out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                for (k, entries) in basis.iter().enumerate() {
                    let ck = input[k];
                    if ck.re == 0.0 && ck.im == 0.0 {
                        continue;
                    }
                    for &(r, c, v) in entries {
                        out[r * d + c] += v * ck;
                    }
                }
            });
        }
        let dim = self.sig.total_dim();
        let scale = 1.0 / dim as f64;
        CMatrix::from_fn(dim, dim, |r, c| data[self.row_offset[r] + self.col_offset[c]] * scale)
    }

    /// Applies `f` to every 1-D fiber along `mode`.
    fn apply_mode(
        &self,
        data: &[Complex64],
        mode: usize,
        f: impl Fn(&[Complex64], &mut [Complex64]),
    ) -> Vec<Complex64> {
        let n = self.pair_dims[mode];
        let inner: usize = self.pair_dims[mode + 1..].iter().product();
        let outer = self.len / (n * inner);
        let mut out = vec![Complex64::new(0.0, 0.0); self.len];
        let mut fiber_in = vec![Complex64::new(0.0, 0.0); n];
        let mut fiber_out = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * n * inner + i;
                for p in 0..n {
                    fiber_in[p] = data[base + p * inner];
                }
                f(&fiber_in, &mut fiber_out);
                for p in 0..n {
                    out[base + p * inner] = fiber_out[p];
                }
            }
        }
        out
    }
}
