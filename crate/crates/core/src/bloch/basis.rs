use num_complex::Complex64;

use crate::tensor::CMatrix;

/// Local operator basis: identity first, then `d² − 1` traceless Hermitian
/// matrices, all normalized so that `Tr(g_i g_j) = d δ_ij`.
///
/// For `d = 2` this is `(1, σ_x, σ_y, σ_z)`. For `d > 2` it is the
/// generalized Gell-Mann family scaled by `√(d/2)`, ordered as
/// `(sym(0,1), asym(0,1), sym(0,2), asym(0,2), …, sym(d−2,d−1), asym(d−2,d−1),
/// diag_1, …, diag_{d−1})`, where `sym(j,k) = E_jk + E_kj`,
/// `asym(j,k) = −i(E_jk − E_kj)` and `diag_l ∝ Σ_{j<l} E_jj − l·E_ll`.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    local_dim: usize,
    ops: Vec<CMatrix>,
}

impl OperatorBasis {
    pub fn new(d: usize) -> Self {
        assert!(d >= 2, "local dimension must be at least 2");
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let scale = (d as f64 / 2.0).sqrt();
        let mut ops = vec![CMatrix::identity(d, d)];
        for j in 0..d {
            for k in (j + 1)..d {
                let mut sym = CMatrix::zeros(d, d);
                sym[(j, k)] = one * scale;
                sym[(k, j)] = one * scale;
                ops.push(sym);
                let mut asym = CMatrix::zeros(d, d);
                asym[(j, k)] = -i * scale;
                asym[(k, j)] = i * scale;
                ops.push(asym);
            }
        }
        for l in 1..d {
            let norm = (2.0 / (l * (l + 1)) as f64).sqrt() * scale;
            let mut diag = CMatrix::zeros(d, d);
            for j in 0..l {
                diag[(j, j)] = one * norm;
            }
            diag[(l, l)] = -one * (l as f64 * norm);
            ops.push(diag);
        }
        Self { local_dim: d, ops }
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Nonzero entries `(row, col, value)` of each operator.
    pub(crate) fn sparse(&self) -> Vec<Vec<(usize, usize, Complex64)>> {
        self.ops
            .iter()
            .map(|m| {
                let mut out = Vec::new();
                for r in 0..self.local_dim {
                    for c in 0..self.local_dim {
                        if m[(r, c)].norm() > 0.0 {
                            out.push((r, c, m[(r, c)]));
                        }
                    }
                }
                out
            })
            .collect()
    }
}
