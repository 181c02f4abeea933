use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::eigen::eigh;
use crate::tensor::state::{hermitian_deviation, HERMITIAN_TOL};
use crate::tensor::HermitianMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub tr2: f64,
    pub tr3: f64,
    pub is_pure: bool,
    pub tol: f64,
}

/// `Tr(H²)` and `Tr(H³)` from matrix entries, no eigensolve.
pub fn power_traces(h: &HermitianMatrix) -> (f64, f64) {
    let m = h.matrix();
    let tr2 = m.iter().map(|z| z.norm_sqr()).sum();
    let sq = m * m;
    // Tr(H²·H) = Σ_ij (H²)_ij H_ji
    let mut tr3 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            tr3 += (sq[(i, j)] * m[(j, i)]).re;
        }
    }
    (tr2, tr3)
}

/// A Hermitian matrix is a pure state exactly when `Tr H² = Tr H³ = 1`.
pub fn purity_check(h: &HermitianMatrix, tol: f64) -> Result<PurityReport> {
    let dev = hermitian_deviation(h.matrix());
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let (tr2, tr3) = power_traces(h);
    Ok(PurityReport {
        tr2,
        tr3,
        is_pure: (tr2 - 1.0).abs() <= tol && (tr3 - 1.0).abs() <= tol,
        tol,
    })
}

/// Spectral purity: top eigenvalue within `tol` of 1, the rest within `tol` of 0.
pub fn is_spectrally_pure(h: &HermitianMatrix, tol: f64) -> bool {
    let spec = eigh(h);
    let ev = &spec.eigenvalues;
    (ev[0] - 1.0).abs() <= tol && ev[1..].iter().all(|l| l.abs() <= tol)
}
