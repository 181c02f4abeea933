use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::eigen::eigh_unchecked;
use super::signature::PartySignature;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance on `Σ|a|² = 1` enforced by [`PureState::new`].
pub const NORM_TOL: f64 = 1e-12;
/// Max element-wise deviation from Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on the unit trace of a density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue tolerated in a density matrix.
pub const PSD_TOL: f64 = 1e-9;

/// Max over `|m_ij - conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†) / 2`.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

fn check_square(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.nrows(),
        });
    }
    if m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.ncols(),
        });
    }
    Ok(())
}

/// Hermitian matrix with no trace or positivity constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: CMatrix,
}

impl HermitianMatrix {
    /// Symmetrizes `mat` if it is Hermitian within [`HERMITIAN_TOL`].
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                got: mat.ncols(),
            });
        }
        let dev = hermitian_deviation(&mat);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { mat: symmetrize(&mat) })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut mat = CMatrix::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            mat[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { mat }
    }

    pub(crate) fn from_hermitian_unchecked(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }
}

/// Normalized pure state on a multi-party system.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    sig: PartySignature,
    amps: CVector,
}

impl PureState {
    /// Requires `Σ|a|² = 1` within [`NORM_TOL`].
    pub fn new(sig: PartySignature, amps: CVector) -> Result<Self> {
        Self::with_tolerance(sig, amps, NORM_TOL)
    }

    /// Accepts a norm deviation up to `tol` and renormalizes.
    pub fn with_tolerance(sig: PartySignature, amps: CVector, tol: f64) -> Result<Self> {
        if amps.len() != sig.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: sig.total_dim(),
                got: amps.len(),
            });
        }
        let norm2 = amps.norm_squared();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > tol {
            return Err(Error::NotNormalized(norm2));
        }
        let amps = amps.unscale(norm2.sqrt());
        Ok(Self { sig, amps })
    }

    /// Normalizes any nonzero vector.
    pub fn normalized(sig: PartySignature, amps: CVector) -> Result<Self> {
        if amps.len() != sig.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: sig.total_dim(),
                got: amps.len(),
            });
        }
        let norm = amps.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            sig,
            amps: amps.unscale(norm),
        })
    }

    pub fn new_unchecked(sig: PartySignature, amps: CVector) -> Self {
        Self { sig, amps }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(sig: PartySignature, index: usize) -> Result<Self> {
        let dim = sig.total_dim();
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, parties: dim });
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { sig, amps })
    }

    /// `(|0…0⟩ + e^{iθ}|1…1⟩)/√2` on `n` parties of local dimension `d`.
    pub fn ghz(n: usize, d: usize, theta: f64) -> Result<Self> {
        let sig = PartySignature::uniform(n, d)?;
        let dim = sig.total_dim();
        let ones: usize = sig.strides().iter().sum();
        let mut amps = CVector::zeros(dim);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = Complex64::new(h, 0.0);
        amps[ones] += Complex64::from_polar(h, theta);
        Ok(Self { sig, amps })
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell() -> Self {
        Self::ghz(2, 2, 0.0).expect("two qubits")
    }

    pub fn sig(&self) -> &PartySignature {
        &self.sig
    }

    pub fn amps(&self) -> &CVector {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let sig = self.sig.join(&other.sig)?;
        let amps = self.amps.kronecker(&other.amps);
        Ok(PureState { sig, amps })
    }

    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            sig: self.sig.clone(),
            mat: self.projector(),
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix on a multi-party system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    sig: PartySignature,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity at the default
    /// tolerances; symmetrizes the stored matrix.
    pub fn new(sig: PartySignature, mat: CMatrix) -> Result<Self> {
        Self::validated(sig, mat, HERMITIAN_TOL, TRACE_TOL, PSD_TOL)
    }

    /// Like [`new`](Self::new) with one tolerance for all three checks.
    /// The trace is rescaled to 1 afterwards.
    pub fn with_tolerance(sig: PartySignature, mat: CMatrix, tol: f64) -> Result<Self> {
        let mut rho = Self::validated(sig, mat, tol, tol, tol)?;
        let tr = trace(&rho.mat).re;
        rho.mat.unscale_mut(tr);
        Ok(rho)
    }

    fn validated(sig: PartySignature, mat: CMatrix, herm_tol: f64, trace_tol: f64, psd_tol: f64) -> Result<Self> {
        check_square(&mat, sig.total_dim())?;
        let dev = hermitian_deviation(&mat);
        if dev > herm_tol {
            return Err(Error::NotHermitian(dev));
        }
        let mat = symmetrize(&mat);
        let tr = trace(&mat).re;
        if !tr.is_finite() || (tr - 1.0).abs() > trace_tol {
            return Err(Error::NotNormalized(tr));
        }
        let spec = eigh_unchecked(&mat);
        let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -psd_tol {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { sig, mat })
    }

    /// No validation. Used for `--no-validate` paths and for solver iterates
    /// whose invariants are guaranteed by construction.
    pub fn new_unchecked(sig: PartySignature, mat: CMatrix) -> Self {
        Self { sig, mat }
    }

    pub fn maximally_mixed(sig: PartySignature) -> Self {
        let dim = sig.total_dim();
        let mat = CMatrix::identity(dim, dim).unscale(dim as f64);
        Self { sig, mat }
    }

    /// `Σ p_i |ψ_i⟩⟨ψ_i|` with weights summing to one.
    pub fn mixture(states: &[(f64, &PureState)]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let sig = first.1.sig().clone();
        let dim = sig.total_dim();
        let mut mat = CMatrix::zeros(dim, dim);
        for (p, psi) in states {
            if psi.sig() != &sig {
                return Err(Error::SignatureMismatch("mixture components".into()));
            }
            mat += psi.projector().scale(*p);
        }
        Self::new(sig, mat)
    }

    pub fn sig(&self) -> &PartySignature {
        &self.sig
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let sig = self.sig.join(&other.sig)?;
        Ok(Self {
            sig,
            mat: self.mat.kronecker(&other.mat),
        })
    }

    pub fn to_hermitian(&self) -> HermitianMatrix {
        HermitianMatrix::from_hermitian_unchecked(self.mat.clone())
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }
}
