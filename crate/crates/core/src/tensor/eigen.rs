use std::cmp::Ordering;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::state::{symmetrize, CMatrix, HermitianMatrix};

/// Eigenvalues closer than this (relative to max(1, |λ|)) count as tied.
const TIE_TOL: f64 = 1e-12;

/// Eigendecomposition `M = V Λ V†`, eigenvalues descending.
///
/// Each eigenvector is rotated so its largest-modulus component (lowest
/// index on ties) is real and positive. Tied eigenvalues are ordered by
/// the lexicographic order of their eigenvectors' `(re, im)` components.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= l;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `Σ_k f(λ_k) |v_k⟩⟨v_k|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l.abs() > tol).count()
    }
}

pub fn eigh(m: &HermitianMatrix) -> Spectrum {
    eigh_unchecked(m.matrix())
}

/// Symmetrizes and diagonalizes without checking Hermiticity.
pub fn eigh_unchecked(m: &CMatrix) -> Spectrum {
    let n = m.nrows();
    if n == 0 {
        return Spectrum {
            eigenvalues: vec![],
            eigenvectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut cols: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|j| {
            let mut v: Vec<Complex64> = eig.eigenvectors.column(j).iter().copied().collect();
            fix_phase(&mut v);
            (eig.eigenvalues[j], v)
        })
        .collect();
    cols.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    // order tie clusters deterministically
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (cols[end - 1].0 - cols[end].0).abs() <= TIE_TOL * cols[start].0.abs().max(1.0) {
            end += 1;
        }
        if end - start > 1 {
            cols[start..end].sort_by(|a, b| lex_cmp(&a.1, &b.1));
        }
        start = end;
    }
    let eigenvalues = cols.iter().map(|c| c.0).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| cols[j].1[i]);
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[pivot] = Complex64::new(v[pivot].re, 0.0);
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.re.partial_cmp(&y.re).unwrap_or(Ordering::Equal) {
            Ordering::Equal => {}
            o => return o.reverse(),
        }
        match x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal) {
            Ordering::Equal => {}
            o => return o.reverse(),
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_normal, rng_from_seed};

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = rng_from_seed(seed);
        let g = CMatrix::from_fn(n, n, |_, _| complex_normal(&mut rng));
        symmetrize(&g)
    }

    #[test]
    fn identity_spectrum() {
        let s = eigh(&HermitianMatrix::from_real_diagonal(&[1.0, 1.0]));
        assert_eq!(s.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_counterexample_spectrum() {
        let h = HermitianMatrix::from_real_diagonal(&[0.5, 0.5, 0.5, -0.5]);
        let s = eigh(&h);
        for (got, want) in s.eigenvalues.iter().zip([0.5, 0.5, 0.5, -0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        for (n, seed) in [(2, 1), (5, 2), (16, 3), (32, 4)] {
            let m = random_hermitian(n, seed);
            let s = eigh_unchecked(&m);
            let err = (s.reconstruct() - &m).norm();
            assert!(err < 1e-9 * n as f64, "n={n} err={err}");
            let gram = s.eigenvectors.adjoint() * &s.eigenvectors;
            assert!((gram - CMatrix::identity(n, n)).norm() < 1e-10);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn deterministic_for_degenerate_input() {
        let m = CMatrix::identity(4, 4);
        let a = eigh_unchecked(&m);
        let b = eigh_unchecked(&m);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }
}
