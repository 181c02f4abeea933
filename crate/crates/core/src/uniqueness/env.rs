//! Rank certificate for the environment equations of the half-plus-one
//! scenario.
//!
//! Parties `0..N/2` are the free parties, `N/2..N` the shared block `u`.
//! Equating the purifications for free parties `0` and `r` and fixing
//! `(i_0, i_r, v) = (c1, cr, cv)` gives `d^{N/2}` homogeneous equations in
//! the environment vectors `e¹_{j_r,v'}` (`j_r ≠ cr`), `e²_{j_0,v'}`
//! (`j_0 ≠ c1`) and the differences `e¹_{cr,v'} − e²_{c1,v'}`, with
//! amplitude coefficients `a[c1, j_r, v', u]`, `a[j_0, cr, v', u]` and
//! `a[c1, cr, v', u]`. Full column rank forces all of them to vanish, which
//! collapses the environment to a single vector.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::tensor::PureState;

/// Relative singular value cutoff for the block rank.
pub const ENV_RANK_RTOL: f64 = 1e-10;
/// Up to this many parties every block is checked.
pub const ENV_FULL_ENUMERATION_MAX_N: usize = 6;
/// Blocks drawn beyond that.
pub const ENV_SAMPLE_BLOCKS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockRank {
    /// Second free party of the pair; the first is party 0.
    pub r: usize,
    pub c1: usize,
    pub cr: usize,
    /// Fixed digits of the other free parties, in party order.
    pub cv: Vec<usize>,
    pub rank: usize,
    pub variables: usize,
    pub equations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnvSystemCertificate {
    pub block_ranks: Vec<BlockRank>,
    pub full_rank_all_blocks: bool,
    /// `true` when only a seeded sample of blocks was checked.
    pub sampled: bool,
}

/// Coefficient matrix of one block, rows indexed by `u`.
pub fn env_block(psi: &PureState, r: usize, c1: usize, cr: usize) -> Result<DMatrix<Complex64>> {
    let (n, d) = check(psi)?;
    let half = n / 2;
    if r == 0 || r >= half || c1 >= d || cr >= d {
        return Err(Error::InvalidArgument(format!("no block (r={r}, c1={c1}, cr={cr})")));
    }
    let others: Vec<usize> = (1..half).filter(|&p| p != r).collect();
    let n_v = d.pow(others.len() as u32);
    let n_u = d.pow(half as u32);
    let block_dim = d.pow(half as u32);
    let amp = |i0: usize, ir: usize, v: usize, u: usize| {
        let mut digits = vec![0; half];
        digits[0] = i0;
        digits[r] = ir;
        let mut rest = v;
        for &p in others.iter().rev() {
            digits[p] = rest % d;
            rest /= d;
        }
        let free = digits.iter().fold(0, |acc, &x| acc * d + x);
        psi.amps()[free * block_dim + u]
    };
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    for jr in (0..d).filter(|&j| j != cr) {
        for v in 0..n_v {
            cols.push((0..n_u).map(|u| amp(c1, jr, v, u)).collect());
        }
    }
    for j0 in (0..d).filter(|&j| j != c1) {
        for v in 0..n_v {
            cols.push((0..n_u).map(|u| amp(j0, cr, v, u)).collect());
        }
    }
    for v in 0..n_v {
        cols.push((0..n_u).map(|u| amp(c1, cr, v, u)).collect());
    }
    Ok(DMatrix::from_fn(n_u, cols.len(), |i, j| cols[j][i]))
}

fn check(psi: &PureState) -> Result<(usize, usize)> {
    let sig = psi.sig();
    let n = sig.parties();
    if n % 2 == 1 {
        return Err(Error::OddN(n));
    }
    if !sig.is_equidimensional() {
        return Err(Error::NotEquidimensional(sig.dims().to_vec()));
    }
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "environment equations need at least 4 parties, got {n}"
        )));
    }
    Ok((n, sig.dims()[0]))
}

fn numerical_rank(m: &DMatrix<Complex64>) -> usize {
    let s = m.singular_values();
    let top = s.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > ENV_RANK_RTOL * top).count()
}

/// Checks every block for `N <= 6` or when there are at most
/// [`ENV_SAMPLE_BLOCKS`] of them, else a sample seeded with 0.
pub fn env_rank_certificate(psi: &PureState) -> Result<EnvSystemCertificate> {
    env_rank_certificate_seeded(psi, 0)
}

pub fn env_rank_certificate_seeded(psi: &PureState, seed: u64) -> Result<EnvSystemCertificate> {
    let (n, d) = check(psi)?;
    let half = n / 2;
    let n_cv = half - 2;
    let mut keys: Vec<(usize, usize, usize, usize)> = Vec::new();
    for r in 1..half {
        for c1 in 0..d {
            for cr in 0..d {
                for cv in 0..d.pow(n_cv as u32) {
                    keys.push((r, c1, cr, cv));
                }
            }
        }
    }
    let sampled = n > ENV_FULL_ENUMERATION_MAX_N && keys.len() > ENV_SAMPLE_BLOCKS;
    if sampled {
        let mut rng = rng_from_seed(seed);
        let mut picked = Vec::with_capacity(ENV_SAMPLE_BLOCKS);
        for _ in 0..ENV_SAMPLE_BLOCKS {
            let i = rng.random_range(0..keys.len());
            picked.push(keys.swap_remove(i));
        }
        picked.sort_unstable();
        keys = picked;
    }
    let mut block_ranks = Vec::with_capacity(keys.len());
    for (r, c1, cr, cv) in keys {
        // the coefficients do not involve cv; it only labels the unknowns
        let m = env_block(psi, r, c1, cr)?;
        let mut digits = vec![0; n_cv];
        let mut rest = cv;
        for x in digits.iter_mut().rev() {
            *x = rest % d;
            rest /= d;
        }
        block_ranks.push(BlockRank {
            r,
            c1,
            cr,
            cv: digits,
            rank: numerical_rank(&m),
            variables: m.ncols(),
            equations: m.nrows(),
        });
    }
    let full_rank_all_blocks = block_ranks.iter().all(|b| b.rank == b.variables);
    Ok(EnvSystemCertificate {
        block_ranks,
        full_rank_all_blocks,
        sampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{haar_random_pure, PartySignature};

    fn q(n: usize) -> PartySignature {
        PartySignature::qubits(n).unwrap()
    }

    #[test]
    fn block_sizes() {
        for (n, d, vars, eqs) in [(4, 2, 3, 4), (6, 2, 6, 8), (4, 3, 5, 9), (8, 2, 12, 16)] {
            let sig = PartySignature::uniform(n, d).unwrap();
            let psi = haar_random_pure(&sig, 1);
            let m = env_block(&psi, 1, 0, 0).unwrap();
            assert_eq!((m.ncols(), m.nrows()), (vars, eqs));
            let half = n as u32 / 2;
            assert_eq!(vars, 2 * d.pow(half - 1) - d.pow(half - 2));
        }
    }

    #[test]
    fn random_states_are_full_rank() {
        for n in [4, 6] {
            for seed in 0..5 {
                let cert = env_rank_certificate(&haar_random_pure(&q(n), seed)).unwrap();
                assert!(cert.full_rank_all_blocks && !cert.sampled);
                let expected_blocks = (n / 2 - 1) * 2usize.pow(n as u32 / 2);
                assert_eq!(cert.block_ranks.len(), expected_blocks);
            }
        }
    }

    #[test]
    fn larger_systems() {
        // 48 blocks at N = 8, fewer than a sample
        let cert = env_rank_certificate(&haar_random_pure(&q(8), 2)).unwrap();
        assert!(!cert.sampled && cert.full_rank_all_blocks);
        assert_eq!(cert.block_ranks.len(), 48);
        let cert = env_rank_certificate(&haar_random_pure(&q(10), 2)).unwrap();
        assert!(cert.sampled && cert.full_rank_all_blocks);
        assert_eq!(cert.block_ranks.len(), ENV_SAMPLE_BLOCKS);
    }

    #[test]
    fn product_and_ghz_are_deficient() {
        let zero = PureState::basis(q(4), 0).unwrap();
        let cert = env_rank_certificate(&zero).unwrap();
        assert!(!cert.full_rank_all_blocks);
        let b = cert.block_ranks.iter().find(|b| b.c1 == 0 && b.cr == 0).unwrap();
        assert_eq!((b.rank, b.variables), (1, 3));

        let ghz = PureState::ghz(4, 2, 0.0).unwrap();
        let cert = env_rank_certificate(&ghz).unwrap();
        assert!(!cert.full_rank_all_blocks);
        assert!(cert.block_ranks.iter().all(|b| b.rank <= 2));
    }

    #[test]
    fn signature_errors() {
        assert!(matches!(
            env_rank_certificate(&haar_random_pure(&q(5), 0)),
            Err(Error::OddN(5))
        ));
        let mixed = PartySignature::new(vec![2, 3, 2, 2]).unwrap();
        assert!(matches!(
            env_rank_certificate(&haar_random_pure(&mixed, 0)),
            Err(Error::NotEquidimensional(_))
        ));
    }
}
