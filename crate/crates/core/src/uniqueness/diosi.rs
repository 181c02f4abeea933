//! Pure three-party state from the marginals on `AB` and `BC`.
//!
//! With Schmidt form `|ψ⟩ = Σ_k s_k |k⟩_AB |k⟩_C`, `s_k = √λ_k e^{iθ_k}`, the
//! `C`-eigenbasis blocks of `ρ_BC` are `⟨k|ρ_BC|l⟩_C = s_k s̄_l Tr_A|k⟩⟨l|`.
//! The Schmidt vectors come from the spectra of `ρ_AB` and `ρ_C`; the blocks
//! fix the relative phases.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::marginal::{common_system, Marginal};
use crate::tensor::eigen::eigh_unchecked;
use crate::tensor::{permute_matrix, permute_vector, reduce_pure, CMatrix, CVector, PartySignature, PureState};

/// Eigenvalue gap, spectrum matching and final marginal tolerance.
pub const DIOSI_TOL: f64 = 1e-8;
/// Eigenvalues at or below this are treated as zero.
const ZERO_TOL: f64 = 1e-10;
/// Smallest `‖Tr_A|k⟩⟨l|‖` usable as a phase reference.
const REF_TOL: f64 = 1e-6;

/// Positions of `parties` within the sorted `within`.
fn positions(within: &[usize], parties: &[usize]) -> Vec<usize> {
    parties
        .iter()
        .map(|p| within.iter().position(|q| q == p).expect("party present"))
        .collect()
}

pub fn diosi_reconstruct(rho_ab: &Marginal, rho_bc: &Marginal) -> Result<PureState> {
    let sig = common_system(&[rho_ab.clone(), rho_bc.clone()])?.clone();
    let ab = rho_ab.subset();
    let bc = rho_bc.subset();
    let b: Vec<usize> = ab.iter().copied().filter(|p| bc.contains(p)).collect();
    let a: Vec<usize> = ab.iter().copied().filter(|p| !b.contains(p)).collect();
    let c: Vec<usize> = bc.iter().copied().filter(|p| !b.contains(p)).collect();
    if a.is_empty() || c.is_empty() || a.len() + b.len() + c.len() != sig.parties() {
        return Err(Error::InvalidArgument(format!(
            "subsets {ab:?} and {bc:?} must cover all parties with nonempty A and C"
        )));
    }
    let dim_a: usize = a.iter().map(|&p| sig.dims()[p]).product();
    let dim_b: usize = b.iter().map(|&p| sig.dims()[p]).product();
    let dim_c: usize = c.iter().map(|&p| sig.dims()[p]).product();

    let spec_ab = eigh_unchecked(rho_ab.state().matrix());
    let rank = spec_ab.eigenvalues.iter().filter(|&&l| l > ZERO_TOL).count();
    if rank == 0 {
        return Err(Error::NotPositive(spec_ab.eigenvalues[0]));
    }
    for w in spec_ab.eigenvalues[..rank].windows(2) {
        if w[0] - w[1] <= DIOSI_TOL {
            return Err(Error::DegenerateSpectrum { gap: w[0] - w[1] });
        }
    }
    let rho_c = rho_bc.reduce_to(&c)?;
    let spec_c = eigh_unchecked(rho_c.matrix());
    let n = spec_ab.dim().max(spec_c.dim());
    let padded = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let mismatch = (0..n)
        .map(|i| (padded(&spec_ab.eigenvalues, i) - padded(&spec_c.eigenvalues, i)).abs())
        .fold(0.0, f64::max);
    if mismatch > DIOSI_TOL {
        return Err(Error::SpectraMismatch(mismatch));
    }

    // |k⟩_AB reshaped to A × B
    let ab_sig = PartySignature::new(ab.iter().map(|&p| sig.dims()[p]).collect())?;
    let ab_order: Vec<usize> = positions(ab, &a).into_iter().chain(positions(ab, &b)).collect();
    let kets: Vec<CMatrix> = (0..rank)
        .map(|k| {
            let v = spec_ab.eigenvectors.column(k).into_owned();
            let (_, v) = permute_vector(&ab_sig, &v, &ab_order).expect("valid order");
            CMatrix::from_fn(dim_a, dim_b, |i, j| v[i * dim_b + j])
        })
        .collect();
    let reduced_a = |k: usize, l: usize| kets[k].transpose() * kets[l].map(|z| z.conj());

    let bc_sig = PartySignature::new(bc.iter().map(|&p| sig.dims()[p]).collect())?;
    let bc_order: Vec<usize> = positions(bc, &b).into_iter().chain(positions(bc, &c)).collect();
    let (_, rbc) = permute_matrix(&bc_sig, rho_bc.state().matrix(), &bc_order)?;
    let block = |k: usize, l: usize| {
        let uk = spec_c.eigenvectors.column(k);
        let ul = spec_c.eigenvectors.column(l);
        CMatrix::from_fn(dim_b, dim_b, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..dim_c {
                for y in 0..dim_c {
                    acc += uk[x].conj() * rbc[(i * dim_c + x, j * dim_c + y)] * ul[y];
                }
            }
            acc
        })
    };

    let lam = &spec_ab.eigenvalues;
    let mut phase: Vec<Option<Complex64>> = vec![None; rank];
    phase[0] = Some(Complex64::new(1.0, 0.0));
    let mut progress = true;
    while progress {
        progress = false;
        for k in 1..rank {
            if phase[k].is_some() {
                continue;
            }
            for l in 0..rank {
                let Some(pl) = phase[l] else { continue };
                let m = reduced_a(k, l);
                let mn = m.norm();
                if mn < REF_TOL {
                    continue;
                }
                // block = √(λ_kλ_l) e^{iθ_k} e^{−iθ_l} M
                let z = m.dotc(&block(k, l)) / (mn * mn * (lam[k] * lam[l]).sqrt()) * pl;
                phase[k] = Some(z / z.norm());
                progress = true;
                break;
            }
        }
    }

    let mut amps = CVector::zeros(sig.total_dim());
    let order_sig = PartySignature::new(a.iter().chain(&b).chain(&c).map(|&p| sig.dims()[p]).collect())?;
    let mut local = CVector::zeros(sig.total_dim());
    for k in 0..rank {
        let s = phase[k].unwrap_or(Complex64::new(1.0, 0.0)) * lam[k].sqrt();
        for i in 0..dim_a * dim_b {
            let ket = kets[k][(i / dim_b, i % dim_b)];
            for x in 0..dim_c {
                local[i * dim_c + x] += s * ket * spec_c.eigenvectors[(x, k)];
            }
        }
    }
    // local parties are ordered A, B, C; undo that
    let abc: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
    let inverse: Vec<usize> = (0..sig.parties())
        .map(|p| abc.iter().position(|&q| q == p).expect("party present"))
        .collect();
    let (_, permuted) = permute_vector(&order_sig, &local, &inverse)?;
    amps.copy_from(&permuted);
    let psi = PureState::normalized(sig, amps)?;

    let mut worst: f64 = 0.0;
    for m in [rho_ab, rho_bc] {
        let r = reduce_pure(&psi, m.subset())?;
        worst = worst.max((r.matrix() - m.state().matrix()).norm());
    }
    if worst > DIOSI_TOL {
        return Err(Error::PhaseInconsistent(worst));
    }
    Ok(psi)
}
