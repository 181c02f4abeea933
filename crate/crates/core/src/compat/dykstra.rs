//! Dykstra's alternating projections between the affine constraint set `A`
//! and the PSD cone `C`.
//!
//! `A` is affine, so its correction term telescopes away and only the cone
//! keeps one: `y = P_A(x)`, `z = y + q`, `x = P_C(z)`, `q = z − x`. The
//! iterates `x` stay PSD and converge to the projection of the start point
//! onto `A ∩ C` when that is nonempty.

use std::collections::VecDeque;

use super::constraints::ConstraintSet;
use super::pure::descend_factor;
use super::{CompatReport, DualCertificate, SolverOptions, Verdict};
use crate::tensor::eigen::{eigh_unchecked, Spectrum};
use crate::tensor::{CMatrix, CVector, DensityMatrix, HermitianMatrix};

/// Iterations between low-rank polishing attempts.
const POLISH_EVERY: usize = 100;
/// Polishing starts once the residual is below this.
const POLISH_START: f64 = 5e-2;
/// Relative eigenvalue cutoffs defining the candidate factor ranks.
const POLISH_CUTOFFS: [f64; 4] = [0.3, 0.1, 1e-2, 1e-3];
const POLISH_ITERS: usize = 3000;
/// Ranks always tried besides the cutoff ranks.
const POLISH_SMALL_RANKS: usize = 6;

pub(crate) struct Outcome {
    /// Last PSD iterate, unnormalized.
    pub x: CMatrix,
    pub coeffs: Vec<f64>,
    /// Residual of `x / Tr x`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stalled: bool,
}

#[cfg(test)]
pub(crate) fn psd_part(z: &CMatrix) -> CMatrix {
    eigh_unchecked(z).map(|l| l.max(0.0))
}

/// Descent on `X = V V†` from the dominant eigenpairs of a PSD iterate.
/// The limit points Dykstra crawls towards slowly are often low rank, where
/// the factored problem converges fast. Candidate ranks are the small ranks
/// plus those from a few relative eigenvalue cutoffs, smallest first.
fn polish(cs: &ConstraintSet, spec: &Spectrum, tol: f64) -> Option<(CMatrix, Vec<f64>, f64)> {
    let lmax = spec.eigenvalues[0];
    if lmax <= 0.0 {
        return None;
    }
    let mut ranks: Vec<usize> = (1..=POLISH_SMALL_RANKS)
        .chain(
            POLISH_CUTOFFS
                .iter()
                .map(|t| spec.eigenvalues.iter().take_while(|&&l| l > t * lmax).count()),
        )
        .filter(|&r| r < cs.dim())
        .collect();
    ranks.sort_unstable();
    ranks.dedup();
    for r in ranks {
        let cols: Vec<CVector> = (0..r)
            .map(|j| spec.eigenvectors.column(j).scale(spec.eigenvalues[j].sqrt()))
            .collect();
        let (cols, _) = descend_factor(cs.objective(), cols, tol * tol * 0.25, POLISH_ITERS);
        let mut x = CMatrix::zeros(cs.dim(), cs.dim());
        for v in &cols {
            x += v * v.adjoint();
        }
        let coeffs = cs.coeffs(&x);
        let residual = cs.normalized_residual(&coeffs);
        if residual < tol {
            return Some((x, coeffs, residual));
        }
    }
    None
}

/// Runs until the normalized residual drops below `tol`, progress stalls
/// above `opts.infeas_tol`, or `max_iter` is reached.
pub(crate) fn dykstra(
    cs: &ConstraintSet,
    x0: &CMatrix,
    tol: f64,
    max_iter: usize,
    opts: &SolverOptions,
    polish_enabled: bool,
) -> Outcome {
    let dim = cs.dim();
    let mut x = x0.clone();
    let mut q = CMatrix::zeros(dim, dim);
    let mut coeffs = cs.coeffs(&x);
    let mut residual = cs.normalized_residual(&coeffs);
    let mut history: VecDeque<f64> = VecDeque::with_capacity(opts.stall_window + 1);
    let mut iterations = 0;
    let mut stalled = false;
    while iterations < max_iter {
        iterations += 1;
        let y = cs.project(&x, &coeffs);
        let z = y + &q;
        let spec = eigh_unchecked(&z);
        x = spec.map(|l| l.max(0.0));
        q = z - &x;
        coeffs = cs.coeffs(&x);
        residual = cs.normalized_residual(&coeffs);
        if residual < tol {
            return Outcome {
                x,
                coeffs,
                residual,
                iterations,
                converged: true,
                stalled,
            };
        }
        if polish_enabled && iterations % POLISH_EVERY == 0 && residual < POLISH_START {
            if let Some((px, pc, pr)) = polish(cs, &spec, tol) {
                return Outcome {
                    x: px,
                    coeffs: pc,
                    residual: pr,
                    iterations,
                    converged: true,
                    stalled,
                };
            }
        }
        history.push_back(residual);
        if history.len() > opts.stall_window {
            let old = history.pop_front().expect("nonempty");
            if residual > opts.infeas_tol && (old - residual) <= opts.stall_rel * residual {
                stalled = true;
                break;
            }
        }
    }
    Outcome {
        x,
        coeffs,
        residual,
        iterations,
        converged: false,
        stalled,
    }
}

/// Separating functional from the gap between `x` and `P_A(x)`.
///
/// `Z = x − P_A(x)` only has constrained coefficients, so `Tr(Zρ)` is the
/// same number for every `ρ ∈ A`. After shifting `Z` by a multiple of the
/// identity to make it PSD, `Tr(Zρ) ≥ 0` on the cone; a negative value on
/// `A` therefore proves `A ∩ C = ∅`.
pub(crate) fn dual_certificate(cs: &ConstraintSet, coeffs: &[f64]) -> DualCertificate {
    let dim = cs.dim() as f64;
    let mut z: Vec<f64> = cs.correction(coeffs).into_iter().map(|v| -v).collect();
    let zm = cs.transform().inverse(&z);
    let spec = eigh_unchecked(&zm);
    let lmin = *spec.eigenvalues.last().expect("nonempty spectrum");
    let norm0 = zm.norm();
    // push the bottom of the spectrum slightly above zero
    let shift = (-lmin).max(0.0) + 1e-12 * norm0;
    z[0] += shift * dim;
    let functional = cs.transform().inverse(&z);
    let value: f64 = cs.targets().map(|(k, t)| z[k] * t).sum::<f64>() / dim;
    let norm = functional.norm();
    let gap = if norm > 0.0 { -value / norm } else { 0.0 };
    DualCertificate {
        functional: HermitianMatrix::new(functional).expect("inverse transform is Hermitian"),
        value,
        gap,
        valid: value < -1e-12 * norm.max(1e-300) && norm > 0.0,
    }
}

pub(crate) fn solve_mixed(cs: &ConstraintSet, opts: &SolverOptions) -> CompatReport {
    let dim = cs.dim();
    let x0 = CMatrix::identity(dim, dim).unscale(dim as f64);
    let out = dykstra(cs, &x0, opts.feas_tol, opts.max_iter, opts, true);
    if out.converged {
        let trace = out.coeffs[0];
        let witness = DensityMatrix::new_unchecked(cs.sig().clone(), out.x.unscale(trace));
        return CompatReport {
            verdict: Verdict::Feasible,
            residual: out.residual,
            iterations: out.iterations,
            witness: Some(witness),
            pure_witness: None,
            heuristic: false,
            certificate: None,
        };
    }
    let cert = dual_certificate(cs, &out.coeffs);
    let infeasible = out.residual > opts.infeas_tol && (out.stalled || cert.valid);
    CompatReport {
        verdict: if infeasible {
            Verdict::Infeasible
        } else {
            Verdict::Inconclusive
        },
        residual: out.residual,
        iterations: out.iterations,
        witness: None,
        pure_witness: None,
        heuristic: false,
        certificate: cert.valid.then_some(cert),
    }
}
