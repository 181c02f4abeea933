//! Pure-state compatibility by multi-start Riemannian gradient descent on
//! `f(ψ) = Σ_a ‖Tr_Ā |ψ⟩⟨ψ| − σ_a‖²_F` over the unit sphere.

use rayon::prelude::*;

use super::{CompatReport, SolverOptions, Verdict};
use crate::marginal::Marginal;
use crate::rng::{derive_seed, rng_from_seed};
use crate::tensor::partial::Split;
use crate::tensor::random::haar_random_pure_with;
use crate::tensor::{CMatrix, CVector, PartySignature, PureState};

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

pub(crate) struct Objective {
    dim: usize,
    terms: Vec<(Split, CMatrix)>,
}

impl Objective {
    pub fn new(sig: &PartySignature, marginals: &[Marginal]) -> Self {
        Self {
            dim: sig.total_dim(),
            terms: marginals
                .iter()
                .map(|m| (Split::new(sig, m.subset()), m.state().matrix().clone()))
                .collect(),
        }
    }

    pub fn value(&self, psi: &CVector) -> f64 {
        self.terms
            .iter()
            .map(|(split, target)| {
                let a = split.reshape(psi);
                (&a * a.adjoint() - target).norm_squared()
            })
            .sum()
    }

    /// Value and Euclidean gradient `4 Σ_a (Δ_a ⊗ I) ψ`.
    pub fn value_grad(&self, psi: &CVector) -> (f64, CVector) {
        let mut f = 0.0;
        let mut g = CVector::zeros(self.dim);
        for (split, target) in &self.terms {
            let a = split.reshape(psi);
            let delta = &a * a.adjoint() - target;
            f += delta.norm_squared();
            g += split.flatten(&(delta * a), self.dim).scale(4.0);
        }
        (f, g)
    }
}

impl Objective {
    /// Value of `X = Σ_j |v_j⟩⟨v_j|`.
    pub fn value_factor(&self, cols: &[CVector]) -> f64 {
        self.terms
            .iter()
            .map(|(split, target)| {
                let mut rho = -target.clone();
                for v in cols {
                    let a = split.reshape(v);
                    rho += &a * a.adjoint();
                }
                rho.norm_squared()
            })
            .sum()
    }

    pub fn value_grad_factor(&self, cols: &[CVector]) -> (f64, Vec<CVector>) {
        let mut f = 0.0;
        let mut g = vec![CVector::zeros(self.dim); cols.len()];
        for (split, target) in &self.terms {
            let blocks: Vec<CMatrix> = cols.iter().map(|v| split.reshape(v)).collect();
            let mut delta = -target.clone();
            for a in &blocks {
                delta += a * a.adjoint();
            }
            f += delta.norm_squared();
            for (gj, a) in g.iter_mut().zip(&blocks) {
                *gj += split.flatten(&(&delta * a), self.dim).scale(4.0);
            }
        }
        (f, g)
    }
}

/// Polak-Ribière conjugate gradient with Armijo backtracking on the factor
/// `V` of `X = V V†`.
pub(crate) fn descend_factor(
    obj: &Objective,
    mut cols: Vec<CVector>,
    target: f64,
    max_iter: usize,
) -> (Vec<CVector>, f64) {
    fn dot(a: &[CVector], b: &[CVector]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x.dotc(y).re).sum()
    }
    let mut step = 0.25;
    let (mut f, mut g) = obj.value_grad_factor(&cols);
    let mut dir: Vec<CVector> = g.iter().map(|v| -v).collect();
    for _ in 0..max_iter {
        if f < target {
            break;
        }
        let gn2 = dot(&g, &g);
        if gn2 < 1e-32 {
            break;
        }
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            dir = g.iter().map(|v| -v).collect();
            slope = -gn2;
        }
        let mut accepted = false;
        while step > MIN_STEP {
            let cand: Vec<CVector> = cols.iter().zip(&dir).map(|(v, d)| v + d.scale(step)).collect();
            let fc = obj.value_factor(&cand);
            if fc <= f + ARMIJO * step * slope {
                cols = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step *= 1.5;
        let (fn_, gn) = obj.value_grad_factor(&cols);
        let ydot: f64 = dot(&gn, &gn) - dot(&gn, &g);
        let beta = (ydot / gn2).max(0.0);
        dir = gn.iter().zip(&dir).map(|(gv, d)| -gv + d.scale(beta)).collect();
        f = fn_;
        g = gn;
    }
    (cols, f)
}

pub(crate) struct Descent {
    pub psi: CVector,
    pub value: f64,
    pub iterations: usize,
}

pub(crate) fn descend(obj: &Objective, mut psi: CVector, target: f64, max_iter: usize) -> Descent {
    let mut step = 0.25;
    let (mut f, mut g) = obj.value_grad(&psi);
    let mut iterations = 0;
    while iterations < max_iter && f >= target {
        iterations += 1;
        // tangent part: remove the radial component
        let radial = psi.dotc(&g);
        let rg = &g - &psi * radial;
        let gn2 = rg.norm_squared();
        if gn2 < 1e-32 {
            break;
        }
        let mut accepted = false;
        while step > MIN_STEP {
            let cand = (&psi - &rg * num_complex::Complex64::new(step, 0.0)).normalize();
            let fc = obj.value(&cand);
            if fc <= f - ARMIJO * step * gn2 {
                psi = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step *= 1.5;
        let vg = obj.value_grad(&psi);
        f = vg.0;
        g = vg.1;
    }
    Descent {
        psi,
        value: f,
        iterations,
    }
}

pub(crate) fn solve_pure(sig: &PartySignature, marginals: &[Marginal], opts: &SolverOptions) -> CompatReport {
    let obj = Objective::new(sig, marginals);
    let target = opts.feas_tol * opts.feas_tol;
    let run = |r: usize| {
        let mut rng = rng_from_seed(derive_seed(opts.seed, r as u64));
        let start = haar_random_pure_with(sig, &mut rng);
        descend(&obj, start.amps().clone(), target, opts.max_iter)
    };
    let restarts = opts.restarts.max(1);
    let runs: Vec<Descent> = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| (0..restarts).into_par_iter().map(run).collect())
    } else {
        (0..restarts).map(run).collect()
    };
    let worst_ok = runs.iter().all(|d| d.value > opts.infeas_tol * opts.infeas_tol);
    // min_by keeps the first of equal elements
    let best = runs
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one restart");
    let psi = PureState::new_unchecked(sig.clone(), best.psi.clone());
    let residual = best.value.max(0.0).sqrt();
    let iterations = runs.iter().map(|d| d.iterations).sum();
    let verdict = if best.value < target {
        Verdict::Feasible
    } else if worst_ok {
        Verdict::Infeasible
    } else {
        Verdict::Inconclusive
    };
    CompatReport {
        verdict,
        residual,
        iterations,
        witness: (verdict == Verdict::Feasible).then(|| psi.to_density()),
        heuristic: verdict == Verdict::Infeasible,
        pure_witness: Some(psi),
        certificate: None,
    }
}
