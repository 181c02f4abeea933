//! Is a pure state the only state with its scenario marginals?
//!
//! If `ρ` matches the marginals of `P = |ψ⟩⟨ψ|` and `Tr(ρP) = 1`, then
//! `ρ = P`. So `ψ` is uniquely determined among all states exactly when the
//! leakage `max Tr(ρ(I − P))` over the feasible set is zero. The maximum is
//! approached by projected ascent: step along `I − P`, project back onto
//! the feasible set with the compat Dykstra solver, repeat.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::compat::{dykstra, kernel_dim, ConstraintSet, SolverOptions, SOLVER_MAX_DIM};
use crate::error::{Error, Result};
use crate::marginal::{extract, Marginal, MarginalScenario};
use crate::rng::derive_seed;
use crate::tensor::{partial_trace, random_density, trace_distance, CMatrix, DensityMatrix, PureState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UdaOptions {
    pub solver: SolverOptions,
    pub uda_tol: f64,
    /// Independent ascent runs; the first starts along `I − P`, the others
    /// along random directions orthogonal to `ψ`.
    pub starts: usize,
    pub ascent_steps: usize,
    /// Trace mass moved off `P` per ascent step.
    pub step: f64,
}

impl Default for UdaOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            uda_tol: 1e-6,
            starts: 4,
            ascent_steps: 40,
            step: 0.5,
        }
    }
}

impl UdaOptions {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if !(self.uda_tol > 0.0 && self.uda_tol.is_finite()) || !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument("uda_tol and step must be positive".into()));
        }
        if self.starts == 0 || self.ascent_steps == 0 {
            return Err(Error::InvalidArgument(
                "starts and ascent_steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UdaVerdict {
    Unique,
    NotUnique,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct UdaReport {
    pub verdict: UdaVerdict,
    /// Largest `Tr(ρ(I − P))` reached by a converged projection.
    pub leakage: f64,
    /// Traceless Hermitian directions the marginals cannot see.
    pub kernel_dim: u128,
    /// Validated second state with the same marginals.
    pub alternative: Option<DensityMatrix>,
    pub alternative_residual: Option<f64>,
    pub alternative_distance: Option<f64>,
    /// Every projection reached `feas_tol` / 10.
    pub converged: bool,
    pub iterations: usize,
}

struct Run {
    leakage: f64,
    rho: Option<CMatrix>,
    converged: bool,
    iterations: usize,
}

fn leakage_of(psi: &PureState, rho: &CMatrix) -> f64 {
    let v = rho * psi.amps();
    let f: Complex64 = psi.amps().dotc(&v);
    1.0 - f.re
}

fn ascend(cs: &ConstraintSet, psi: &PureState, start_dir: &CMatrix, opts: &UdaOptions) -> Run {
    let dim = cs.dim();
    let p = psi.projector();
    let up = (CMatrix::identity(dim, dim) - &p).unscale((dim - 1) as f64);
    let tol = opts.solver.feas_tol * 0.1;
    let mut x = &p * Complex64::new(1.0 - opts.step, 0.0) + start_dir * Complex64::new(opts.step, 0.0);
    let mut best = Run {
        leakage: 0.0,
        rho: None,
        converged: true,
        iterations: 0,
    };
    let mut last = f64::NEG_INFINITY;
    for _ in 0..opts.ascent_steps {
        let out = dykstra(cs, &x, tol, opts.solver.max_iter, &opts.solver, true);
        best.iterations += out.iterations;
        if !out.converged {
            best.converged = false;
            break;
        }
        let rho = out.x.unscale(out.coeffs[0]);
        let leak = leakage_of(psi, &rho);
        if leak > best.leakage {
            best.leakage = leak;
            best.rho = Some(rho.clone());
        }
        if leak - last <= 1e-3 * opts.uda_tol {
            break;
        }
        last = leak;
        x = &rho * Complex64::new(1.0 - opts.step, 0.0) + &up * Complex64::new(opts.step, 0.0);
    }
    best
}

/// Largest deviation `max_a ‖Tr_Ā ρ − σ_a‖_F` from the target marginals.
pub fn marginal_residual(rho: &DensityMatrix, marginals: &[Marginal]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for m in marginals {
        let r = partial_trace(rho, m.subset())?;
        worst = worst.max((r.matrix() - m.state().matrix()).norm());
    }
    Ok(worst)
}

pub fn uda_test(psi: &PureState, scenario: &MarginalScenario, opts: &UdaOptions) -> Result<UdaReport> {
    opts.validate()?;
    if psi.sig() != scenario.sig() {
        return Err(Error::SignatureMismatch(format!(
            "state {:?} vs scenario {:?}",
            psi.sig().dims(),
            scenario.sig().dims()
        )));
    }
    let dim = psi.dim();
    if dim > SOLVER_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            cap: SOLVER_MAX_DIM,
        });
    }
    let kdim = kernel_dim(scenario);
    let mut report = UdaReport {
        verdict: UdaVerdict::Unique,
        leakage: 0.0,
        kernel_dim: kdim,
        alternative: None,
        alternative_residual: None,
        alternative_distance: None,
        converged: true,
        iterations: 0,
    };
    if kdim == 0 {
        return Ok(report);
    }
    let marginals = extract(psi, scenario)?;
    let cs = ConstraintSet::new(&marginals)?;
    let p = psi.projector();
    let q = CMatrix::identity(dim, dim) - &p;
    let direction = |s: usize| -> CMatrix {
        if s == 0 {
            return q.unscale((dim - 1) as f64);
        }
        let g = random_density(psi.sig(), dim, derive_seed(opts.solver.seed, s as u64));
        let w = &q * g.matrix() * &q;
        let tr = w.trace().re;
        w.unscale(tr)
    };
    let run = |s: usize| ascend(&cs, psi, &direction(s), opts);
    let runs: Vec<Run> = if opts.solver.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.solver.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| (0..opts.starts).into_par_iter().map(run).collect())
    } else {
        (0..opts.starts).map(run).collect()
    };
    report.converged = runs.iter().all(|r| r.converged);
    report.iterations = runs.iter().map(|r| r.iterations).sum();
    let best = runs
        .iter()
        .filter(|r| r.rho.is_some())
        .max_by(|a, b| a.leakage.total_cmp(&b.leakage));
    report.leakage = best.map_or(0.0, |r| r.leakage.max(0.0));
    report.verdict = if report.leakage > 10.0 * opts.uda_tol {
        let rho = best.and_then(|r| r.rho.clone()).expect("leakage comes with a state");
        let rho = DensityMatrix::new_unchecked(psi.sig().clone(), rho);
        let residual = marginal_residual(&rho, &marginals)?;
        let distance = trace_distance(&rho, &psi.to_density())?;
        report.alternative_residual = Some(residual);
        report.alternative_distance = Some(distance);
        if residual < opts.solver.feas_tol && distance > 10.0 * opts.solver.feas_tol {
            report.alternative = Some(rho);
            UdaVerdict::NotUnique
        } else {
            UdaVerdict::Inconclusive
        }
    } else if report.leakage < opts.uda_tol && report.converged {
        UdaVerdict::Unique
    } else {
        UdaVerdict::Inconclusive
    };
    Ok(report)
}

/// The validated alternative of a `NotUnique` verdict.
pub fn find_alternative(psi: &PureState, scenario: &MarginalScenario, opts: &UdaOptions) -> Result<DensityMatrix> {
    let report = uda_test(psi, scenario, opts)?;
    match (report.verdict, report.alternative) {
        (UdaVerdict::NotUnique, Some(rho)) => {
            let marginals = extract(psi, scenario)?;
            if marginal_residual(&rho, &marginals)? >= opts.solver.feas_tol {
                return Err(Error::NotFound("alternative failed revalidation".into()));
            }
            Ok(rho)
        }
        (v, _) => Err(Error::NotFound(format!(
            "verdict {v:?}, leakage {:.3e}",
            report.leakage
        ))),
    }
}
