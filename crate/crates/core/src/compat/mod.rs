//! Compatibility of marginals with a global state.
//!
//! [`check_mixed`] decides whether any density matrix has the given
//! marginals by Dykstra projections between the affine constraint set and
//! the PSD cone. [`check_pure`] searches pure states by gradient descent and
//! can only report infeasibility heuristically. [`export_polysystem`] writes
//! the equivalent purity polynomial system for external real-root tools.

mod constraints;
mod dykstra;
pub mod map;
pub mod poly;
mod pure;

pub use constraints::{constrained_count, kernel_dim};
pub use map::{build_marginal_map, hvec, unhvec, MarginalMap};
pub use poly::{
    export_polysystem, parse_polysystem, read_polysystem, write_polysystem, Monomial, Poly, PolySystem, Scalar,
};

pub(crate) use constraints::ConstraintSet;
pub(crate) use dykstra::dykstra;
#[cfg(test)]
pub(crate) use dykstra::psd_part;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::{common_system, Marginal};
use crate::tensor::{DensityMatrix, HermitianMatrix, PureState};

/// Largest total dimension the iterative solvers accept.
pub const SOLVER_MAX_DIM: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub infeas_tol: f64,
    pub max_iter: usize,
    pub stall_window: usize,
    /// Relative residual decrease over one stall window below which
    /// progress counts as stalled.
    pub stall_rel: f64,
    pub restarts: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            infeas_tol: 1e-3,
            max_iter: 20_000,
            stall_window: 500,
            stall_rel: 1e-10,
            restarts: 16,
            seed: 0,
            jobs: 1,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("feas_tol", self.feas_tol),
            ("infeas_tol", self.infeas_tol),
            ("stall_rel", self.stall_rel),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter == 0 || self.stall_window == 0 {
            return Err(Error::InvalidArgument("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible,
    Inconclusive,
}

/// A PSD operator `Z` built from marginal observables with
/// `Tr(Zρ) = value < 0` for every `ρ` matching the targets, which no
/// density matrix can satisfy.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub functional: HermitianMatrix,
    pub value: f64,
    /// `−value / ‖Z‖_F`.
    pub gap: f64,
    pub valid: bool,
}

#[derive(Debug, Clone)]
pub struct CompatReport {
    pub verdict: Verdict,
    /// Frobenius distance from the final iterate's marginals to the targets.
    pub residual: f64,
    pub iterations: usize,
    pub witness: Option<DensityMatrix>,
    /// Best pure candidate (pure mode only).
    pub pure_witness: Option<PureState>,
    /// Set when `Infeasible` rests on failed local searches only.
    pub heuristic: bool,
    pub certificate: Option<DualCertificate>,
}

fn validate_inputs(marginals: &[Marginal], opts: &SolverOptions) -> Result<()> {
    opts.validate()?;
    let sig = common_system(marginals)?;
    if sig.total_dim() > SOLVER_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: sig.total_dim(),
            cap: SOLVER_MAX_DIM,
        });
    }
    Ok(())
}

/// Is there any density matrix with these marginals?
pub fn check_mixed(marginals: &[Marginal], opts: &SolverOptions) -> Result<CompatReport> {
    validate_inputs(marginals, opts)?;
    let cs = ConstraintSet::new(marginals)?;
    Ok(dykstra::solve_mixed(&cs, opts))
}

/// Is there a pure state with these marginals?
pub fn check_pure(marginals: &[Marginal], opts: &SolverOptions) -> Result<CompatReport> {
    validate_inputs(marginals, opts)?;
    let sig = common_system(marginals)?.clone();
    Ok(pure::solve_pure(&sig, marginals, opts))
}

#[cfg(test)]
mod tests;
