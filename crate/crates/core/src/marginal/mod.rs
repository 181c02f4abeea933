//! Marginal scenarios, extraction of reduced states and the two cheap
//! necessary conditions for a family of marginals to come from one state:
//! agreement on shared parties, and equal spectra on complementary subsets
//! when the global state is meant to be pure.

mod scenario;

pub use scenario::{all_m_scenario, half_plus_one_scenario, odd_scenario, MarginalScenario};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::eigen::eigh;
use crate::tensor::partial::{partial_trace, reduce_pure};
use crate::tensor::{DensityMatrix, PartySignature, PureState};

/// Default tolerance for both prechecks.
pub const PRECHECK_TOL: f64 = 1e-8;

/// One reduced state together with the system it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    system: PartySignature,
    subset: Vec<usize>,
    state: DensityMatrix,
}

impl Marginal {
    pub fn new(system: PartySignature, subset: Vec<usize>, state: DensityMatrix) -> Result<Self> {
        let expected = system.restrict(&subset)?;
        if &expected != state.sig() {
            return Err(Error::SignatureMismatch(format!(
                "subset {subset:?} of {:?} has dims {:?}, state has {:?}",
                system.dims(),
                expected.dims(),
                state.sig().dims()
            )));
        }
        Ok(Self { system, subset, state })
    }

    pub fn system(&self) -> &PartySignature {
        &self.system
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    /// Reduces this marginal further to `parties ⊆ subset` (global labels).
    pub fn reduce_to(&self, parties: &[usize]) -> Result<DensityMatrix> {
        let local: Vec<usize> = parties
            .iter()
            .map(|p| {
                self.subset.iter().position(|q| q == p).ok_or(Error::IndexOutOfRange {
                    index: *p,
                    parties: self.system.parties(),
                })
            })
            .collect::<Result<_>>()?;
        partial_trace(&self.state, &local)
    }
}

/// Anything marginals can be taken from.
pub trait Extract {
    fn sig(&self) -> &PartySignature;
    fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix>;
}

impl Extract for PureState {
    fn sig(&self) -> &PartySignature {
        PureState::sig(self)
    }

    fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        reduce_pure(self, keep)
    }
}

impl Extract for DensityMatrix {
    fn sig(&self) -> &PartySignature {
        DensityMatrix::sig(self)
    }

    fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }
}

/// One marginal per scenario subset.
pub fn extract<S: Extract>(state: &S, scenario: &MarginalScenario) -> Result<Vec<Marginal>> {
    if state.sig() != scenario.sig() {
        return Err(Error::SignatureMismatch(format!(
            "state dims {:?}, scenario dims {:?}",
            state.sig().dims(),
            scenario.sig().dims()
        )));
    }
    scenario
        .subsets()
        .iter()
        .map(|s| Marginal::new(scenario.sig().clone(), s.clone(), state.reduced(s)?))
        .collect()
}

/// Checks that all marginals describe the same system and returns it.
pub fn common_system(marginals: &[Marginal]) -> Result<&PartySignature> {
    let first = marginals
        .first()
        .ok_or_else(|| Error::InvalidArgument("no marginals given".into()))?;
    for m in &marginals[1..] {
        if m.system() != first.system() {
            return Err(Error::SignatureMismatch(format!(
                "marginals on systems {:?} and {:?}",
                first.system().dims(),
                m.system().dims()
            )));
        }
    }
    Ok(first.system())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Overlap,
    Schmidt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResidual {
    pub first: usize,
    pub second: usize,
    pub kind: CheckKind,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecheckReport {
    pub overlap_ok: bool,
    pub overlap_worst_residual: f64,
    /// True when no complementary pair fails; vacuous unless
    /// `schmidt_pairs > 0`.
    pub schmidt_ok: bool,
    pub schmidt_pairs: usize,
    pub tol: f64,
    /// Indices into the input marginal list.
    pub details: Vec<PairResidual>,
}

pub fn precheck(marginals: &[Marginal], pure_target: bool) -> Result<PrecheckReport> {
    precheck_with_tol(marginals, pure_target, PRECHECK_TOL)
}

pub fn precheck_with_tol(marginals: &[Marginal], pure_target: bool, tol: f64) -> Result<PrecheckReport> {
    let system = common_system(marginals)?;
    let n = system.parties();
    let mut details = Vec::new();
    let mut worst: f64 = 0.0;
    let mut schmidt_ok = true;
    let mut schmidt_pairs = 0;
    for i in 0..marginals.len() {
        for j in i + 1..marginals.len() {
            let (a, b) = (&marginals[i], &marginals[j]);
            let shared: Vec<usize> = a.subset().iter().copied().filter(|p| b.subset().contains(p)).collect();
            if !shared.is_empty() {
                let ra = a.reduce_to(&shared)?;
                let rb = b.reduce_to(&shared)?;
                let residual = (ra.matrix() - rb.matrix()).norm();
                worst = worst.max(residual);
                details.push(PairResidual {
                    first: i,
                    second: j,
                    kind: CheckKind::Overlap,
                    residual,
                });
            }
            let complementary = shared.is_empty() && a.subset().len() + b.subset().len() == n;
            if pure_target && complementary {
                let residual = spectrum_gap(a.state(), b.state());
                schmidt_pairs += 1;
                schmidt_ok &= residual <= tol;
                details.push(PairResidual {
                    first: i,
                    second: j,
                    kind: CheckKind::Schmidt,
                    residual,
                });
            }
        }
    }
    Ok(PrecheckReport {
        overlap_ok: worst <= tol,
        overlap_worst_residual: worst,
        schmidt_ok,
        schmidt_pairs,
        tol,
        details,
    })
}

/// Largest difference between the descending spectra, the shorter padded
/// with zeros.
fn spectrum_gap(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let ea = eigh(&a.to_hermitian()).eigenvalues;
    let eb = eigh(&b.to_hermitian()).eigenvalues;
    (0..ea.len().max(eb.len()))
        .map(|k| (ea.get(k).copied().unwrap_or(0.0) - eb.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}
