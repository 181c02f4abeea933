//! JSON formats, all versioned with `"format": 1`.
//!
//! ```text
//! pure state      {"format":1, "dims":[2,2], "amps":[[re,im], ...]}
//! density matrix  {"format":1, "dims":[2,2], "mat":[[[re,im], ...], ...]}   row-major
//! marginal        {"format":1, "system_dims":[2,2,2], "subset":[0,2], "mat":[...]}
//! scenario        {"format":1, "dims":[2,2,2,2], "subsets":[[0,2,3], ...]}
//! Bloch tensor    {"format":1, "dims":[2,2,2], "coeff":{"1,0,3": 0.5, ...}}
//! ```
//!
//! Party indices are 0-based. A missing `format` is read as 1. States are
//! checked for norm, trace, Hermiticity and positivity within
//! [`PARSE_TOL`] and renormalized, unless validation is switched off.
//! Bloch entries left out are zero.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bloch::BlochTensor;
use crate::compat::{CompatReport, DualCertificate};
use crate::error::{Error, Result};
use crate::marginal::{Marginal, MarginalScenario, PrecheckReport};
use crate::tensor::{CMatrix, CVector, DensityMatrix, HermitianMatrix, PartySignature, PureState};
use crate::uniqueness::UdaReport;

pub const FORMAT_VERSION: u32 = 1;
/// Norm, trace and positivity slack accepted when reading states.
pub const PARSE_TOL: f64 = 1e-8;

fn check_format(format: Option<u32>) -> Result<()> {
    match format {
        None | Some(FORMAT_VERSION) => Ok(()),
        Some(v) => Err(Error::Parse(format!("unsupported format version {v}"))),
    }
}

fn complex_pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex_pair(&m[(i, j)])).collect())
        .collect();
    json!(rows)
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("matrix rows must form a square".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

#[derive(Serialize, Deserialize)]
struct PureJson {
    format: Option<u32>,
    dims: Vec<usize>,
    amps: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct DensityJson {
    format: Option<u32>,
    dims: Vec<usize>,
    mat: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct MarginalJson {
    format: Option<u32>,
    system_dims: Vec<usize>,
    subset: Vec<usize>,
    mat: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioJson {
    format: Option<u32>,
    dims: Vec<usize>,
    subsets: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct BlochJson {
    format: Option<u32>,
    dims: Vec<usize>,
    #[serde(default)]
    coeff: BTreeMap<String, f64>,
}

pub fn pure_state_to_json(psi: &PureState) -> Value {
    json!({
        "format": FORMAT_VERSION,
        "dims": psi.sig().dims(),
        "amps": psi.amps().iter().map(complex_pair).collect::<Vec<_>>(),
    })
}

pub fn pure_state_from_json(text: &str, validate: bool) -> Result<PureState> {
    let raw: PureJson = serde_json::from_str(text)?;
    check_format(raw.format)?;
    let sig = PartySignature::new(raw.dims)?;
    let amps = CVector::from_iterator(raw.amps.len(), raw.amps.iter().map(|a| Complex64::new(a[0], a[1])));
    if validate {
        PureState::with_tolerance(sig, amps, PARSE_TOL)
    } else if amps.len() != sig.total_dim() {
        Err(Error::DimensionMismatch {
            expected: sig.total_dim(),
            got: amps.len(),
        })
    } else {
        Ok(PureState::new_unchecked(sig, amps))
    }
}

fn density(sig: PartySignature, mat: CMatrix, validate: bool) -> Result<DensityMatrix> {
    if validate {
        DensityMatrix::with_tolerance(sig, mat, PARSE_TOL)
    } else if mat.nrows() != sig.total_dim() {
        Err(Error::DimensionMismatch {
            expected: sig.total_dim(),
            got: mat.nrows(),
        })
    } else {
        // Hermiticity is still required downstream
        HermitianMatrix::new(mat.clone())?;
        Ok(DensityMatrix::new_unchecked(sig, mat))
    }
}

pub fn density_to_json(rho: &DensityMatrix) -> Value {
    json!({
        "format": FORMAT_VERSION,
        "dims": rho.sig().dims(),
        "mat": matrix_to_json(rho.matrix()),
    })
}

pub fn density_from_json(text: &str, validate: bool) -> Result<DensityMatrix> {
    let raw: DensityJson = serde_json::from_str(text)?;
    check_format(raw.format)?;
    let sig = PartySignature::new(raw.dims)?;
    density(sig, matrix_from_rows(&raw.mat)?, validate)
}

pub fn marginal_to_json(m: &Marginal) -> Value {
    json!({
        "format": FORMAT_VERSION,
        "system_dims": m.system().dims(),
        "subset": m.subset(),
        "mat": matrix_to_json(m.state().matrix()),
    })
}

pub fn marginal_from_json(text: &str, validate: bool) -> Result<Marginal> {
    let raw: MarginalJson = serde_json::from_str(text)?;
    check_format(raw.format)?;
    let system = PartySignature::new(raw.system_dims)?;
    let local = system.restrict(&raw.subset)?;
    let state = density(local, matrix_from_rows(&raw.mat)?, validate)?;
    Marginal::new(system, raw.subset, state)
}

pub fn scenario_to_json(sc: &MarginalScenario) -> Value {
    json!({
        "format": FORMAT_VERSION,
        "dims": sc.sig().dims(),
        "subsets": sc.subsets(),
    })
}

pub fn scenario_from_json(text: &str) -> Result<MarginalScenario> {
    let raw: ScenarioJson = serde_json::from_str(text)?;
    check_format(raw.format)?;
    MarginalScenario::new(PartySignature::new(raw.dims)?, raw.subsets)
}

fn index_key(k: &[usize]) -> String {
    k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn bloch_to_json(b: &BlochTensor) -> Value {
    let coeff: BTreeMap<String, f64> = b.nonzero().into_iter().map(|(k, v)| (index_key(&k), v)).collect();
    json!({
        "format": FORMAT_VERSION,
        "dims": b.sig().dims(),
        "coeff": coeff,
    })
}

/// Signature and the entries listed in the file, identity included if
/// present. Labels are validated; values are not normalized.
pub fn bloch_entries_from_json(text: &str) -> Result<(PartySignature, BTreeMap<Vec<usize>, f64>)> {
    let raw: BlochJson = serde_json::from_str(text)?;
    check_format(raw.format)?;
    let sig = PartySignature::new(raw.dims)?;
    let mut out = BTreeMap::new();
    for (key, v) in raw.coeff {
        let k: std::result::Result<Vec<usize>, _> = key.split(',').map(|x| x.trim().parse::<usize>()).collect();
        let k = k.map_err(|_| Error::Parse(format!("bad coefficient key {key:?}")))?;
        if k.len() != sig.parties() || k.iter().zip(sig.dims()).any(|(&a, &d)| a >= d * d) {
            return Err(Error::Parse(format!("coefficient key {key:?} out of range")));
        }
        if out.insert(k, v).is_some() {
            return Err(Error::Parse(format!("duplicate coefficient key {key:?}")));
        }
    }
    Ok((sig, out))
}

pub fn bloch_from_json(text: &str) -> Result<BlochTensor> {
    let (sig, entries) = bloch_entries_from_json(text)?;
    let identity = vec![0; sig.parties()];
    if let Some(&c0) = entries.get(&identity) {
        if (c0 - 1.0).abs() > PARSE_TOL {
            return Err(Error::BadNormalization(c0));
        }
    }
    BlochTensor::from_entries(sig, entries.into_iter().filter(|(k, _)| *k != identity))
}

pub fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_text(v))?;
    Ok(())
}

fn certificate_json(c: &DualCertificate) -> Value {
    json!({
        "value": c.value,
        "gap": c.gap,
        "valid": c.valid,
        "functional": matrix_to_json(c.functional.matrix()),
    })
}

pub fn compat_report_to_json(r: &CompatReport, precheck: Option<&PrecheckReport>, mode: &str) -> Value {
    json!({
        "format": FORMAT_VERSION,
        "mode": mode,
        "verdict": r.verdict,
        "residual": r.residual,
        "iterations": r.iterations,
        "heuristic": r.heuristic,
        "precheck": precheck,
        "witness": r.witness.as_ref().map(|w| matrix_to_json(w.matrix())),
        "pure_witness": r.pure_witness.as_ref().map(|p| p.amps().iter().map(complex_pair).collect::<Vec<_>>()),
        "certificate": r.certificate.as_ref().map(certificate_json),
    })
}

pub fn uda_report_to_json(r: &UdaReport) -> Value {
    json!({
        "format": FORMAT_VERSION,
        "verdict": r.verdict,
        "leakage": r.leakage,
        "kernel_dim": r.kernel_dim as u64,
        "converged": r.converged,
        "iterations": r.iterations,
        "alternative_residual": r.alternative_residual,
        "alternative_distance": r.alternative_distance,
        "alternative": r.alternative.as_ref().map(|a| matrix_to_json(a.matrix())),
    })
}
