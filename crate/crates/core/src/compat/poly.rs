//! Purity polynomial systems `p1 = Tr ρ² − 1`, `p2 = Tr ρ³ − 1` over the
//! unknown Bloch coefficients, with known coefficients substituted, plus the
//! single sextic `p1² + p2²` whose real zeros are the same.
//!
//! With `ρ = (1/D) Σ_k c_k Σ_k`, `Tr ρ² = (1/D) Σ_k c_k²` and
//! `Tr ρ³ = (1/D³) Σ_{k,l,m} c_k c_l c_m Tr(Σ_k Σ_l Σ_m)`. For qubits the
//! triple traces are products of `Tr(σ_a σ_b σ_c) ∈ {0, ±2, ±2i}`, so every
//! coefficient is exact; known values enter as the rational reading of their
//! shortest decimal form. Other local dimensions fall back to floating point.
//!
//! # File format
//!
//! ```text
//! file     := header line*
//! header   := "format 1" NL "dims" int ("," int)* NL
//! line     := vars | sub | poly
//! vars     := "vars" (" " name)* NL
//! sub      := "sub " name " = " number NL
//! poly     := label ": " polynom " = 0" NL          label ∈ {p1, p2, sextic}
//! polynom  := ["-"] term ((" + " | " - ") term)* | "0"
//! term     := number ["*" monomial] | monomial
//! monomial := factor ("*" factor)*
//! factor   := name ["^" int]
//! number   := int ["/" int] | float            (float: 17 significant digits)
//! name     := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Lines starting with `#` are comments. Terms are in graded lexicographic
//! order (higher total degree first, then by exponent of the earliest
//! variable in `vars` order), the constant last.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bloch::OperatorBasis;
use crate::error::{Error, Result};
use crate::tensor::PartySignature;

/// Largest number of Bloch coefficients the exporter expands.
pub const POLY_MAX_COEFFS: usize = 1 << 12;

#[derive(Debug, Clone)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (Scalar::Float(a), Scalar::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    pub fn int(v: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// The rational with the same shortest decimal representation as `v`.
    pub fn from_f64_decimal(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite coefficient {v}")));
        }
        parse_decimal(&format!("{v}")).map(Scalar::Exact)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(f) => *f,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(f) => *f == 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_negative(),
            Scalar::Float(f) => *f < 0.0,
        }
    }

    fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_one(),
            Scalar::Float(f) => *f == 1.0,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => Scalar::Float(self.to_f64() + o.to_f64()),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => Scalar::Float(self.to_f64() * o.to_f64()),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }

    fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Float(v) => write!(f, "{v:.16e}"),
        }
    }
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad decimal {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

fn parse_number(s: &str) -> Result<Scalar> {
    let bad = || Error::Parse(format!("bad number {s:?}"));
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        return s.parse::<f64>().map(Scalar::Float).map_err(|_| bad());
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Scalar::Exact(BigRational::new(n, d)))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Scalar::Exact(BigRational::from_integer(n)))
        }
    }
}

/// Sparse exponent vector: `(variable index, exponent)`, increasing index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(usize, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        Monomial(vec![(i, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(usize, u32)] {
        &self.0
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < o.0.len() {
            match (self.0.get(i), o.0.get(j)) {
                (Some(&(a, ea)), Some(&(b, eb))) if a == b => {
                    out.push((a, ea + eb));
                    i += 1;
                    j += 1;
                }
                (Some(&(a, ea)), Some(&(b, _))) if a < b => {
                    out.push((a, ea));
                    i += 1;
                }
                (Some(&(a, ea)), None) => {
                    out.push((a, ea));
                    i += 1;
                }
                (_, Some(&(b, eb))) => {
                    out.push((b, eb));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Monomial(out)
    }

    fn exponent(&self, var: usize) -> u32 {
        self.0.iter().find(|&&(v, _)| v == var).map(|&(_, e)| e).unwrap_or(0)
    }
}

/// Graded lexicographic, highest first.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| {
            let mut vars: Vec<usize> = self.0.iter().chain(&other.0).map(|&(v, _)| v).collect();
            vars.sort_unstable();
            vars.dedup();
            for v in vars {
                let (a, b) = (self.exponent(v), other.exponent(v));
                if a != b {
                    return b.cmp(&a);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial with terms in canonical order; zero coefficients are dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Scalar) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.get(&m) {
            Some(old) => old.add(&c),
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_exact(&self) -> bool {
        self.terms.values().all(Scalar::is_exact)
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.to_f64() * m.factors().iter().map(|&(v, e)| x[v].powi(e as i32)).product::<f64>())
            .sum()
    }

    fn render(&self, vars: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let mag = c.abs();
            let mono: Vec<String> = m
                .factors()
                .iter()
                .map(|&(v, e)| {
                    if e == 1 {
                        vars[v].clone()
                    } else {
                        format!("{}^{e}", vars[v])
                    }
                })
                .collect();
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() && mag.is_exact() {
                out.push_str(&mono.join("*"));
            } else {
                out.push_str(&format!("{mag}*{}", mono.join("*")));
            }
        }
        out
    }

    fn parse(s: &str, vars: &[String]) -> Result<Self> {
        let s = s.trim();
        let mut p = Poly::zero();
        if s == "0" {
            return Ok(p);
        }
        let mut rest = s;
        let mut neg = false;
        if let Some(r) = rest.strip_prefix('-') {
            neg = true;
            rest = r;
        }
        loop {
            let next = [rest.find(" + "), rest.find(" - ")].into_iter().flatten().min();
            let (term, tail) = match next {
                Some(pos) => (&rest[..pos], Some(&rest[pos..])),
                None => (rest, None),
            };
            let (c, m) = parse_term(term, vars)?;
            p.add_term(m, if neg { c.neg() } else { c });
            match tail {
                Some(t) => {
                    neg = t.starts_with(" - ");
                    rest = &t[3..];
                }
                None => break,
            }
        }
        Ok(p)
    }
}

fn parse_term(term: &str, vars: &[String]) -> Result<(Scalar, Monomial)> {
    let mut coeff = Scalar::one();
    let mut mono = Monomial::one();
    for (i, part) in term.split('*').enumerate() {
        let starts_name = part
            .chars()
            .next()
            .map(|ch| ch.is_ascii_alphabetic() || ch == '_')
            .unwrap_or(false);
        if !starts_name {
            if i != 0 {
                return Err(Error::Parse(format!("number inside monomial in {term:?}")));
            }
            coeff = parse_number(part)?;
            continue;
        }
        let (name, e) = match part.split_once('^') {
            Some((n, e)) => (
                n,
                e.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad exponent in {part:?}")))?,
            ),
            None => (part, 1),
        };
        let v = vars
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| Error::Parse(format!("undeclared variable {name:?}")))?;
        mono = mono.mul(&Monomial(vec![(v, e)]));
    }
    Ok((coeff, mono))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    pub dims: Vec<usize>,
    pub variables: Vec<String>,
    /// Known coefficients by name, identity excluded.
    pub substitutions: BTreeMap<String, Scalar>,
    pub p1: Poly,
    pub p2: Poly,
    pub sextic: Poly,
}

impl PolySystem {
    /// Values of `(p1, p2)` at an assignment of the unknowns.
    pub fn eval(&self, x: &[f64]) -> (f64, f64) {
        (self.p1.eval(x), self.p2.eval(x))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# purity polynomial system: p1 = Tr(rho^2) - 1, p2 = Tr(rho^3) - 1\n");
        out.push_str("format 1\n");
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        out.push_str(&format!("dims {}\n", dims.join(",")));
        out.push_str("vars");
        for v in &self.variables {
            out.push(' ');
            out.push_str(v);
        }
        out.push('\n');
        for (name, value) in &self.substitutions {
            out.push_str(&format!("sub {name} = {value}\n"));
        }
        for (label, p) in [("p1", &self.p1), ("p2", &self.p2), ("sextic", &self.sextic)] {
            out.push_str(&format!("{label}: {} = 0\n", p.render(&self.variables)));
        }
        out
    }
}

pub fn write_polysystem(ps: &PolySystem, path: &Path) -> Result<()> {
    std::fs::write(path, ps.to_text())?;
    Ok(())
}

pub fn read_polysystem(path: &Path) -> Result<PolySystem> {
    parse_polysystem(&std::fs::read_to_string(path)?)
}

pub fn parse_polysystem(text: &str) -> Result<PolySystem> {
    let mut format_seen = false;
    let mut dims = None;
    let mut variables: Option<Vec<String>> = None;
    let mut substitutions = BTreeMap::new();
    let mut polys: BTreeMap<&str, Poly> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Parse(format!("line {}: {msg}", lineno + 1));
        if let Some(v) = line.strip_prefix("format ") {
            if v.trim() != "1" {
                return Err(err("unsupported format version"));
            }
            format_seen = true;
        } else if let Some(v) = line.strip_prefix("dims ") {
            let d: std::result::Result<Vec<usize>, _> = v.split(',').map(|x| x.trim().parse()).collect();
            dims = Some(d.map_err(|_| err("bad dims"))?);
        } else if line == "vars" || line.starts_with("vars ") {
            let names: Vec<String> = line[4..].split_whitespace().map(String::from).collect();
            if let Some(bad) = names.iter().find(|n| !valid_name(n)) {
                return Err(err(&format!("bad variable name {bad:?}")));
            }
            variables = Some(names);
        } else if let Some(v) = line.strip_prefix("sub ") {
            let (name, value) = v.split_once(" = ").ok_or_else(|| err("expected `sub name = value`"))?;
            substitutions.insert(name.trim().to_string(), parse_number(value.trim())?);
        } else if let Some((label, body)) = line.split_once(": ") {
            let label = match label {
                "p1" => "p1",
                "p2" => "p2",
                "sextic" => "sextic",
                _ => return Err(err("unknown polynomial label")),
            };
            let vars = variables.as_ref().ok_or_else(|| err("polynomial before vars"))?;
            let body = body
                .strip_suffix(" = 0")
                .ok_or_else(|| err("expected trailing `= 0`"))?;
            polys.insert(label, Poly::parse(body, vars).map_err(|e| err(&e.to_string()))?);
        } else {
            return Err(err("unrecognized line"));
        }
    }
    if !format_seen {
        return Err(Error::Parse("missing `format 1` header".into()));
    }
    let take =
        |polys: &mut BTreeMap<&str, Poly>, k: &str| polys.remove(k).ok_or_else(|| Error::Parse(format!("missing {k}")));
    Ok(PolySystem {
        dims: dims.ok_or_else(|| Error::Parse("missing dims".into()))?,
        variables: variables.ok_or_else(|| Error::Parse("missing vars".into()))?,
        substitutions,
        p1: take(&mut polys, "p1")?,
        p2: take(&mut polys, "p2")?,
        sextic: take(&mut polys, "sextic")?,
    })
}

fn valid_name(n: &str) -> bool {
    let mut chars = n.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const ONE_BODY: [&str; 3] = ["alpha", "beta", "gamma"];

/// Name of the Bloch coefficient with multi-index `k`.
///
/// Up to three qubits the conventional letters are used with Pauli labels
/// 1, 2, 3 for x, y, z: `alpha_i, beta_i, gamma_i` for one party, `R_ij`
/// (parties 0,1), `S_ij` (0,2), `T_ij` (1,2) and `Q_ijk`. Otherwise
/// `c_k1_k2_…` with the raw basis labels.
pub fn coefficient_name(sig: &PartySignature, k: &[usize]) -> String {
    let n = sig.parties();
    if n <= 3 && sig.dims().iter().all(|&d| d == 2) {
        let supp: Vec<usize> = (0..n).filter(|&p| k[p] != 0).collect();
        let idx: String = supp.iter().map(|&p| k[p].to_string()).collect();
        let letter = match supp.as_slice() {
            [p] => ONE_BODY[*p].to_string(),
            [0, 1] => "R".into(),
            [0, 2] => "S".into(),
            [1, 2] => "T".into(),
            [0, 1, 2] => "Q".into(),
            _ => "I".into(),
        };
        return format!("{letter}_{idx}");
    }
    let parts: Vec<String> = k.iter().map(|x| x.to_string()).collect();
    format!("c_{}", parts.join("_"))
}

fn all_indices(sig: &PartySignature) -> Vec<Vec<usize>> {
    let sizes: Vec<usize> = sig.dims().iter().map(|d| d * d).collect();
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut f| {
            let mut k = vec![0; sizes.len()];
            for p in (0..sizes.len()).rev() {
                k[p] = f % sizes[p];
                f /= sizes[p];
            }
            k
        })
        .collect()
}

/// Expands names and letter groups (`Q`, `R`, `alpha`, `c`, …; a group
/// selects every coefficient whose name starts with `group_`) to
/// multi-indices, in coefficient order.
pub fn resolve_names(sig: &PartySignature, names: &[String]) -> Result<Vec<Vec<usize>>> {
    let all: Vec<(Vec<usize>, String)> = all_indices(sig)
        .into_iter()
        .skip(1)
        .map(|k| {
            let name = coefficient_name(sig, &k);
            (k, name)
        })
        .collect();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for want in names {
        let prefix = format!("{want}_");
        let hits: Vec<&Vec<usize>> = all
            .iter()
            .filter(|(_, n)| n == want || n.starts_with(&prefix) && !want.contains('_'))
            .map(|(k, _)| k)
            .collect();
        if hits.is_empty() {
            return Err(Error::InvalidArgument(format!("no coefficient named {want:?}")));
        }
        for k in hits {
            if !out.contains(k) {
                out.push(k.clone());
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Nonzero `Tr(g_a g_b g_c)` per local dimension.
fn local_triples(d: usize) -> Vec<(usize, usize, usize, Complex64)> {
    let ops = OperatorBasis::new(d);
    let n = ops.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let ab = &ops.ops()[a] * &ops.ops()[b];
            for c in 0..n {
                let t = (&ab * &ops.ops()[c]).trace();
                if t.norm() > 1e-12 {
                    // qubit traces are exactly 0, ±2, ±2i
                    let t = if d == 2 {
                        Complex64::new(t.re.round(), t.im.round())
                    } else {
                        t
                    };
                    out.push((a, b, c, t));
                }
            }
        }
    }
    out
}

enum Slot {
    Known(Scalar),
    Var(usize),
}

fn slot_poly(s: &Slot) -> Poly {
    match s {
        Slot::Known(c) => Poly::constant(c.clone()),
        Slot::Var(i) => {
            let mut p = Poly::zero();
            p.add_term(Monomial::var(i.to_owned()), Scalar::one());
            p
        }
    }
}

/// Builds `p1`, `p2` and the sextic with `known` substituted.
///
/// `known` maps multi-indices to values; the identity is fixed at 1 and
/// may only appear with that value. Every other coefficient must be known
/// or unknown, not both.
pub fn export_polysystem(
    sig: &PartySignature,
    known: &BTreeMap<Vec<usize>, f64>,
    unknowns: &[Vec<usize>],
) -> Result<PolySystem> {
    let indices = all_indices(sig);
    if indices.len() > POLY_MAX_COEFFS {
        return Err(Error::DimensionTooLarge {
            dim: indices.len(),
            cap: POLY_MAX_COEFFS,
        });
    }
    let identity = vec![0; sig.parties()];
    for k in known.keys().chain(unknowns) {
        if k.len() != sig.parties() || k.iter().zip(sig.dims()).any(|(&a, &d)| a >= d * d) {
            return Err(Error::InvalidArgument(format!("coefficient index {k:?} out of range")));
        }
    }
    if let Some(&v) = known.get(&identity) {
        if v != 1.0 {
            return Err(Error::BadNormalization(v));
        }
    }
    if unknowns.contains(&identity) {
        return Err(Error::Overlap(vec![coefficient_name(sig, &identity)]));
    }
    let overlap: Vec<String> = unknowns
        .iter()
        .filter(|k| known.contains_key(*k))
        .map(|k| coefficient_name(sig, k))
        .collect();
    if !overlap.is_empty() {
        return Err(Error::Overlap(overlap));
    }
    let gap: Vec<String> = indices[1..]
        .iter()
        .filter(|k| !known.contains_key(*k) && !unknowns.contains(k))
        .map(|k| coefficient_name(sig, k))
        .collect();
    if !gap.is_empty() {
        return Err(Error::CoverageGap(gap));
    }

    let qubits = sig.dims().iter().all(|&d| d == 2);
    let mut variables = Vec::new();
    let mut substitutions = BTreeMap::new();
    let mut slots = Vec::with_capacity(indices.len());
    for (flat, k) in indices.iter().enumerate() {
        if flat == 0 {
            slots.push(Slot::Known(Scalar::one()));
        } else if let Some(&v) = known.get(k) {
            let s = if qubits {
                Scalar::from_f64_decimal(v)?
            } else {
                Scalar::Float(v)
            };
            substitutions.insert(coefficient_name(sig, k), s.clone());
            slots.push(Slot::Known(s));
        } else {
            slots.push(Slot::Var(variables.len()));
            variables.push(coefficient_name(sig, k));
        }
    }

    let dim = sig.total_dim() as i64;
    let scale = |num: i64, den: i64| {
        if qubits {
            Scalar::ratio(num, den)
        } else {
            Scalar::Float(num as f64 / den as f64)
        }
    };

    // Tr ρ² = (1/D) Σ c_k²
    let mut tr2 = Poly::zero();
    for s in &slots {
        let p = slot_poly(s);
        tr2 = tr2.add(&p.mul(&p));
    }
    let tr2 = tr2.mul(&Poly::constant(scale(1, dim)));
    let p1 = tr2.add(&Poly::constant(Scalar::int(-1)));

    // Tr ρ³ = (1/D³) Σ c_k c_l c_m Π_p Tr(g g g)
    let triples: Vec<Vec<(usize, usize, usize, Complex64)>> = sig.dims().iter().map(|&d| local_triples(d)).collect();
    let sizes: Vec<usize> = sig.dims().iter().map(|d| d * d).collect();
    let mut weights: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    let mut stack = vec![(0usize, 0usize, 0usize, 0usize, Complex64::new(1.0, 0.0))];
    while let Some((p, k, l, m, w)) = stack.pop() {
        if p == sig.parties() {
            if w.re != 0.0 {
                *weights.entry((k, l, m)).or_insert(0.0) += w.re;
            }
            continue;
        }
        for &(a, b, c, t) in &triples[p] {
            stack.push((p + 1, k * sizes[p] + a, l * sizes[p] + b, m * sizes[p] + c, w * t));
        }
    }
    let mut tr3 = Poly::zero();
    let d3 = dim * dim * dim;
    for (&(k, l, m), &w) in &weights {
        if w == 0.0 {
            continue;
        }
        let coeff = if qubits {
            Scalar::ratio(w.round() as i64, d3)
        } else {
            Scalar::Float(w / d3 as f64)
        };
        let term = slot_poly(&slots[k])
            .mul(&slot_poly(&slots[l]))
            .mul(&slot_poly(&slots[m]))
            .mul(&Poly::constant(coeff));
        tr3 = tr3.add(&term);
    }
    let p2 = tr3.add(&Poly::constant(Scalar::int(-1)));
    let sextic = p1.mul(&p1).add(&p2.mul(&p2));
    Ok(PolySystem {
        dims: sig.dims().to_vec(),
        variables,
        substitutions,
        p1,
        p2,
        sextic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{decompose, power_traces, reconstruct, BlochTensor};
    use crate::rng::rng_from_seed;
    use crate::tensor::random::{haar_random_pure, random_hermitian_trace_one};

    fn q(n: usize) -> PartySignature {
        PartySignature::qubits(n).unwrap()
    }

    fn q_unknowns(sig: &PartySignature) -> Vec<Vec<usize>> {
        resolve_names(sig, &["Q".to_string()]).unwrap()
    }

    fn zeros_except(sig: &PartySignature, unknown: &[Vec<usize>]) -> BTreeMap<Vec<usize>, f64> {
        all_indices(sig)
            .into_iter()
            .skip(1)
            .filter(|k| !unknown.contains(k))
            .map(|k| (k, 0.0))
            .collect()
    }

    fn sum_sq(n: usize) -> Poly {
        let mut p = Poly::zero();
        for i in 0..n {
            p.add_term(Monomial(vec![(i, 2)]), Scalar::one());
        }
        p
    }

    #[test]
    fn vanishing_correlations_give_incompatible_spheres() {
        let sig = q(3);
        let unk = q_unknowns(&sig);
        assert_eq!(unk.len(), 27);
        let ps = export_polysystem(&sig, &zeros_except(&sig, &unk), &unk).unwrap();
        // p1 = (1 + ΣQ²)/8 − 1, p2 = (1 + 3ΣQ²)/64 − 1
        let mut want1 = sum_sq(27).mul(&Poly::constant(Scalar::ratio(1, 8)));
        want1.add_term(Monomial::one(), Scalar::ratio(-7, 8));
        let mut want2 = sum_sq(27).mul(&Poly::constant(Scalar::ratio(3, 64)));
        want2.add_term(Monomial::one(), Scalar::ratio(-63, 64));
        assert_eq!(ps.p1, want1);
        assert_eq!(ps.p2, want2);
        assert!(ps.p1.is_exact() && ps.p2.is_exact() && ps.sextic.is_exact());
        assert_eq!(ps.sextic.degree(), 4);
    }

    #[test]
    fn single_qubit_sphere() {
        let sig = q(1);
        let unk = resolve_names(&sig, &["alpha".to_string()]).unwrap();
        let ps = export_polysystem(&sig, &BTreeMap::new(), &unk).unwrap();
        let mut want = sum_sq(3).mul(&Poly::constant(Scalar::ratio(1, 2)));
        want.add_term(Monomial::one(), Scalar::ratio(-1, 2));
        assert_eq!(ps.p1, want);
        // Tr ρ³ = (1 + 3|a|²)/4, so p2 = (3/4)(|a|² − 1)
        let mut want2 = sum_sq(3).mul(&Poly::constant(Scalar::ratio(3, 4)));
        want2.add_term(Monomial::one(), Scalar::ratio(-3, 4));
        assert_eq!(ps.p2, want2);
    }

    #[test]
    fn true_coefficients_are_a_root() {
        let sig = q(3);
        let psi = haar_random_pure(&sig, 5);
        let b = decompose(&psi.to_density()).unwrap();
        let unk = q_unknowns(&sig);
        let known: BTreeMap<Vec<usize>, f64> = all_indices(&sig)
            .into_iter()
            .skip(1)
            .filter(|k| !unk.contains(k))
            .map(|k| {
                let v = b.get(&k);
                (k, v)
            })
            .collect();
        let ps = export_polysystem(&sig, &known, &unk).unwrap();
        assert!(ps.p1.degree() <= 2 && ps.p2.degree() <= 2);
        let x: Vec<f64> = unk.iter().map(|k| b.get(k)).collect();
        let (v1, v2) = ps.eval(&x);
        assert!(v1.abs() < 1e-9 && v2.abs() < 1e-9, "{v1} {v2}");
    }

    #[test]
    fn full_expansion_matches_power_traces() {
        let mut rng = rng_from_seed(4);
        for sig in [
            q(2),
            PartySignature::new(vec![3]).unwrap(),
            PartySignature::new(vec![2, 3]).unwrap(),
        ] {
            let h = random_hermitian_trace_one(sig.total_dim(), &mut rng);
            let b = crate::bloch::decompose_hermitian(&sig, &h).unwrap();
            let unk: Vec<Vec<usize>> = all_indices(&sig).into_iter().skip(1).collect();
            let ps = export_polysystem(&sig, &BTreeMap::new(), &unk).unwrap();
            let x: Vec<f64> = unk.iter().map(|k| b.get(k)).collect();
            let (t2, t3) = power_traces(&h);
            let (v1, v2) = ps.eval(&x);
            assert!((v1 - (t2 - 1.0)).abs() < 1e-9);
            assert!((v2 - (t3 - 1.0)).abs() < 1e-9);
            let _ = reconstruct(&BlochTensor::identity(sig.clone()));
        }
    }

    #[test]
    fn coverage_and_overlap_errors() {
        let sig = q(2);
        let unk = resolve_names(&sig, &["R".to_string()]).unwrap();
        assert!(matches!(
            export_polysystem(&sig, &BTreeMap::new(), &unk),
            Err(Error::CoverageGap(_))
        ));
        let mut known = zeros_except(&sig, &[]);
        assert!(matches!(export_polysystem(&sig, &known, &unk), Err(Error::Overlap(_))));
        known.insert(vec![0, 0], 2.0);
        assert!(matches!(
            export_polysystem(&sig, &known, &[]),
            Err(Error::BadNormalization(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let sig = q(3);
        let psi = haar_random_pure(&sig, 9);
        let b = decompose(&psi.to_density()).unwrap();
        let unk = resolve_names(&sig, &["Q_111".to_string(), "T".to_string()]).unwrap();
        let known: BTreeMap<Vec<usize>, f64> = all_indices(&sig)
            .into_iter()
            .skip(1)
            .filter(|k| !unk.contains(k))
            .map(|k| {
                let v = b.get(&k);
                (k, v)
            })
            .collect();
        let ps = export_polysystem(&sig, &known, &unk).unwrap();
        let text = ps.to_text();
        assert_eq!(parse_polysystem(&text).unwrap(), ps);

        let empty = export_polysystem(&sig, &zeros_except(&sig, &[]), &[]).unwrap();
        assert!(empty.variables.is_empty() && empty.p1.degree() == 0);
        assert_eq!(parse_polysystem(&empty.to_text()).unwrap(), empty);

        let mut float = empty.clone();
        float.p1 = Poly::constant(Scalar::Float(-0.1));
        assert_eq!(parse_polysystem(&float.to_text()).unwrap(), float);
    }

    #[test]
    fn emitted_lines() {
        let sig = q(1);
        let unk = resolve_names(&sig, &["alpha".to_string()]).unwrap();
        let text = export_polysystem(&sig, &BTreeMap::new(), &unk).unwrap().to_text();
        assert!(text.contains("vars alpha_1 alpha_2 alpha_3\n"));
        assert!(text.contains("p1: 1/2*alpha_1^2 + 1/2*alpha_2^2 + 1/2*alpha_3^2 - 1/2 = 0\n"));
    }

    #[test]
    fn names() {
        assert_eq!(coefficient_name(&q(3), &[1, 0, 0]), "alpha_1");
        assert_eq!(coefficient_name(&q(3), &[0, 0, 3]), "gamma_3");
        assert_eq!(coefficient_name(&q(3), &[1, 0, 2]), "S_12");
        assert_eq!(coefficient_name(&q(3), &[0, 2, 3]), "T_23");
        assert_eq!(coefficient_name(&q(3), &[1, 2, 3]), "Q_123");
        assert_eq!(coefficient_name(&q(4), &[1, 0, 0, 3]), "c_1_0_0_3");
        assert_eq!(Scalar::from_f64_decimal(0.1).unwrap(), Scalar::ratio(1, 10));
        assert_eq!(Scalar::from_f64_decimal(-2.5).unwrap(), Scalar::ratio(-5, 2));
    }
}
