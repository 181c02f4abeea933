//! Parameter and constraint counts for the purification argument.
//!
//! A mixed state consistent with `binom(N, m)` marginals of `m` parties is
//! described by `P = d^{2N}[2·binom(N,m) − 1]` real parameters, constrained
//! by at most `C = 2d^{2N}[binom(N,m) − 1] + binom(N,m)·d^{2m}` equations.
//! A positive `P − C = d^{2N} − binom(N,m)·d^{2m}` leaves free parameters,
//! so the marginals generically do not pin down the state.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParamCount {
    pub n: u32,
    pub m: u32,
    pub d: u32,
    pub p: i128,
    pub c: i128,
    pub margin: i128,
}

fn binom(n: u32, k: u32) -> Option<i128> {
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as i128)? / (i + 1) as i128;
    }
    Some(acc)
}

/// Exact counts; `Overflow` once `d^{2N}·binom(N, m)` leaves `i128`.
pub fn count_params(n: u32, m: u32, d: u32) -> Result<ParamCount> {
    if m < 1 || m > n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= m <= N, got m = {m}, N = {n}"
        )));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("local dimension must be >= 2, got {d}")));
    }
    let of = || Error::Overflow("parameter counts");
    let dd = (d as i128).checked_mul(d as i128).ok_or_else(of)?;
    let d2n = dd.checked_pow(n).ok_or_else(of)?;
    let d2m = dd.checked_pow(m).ok_or_else(of)?;
    let b = binom(n, m).ok_or_else(of)?;
    let p = d2n.checked_mul(2 * b - 1).ok_or_else(of)?;
    let c = d2n
        .checked_mul(2 * (b - 1))
        .and_then(|x| x.checked_add(b.checked_mul(d2m)?))
        .ok_or_else(of)?;
    let margin = p - c;
    debug_assert_eq!(margin, d2n - b * d2m);
    Ok(ParamCount { n, m, d, p, c, margin })
}

/// Rows for every `(N, m)` with `N` in `ns` and `1 <= m <= N`.
pub fn count_table(ns: impl IntoIterator<Item = u32>, d: u32) -> Result<Vec<ParamCount>> {
    let mut rows = Vec::new();
    for n in ns {
        for m in 1..=n {
            rows.push(count_params(n, m, d)?);
        }
    }
    Ok(rows)
}

/// Aligned plain-text table.
pub fn format_table(rows: &[ParamCount]) -> String {
    let header = ["N", "m", "d", "P", "C", "P-C"];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.n.to_string(),
                r.m.to_string(),
                r.d.to_string(),
                r.p.to_string(),
                r.c.to_string(),
                r.margin.to_string(),
            ]
        })
        .collect();
    let mut width = header.map(str::len);
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, row: &[&str]| {
        let parts: Vec<String> = row.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, &header);
    for row in &cells {
        let refs: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &refs);
    }
    out
}
