//! Closed-form `Tr ρ²` and `Tr ρ³` for three qubits in terms of the named
//! coefficients `α, β, γ` (one-body), `R` (AB), `S` (AC), `T` (BC) and
//! `Q` (ABC), with Pauli labels x, y, z mapped to indices 0, 1, 2.
//!
//! `Tr ρ² = (1 + squares) / 8` where `squares` is the sum of all squared
//! coefficients. The cubic is
//!
//! ```text
//! Tr ρ³ = (1 + 3·squares + 6·mixed − w_ε·eps_cubic − w_q·qq) / 64
//! ```
//!
//! with
//!
//! ```text
//! mixed     = R_ij α_i β_j + S_ij α_i γ_j + T_ij β_i γ_j
//!           + Q_ijk α_i T_jk + Q_ijk β_j S_ik + Q_ijk γ_k R_ij + R_ki T_ij S_kj
//! eps_cubic = (R_ij R_kl R_mn + S_ij S_kl S_mn + T_ij T_kl T_mn) ε_ikm ε_jln
//! qq        = Q_ijk Q_nop (R_lm ε_inl ε_jom δ_kp + S_lm ε_inl ε_kpm δ_jo
//!                          + T_lm ε_jol ε_kpm δ_in)
//! ```
//!
//! Direct traces fix the weights at `w_ε = 1` and `w_q = 3`. The commonly
//! quoted form of this identity carries `w_ε = w_q = 6`, which disagrees
//! with `Tr ρ³` whenever the ε groups are nonzero; [`CubicGroups::quoted_tr3`]
//! keeps that form around so the difference stays testable.

use crate::error::{Error, Result};

use super::tensor::BlochTensor;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThreeQubitCoeffs {
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
    pub gamma: [f64; 3],
    pub r: [[f64; 3]; 3],
    pub s: [[f64; 3]; 3],
    pub t: [[f64; 3]; 3],
    pub q: [[[f64; 3]; 3]; 3],
}

impl ThreeQubitCoeffs {
    pub fn from_tensor(b: &BlochTensor) -> Result<Self> {
        if b.sig().dims() != [2, 2, 2] {
            return Err(Error::WrongSignature {
                expected: "three qubits",
                got: b.sig().dims().to_vec(),
            });
        }
        let mut c = Self::default();
        for i in 0..3 {
            c.alpha[i] = b.get(&[i + 1, 0, 0]);
            c.beta[i] = b.get(&[0, i + 1, 0]);
            c.gamma[i] = b.get(&[0, 0, i + 1]);
            for j in 0..3 {
                c.r[i][j] = b.get(&[i + 1, j + 1, 0]);
                c.s[i][j] = b.get(&[i + 1, 0, j + 1]);
                c.t[i][j] = b.get(&[0, i + 1, j + 1]);
                for k in 0..3 {
                    c.q[i][j][k] = b.get(&[i + 1, j + 1, k + 1]);
                }
            }
        }
        Ok(c)
    }
}

fn eps(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// The index contractions of the cubic, each summed term by term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicGroups {
    pub squares: f64,
    pub mixed: f64,
    pub eps_cubic: f64,
    pub qq: f64,
}

impl CubicGroups {
    pub fn new(c: &ThreeQubitCoeffs) -> Self {
        let r3 = 0..3;
        let mut squares = 0.0;
        for i in r3.clone() {
            squares += c.alpha[i] * c.alpha[i] + c.beta[i] * c.beta[i] + c.gamma[i] * c.gamma[i];
            for j in r3.clone() {
                squares += c.s[i][j] * c.s[i][j] + c.r[i][j] * c.r[i][j] + c.t[i][j] * c.t[i][j];
                for k in r3.clone() {
                    squares += c.q[i][j][k] * c.q[i][j][k];
                }
            }
        }

        let mut mixed = 0.0;
        for i in r3.clone() {
            for j in r3.clone() {
                mixed += c.r[i][j] * c.alpha[i] * c.beta[j]
                    + c.s[i][j] * c.alpha[i] * c.gamma[j]
                    + c.t[i][j] * c.beta[i] * c.gamma[j];
                for k in r3.clone() {
                    mixed += c.q[i][j][k] * c.alpha[i] * c.t[j][k]
                        + c.q[i][j][k] * c.beta[j] * c.s[i][k]
                        + c.q[i][j][k] * c.gamma[k] * c.r[i][j]
                        + c.r[k][i] * c.t[i][j] * c.s[k][j];
                }
            }
        }

        let mut eps_cubic = 0.0;
        for i in r3.clone() {
            for j in r3.clone() {
                for k in r3.clone() {
                    for l in r3.clone() {
                        for m in r3.clone() {
                            for n in r3.clone() {
                                let e = eps(i, k, m) * eps(j, l, n);
                                if e != 0.0 {
                                    eps_cubic += e
                                        * (c.r[i][j] * c.r[k][l] * c.r[m][n]
                                            + c.s[i][j] * c.s[k][l] * c.s[m][n]
                                            + c.t[i][j] * c.t[k][l] * c.t[m][n]);
                                }
                            }
                        }
                    }
                }
            }
        }

        let mut qq = 0.0;
        for i in r3.clone() {
            for j in r3.clone() {
                for k in r3.clone() {
                    for n in r3.clone() {
                        for o in r3.clone() {
                            for p in r3.clone() {
                                let qq_ijk_nop = c.q[i][j][k] * c.q[n][o][p];
                                if qq_ijk_nop == 0.0 {
                                    continue;
                                }
                                for l in r3.clone() {
                                    for m in r3.clone() {
                                        qq += qq_ijk_nop
                                            * (c.r[l][m] * eps(i, n, l) * eps(j, o, m) * delta(k, p)
                                                + c.s[l][m] * eps(i, n, l) * eps(k, p, m) * delta(j, o)
                                                + c.t[l][m] * eps(j, o, l) * eps(k, p, m) * delta(i, n));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }

        Self {
            squares,
            mixed,
            eps_cubic,
            qq,
        }
    }

    pub fn tr2(&self) -> f64 {
        (1.0 + self.squares) / 8.0
    }

    pub fn tr3(&self) -> f64 {
        (1.0 + 3.0 * self.squares + 6.0 * self.mixed - self.eps_cubic - 3.0 * self.qq) / 64.0
    }

    /// The cubic with weight 6 on both ε groups.
    pub fn quoted_tr3(&self) -> f64 {
        (1.0 + 3.0 * self.squares + 6.0 * self.mixed - 6.0 * self.eps_cubic - 6.0 * self.qq) / 64.0
    }
}

/// `(Tr ρ², Tr ρ³)` from the closed-form three-qubit polynomials.
pub fn purity_polys_3qubit(b: &BlochTensor) -> Result<(f64, f64)> {
    let g = CubicGroups::new(&ThreeQubitCoeffs::from_tensor(b)?);
    Ok((g.tr2(), g.tr3()))
}
