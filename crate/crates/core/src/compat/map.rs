//! The marginal constraints as an explicit real matrix.
//!
//! Hermitian `D × D` matrices are coordinatized by [`hvec`]: the diagonal,
//! then `√2·Re` and `√2·Im` of each upper off-diagonal entry in row-major
//! order, which makes the coordinates orthonormal for the Frobenius inner
//! product. The map stacks `hvec(Tr_Ā X)` for every subset `a` and a final
//! row for `Tr X`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::marginal::{Marginal, MarginalScenario};
use crate::tensor::signature::subset_offsets;
use crate::tensor::CMatrix;

/// Largest real dimension `D²` for which the explicit map is built.
pub const MAP_MAX_REAL_DIM: usize = 4096;

/// Relative singular-value cutoff for the numerical rank.
pub const RANK_RTOL: f64 = 1e-10;

pub fn hvec(m: &CMatrix) -> DVector<f64> {
    let d = m.nrows();
    let mut out = DVector::zeros(d * d);
    for i in 0..d {
        out[i] = m[(i, i)].re;
    }
    let mut pos = d;
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            out[pos] = r2 * m[(i, j)].re;
            out[pos + 1] = r2 * m[(i, j)].im;
            pos += 2;
        }
    }
    out
}

pub fn unhvec(v: &DVector<f64>, d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(v[i], 0.0);
    }
    let mut pos = d;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            let z = Complex64::new(v[pos] * h, v[pos + 1] * h);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            pos += 2;
        }
    }
    m
}

#[derive(Debug, Clone)]
pub struct MarginalMap {
    scenario: MarginalScenario,
    matrix: DMatrix<f64>,
    u: DMatrix<f64>,
    singular: Vec<f64>,
    v: DMatrix<f64>,
}

pub fn build_marginal_map(scenario: &MarginalScenario) -> Result<MarginalMap> {
    let sig = scenario.sig();
    let dim = sig.total_dim();
    if dim * dim > MAP_MAX_REAL_DIM {
        return Err(Error::DimensionTooLarge {
            dim: dim * dim,
            cap: MAP_MAX_REAL_DIM,
        });
    }
    let blocks: Vec<(Vec<usize>, Vec<usize>, usize)> = scenario
        .subsets()
        .iter()
        .map(|s| {
            // local index of each global index's kept and traced digits
            let keep = subset_offsets(sig, s);
            let rest = subset_offsets(sig, &sig.complement(s));
            let mut kept_of = vec![0; dim];
            let mut rest_of = vec![0; dim];
            for (a, &ka) in keep.iter().enumerate() {
                for (t, &rt) in rest.iter().enumerate() {
                    kept_of[ka + rt] = a;
                    rest_of[ka + rt] = t;
                }
            }
            (kept_of, rest_of, keep.len())
        })
        .collect();
    let rows: usize = blocks.iter().map(|b| b.2 * b.2).sum::<usize>() + 1;
    let cols = dim * dim;
    let mut matrix = DMatrix::zeros(rows, cols);

    // Column j is the image of the j-th orthonormal basis element.
    let mut col = 0;
    let mut basis_elems: Vec<(usize, usize, Complex64)> = Vec::with_capacity(cols);
    for i in 0..dim {
        basis_elems.push((i, i, Complex64::new(1.0, 0.0)));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in i + 1..dim {
            basis_elems.push((i, j, Complex64::new(h, 0.0)));
            basis_elems.push((i, j, Complex64::new(0.0, h)));
        }
    }
    for &(i, j, z) in &basis_elems {
        let mut row0 = 0;
        for (kept_of, rest_of, dk) in &blocks {
            if rest_of[i] == rest_of[j] {
                let mut red = CMatrix::zeros(*dk, *dk);
                let (a, b) = (kept_of[i], kept_of[j]);
                red[(a, b)] += z;
                if i != j {
                    red[(b, a)] += z.conj();
                }
                let hv = hvec(&red);
                for (r, &val) in hv.iter().enumerate() {
                    matrix[(row0 + r, col)] = val;
                }
            }
            row0 += dk * dk;
        }
        if i == j {
            matrix[(rows - 1, col)] = 1.0;
        }
        col += 1;
    }

    let svd = matrix.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > RANK_RTOL * smax)
        .collect();
    let u_full = svd.u.expect("u requested");
    let vt_full = svd.v_t.expect("v_t requested");
    let u = DMatrix::from_fn(rows, keep.len(), |r, c| u_full[(r, keep[c])]);
    let v = DMatrix::from_fn(cols, keep.len(), |r, c| vt_full[(keep[c], r)]);
    let singular = keep.iter().map(|&k| svd.singular_values[k]).collect();
    Ok(MarginalMap {
        scenario: scenario.clone(),
        matrix,
        u,
        singular,
        v,
    })
}

impl MarginalMap {
    pub fn scenario(&self) -> &MarginalScenario {
        &self.scenario
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.singular.len()
    }

    /// Dimension of the space of traceless Hermitian matrices with all
    /// scenario marginals zero.
    pub fn kernel_dim(&self) -> usize {
        self.matrix.ncols() - self.rank()
    }

    pub fn apply(&self, x: &CMatrix) -> DVector<f64> {
        &self.matrix * hvec(x)
    }

    /// Stacked right-hand side for the given marginals, in scenario order.
    pub fn targets(&self, marginals: &[Marginal]) -> Result<DVector<f64>> {
        let subsets = self.scenario.subsets();
        let mut out = Vec::with_capacity(self.rows());
        for s in subsets {
            let m = marginals
                .iter()
                .find(|m| m.subset() == s.as_slice())
                .ok_or_else(|| Error::InvalidArgument(format!("no marginal for subset {s:?}")))?;
            out.extend(hvec(m.state().matrix()).iter());
        }
        out.push(1.0);
        Ok(DVector::from_vec(out))
    }

    /// `x − M⁺(Mx − b)`: nearest point (Frobenius) that best fits `b`.
    pub fn project(&self, x: &CMatrix, b: &DVector<f64>) -> CMatrix {
        let hx = hvec(x);
        let r = &self.matrix * &hx - b;
        let mut t = self.u.transpose() * r;
        for (k, s) in self.singular.iter().enumerate() {
            t[k] /= s;
        }
        unhvec(&(hx - &self.v * t), x.nrows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginal::{all_m_scenario, extract, MarginalScenario};
    use crate::rng::rng_from_seed;
    use crate::tensor::random::{haar_random_pure, random_density, random_hermitian_trace_one};
    use crate::tensor::{DensityMatrix, PartySignature};

    fn q(n: usize) -> PartySignature {
        PartySignature::qubits(n).unwrap()
    }

    #[test]
    fn hvec_is_an_isometry() {
        let mut rng = rng_from_seed(3);
        let h = random_hermitian_trace_one(5, &mut rng);
        let v = hvec(h.matrix());
        assert!((v.norm() - h.matrix().norm()).abs() < 1e-12);
        assert!((unhvec(&v, 5) - h.matrix()).norm() < 1e-14);
    }

    #[test]
    fn map_reproduces_extracted_marginals() {
        let sig = PartySignature::new(vec![2, 3, 2]).unwrap();
        let sc = MarginalScenario::new(sig.clone(), vec![vec![0, 1], vec![1, 2], vec![2]]).unwrap();
        let map = build_marginal_map(&sc).unwrap();
        let rho = random_density(&sig, 4, 21);
        let b = map.targets(&extract(&rho, &sc).unwrap()).unwrap();
        assert!((map.apply(rho.matrix()) - b).norm() < 1e-10);
    }

    #[test]
    fn two_qubit_single_party_rank() {
        let sc = MarginalScenario::new(q(2), vec![vec![0], vec![1]]).unwrap();
        let map = build_marginal_map(&sc).unwrap();
        assert_eq!(map.rows(), 4 + 4 + 1);
        // identity, X/Y/Z on each party
        assert_eq!(map.rank(), 1 + 3 + 3);
        assert_eq!(map.kernel_dim(), 9);
    }

    #[test]
    fn four_qubit_pairs_row_count() {
        let sc = all_m_scenario(q(4), 2).unwrap();
        let map = build_marginal_map(&sc).unwrap();
        assert_eq!(map.rows(), 97);
        // 1 + 4·3 + 6·9 constrained Pauli strings
        assert_eq!(map.rank(), 67);
    }

    #[test]
    fn maximally_mixed_targets() {
        let sc = all_m_scenario(q(3), 2).unwrap();
        let map = build_marginal_map(&sc).unwrap();
        let mm = DensityMatrix::maximally_mixed(q(3));
        let b = map.targets(&extract(&mm, &sc).unwrap()).unwrap();
        assert!((map.apply(mm.matrix()) - b).norm() < 1e-14);
    }

    #[test]
    fn projection_lands_on_affine_set() {
        let sc = all_m_scenario(q(3), 2).unwrap();
        let map = build_marginal_map(&sc).unwrap();
        let psi = haar_random_pure(&q(3), 2);
        let b = map.targets(&extract(&psi, &sc).unwrap()).unwrap();
        let mut rng = rng_from_seed(9);
        let x = random_hermitian_trace_one(8, &mut rng);
        let y = map.project(x.matrix(), &b);
        assert!((map.apply(&y) - &b).norm() < 1e-10);
        // idempotent
        assert!((map.project(&y, &b) - &y).norm() < 1e-10);
    }

    #[test]
    fn cap_is_enforced() {
        let sc = all_m_scenario(q(7), 1).unwrap();
        assert!(matches!(build_marginal_map(&sc), Err(Error::DimensionTooLarge { .. })));
    }
}
