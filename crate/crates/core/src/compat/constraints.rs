//! The marginal constraints in Bloch coordinates.
//!
//! `Tr_Ā Σ_k` vanishes unless the support of `k` lies inside `a`, and then
//! equals `(D/D_a) Σ_{k|a}`. So fixing the marginal on `a` fixes exactly the
//! coefficients supported in `a`, and the Frobenius projection onto the
//! constraint set overwrites those coefficients. A coefficient constrained by
//! several subsets takes their `1/D_a`-weighted mean, which is the
//! least-squares fit the explicit map's pseudoinverse produces.

use super::pure::Objective;
use crate::bloch::BlochTransform;
use crate::error::Result;
use crate::marginal::{common_system, Marginal, MarginalScenario};
use crate::tensor::{CMatrix, PartySignature};

/// Flat indices of the constrained coefficients, each listed once; the
/// identity comes first.
fn constrained_indices(t: &BlochTransform, sig: &PartySignature, subsets: &[Vec<usize>]) -> Vec<usize> {
    let mut out = Vec::new();
    for (a, s) in subsets.iter().enumerate() {
        for_each_local(sig, s, |k| {
            let supp: Vec<usize> = (0..k.len()).filter(|&p| k[p] != 0).collect();
            // count each coefficient under the first subset that contains it
            let first = subsets
                .iter()
                .position(|b| supp.iter().all(|p| b.contains(p)))
                .expect("own subset contains the support");
            if first == a {
                out.push(t.flat_index(k));
            }
        });
    }
    out.sort_unstable();
    out
}

/// Calls `f` with every global multi-index supported inside `subset`.
fn for_each_local(sig: &PartySignature, subset: &[usize], mut f: impl FnMut(&[usize])) {
    let mut k = vec![0; sig.parties()];
    let sizes: Vec<usize> = subset.iter().map(|&p| sig.dims()[p] * sig.dims()[p]).collect();
    loop {
        f(&k);
        let mut pos = subset.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            let p = subset[pos];
            k[p] += 1;
            if k[p] < sizes[pos] {
                break;
            }
            k[p] = 0;
        }
    }
}

/// Number of Pauli strings fixed by the scenario, identity included. Equal
/// to the rank of the explicit marginal map.
pub fn constrained_count(scenario: &MarginalScenario) -> u128 {
    let sig = scenario.sig();
    let subsets = scenario.subsets();
    let mut total: u128 = 0;
    for (a, s) in subsets.iter().enumerate() {
        for mask in 0u64..(1u64 << s.len()) {
            let supp: Vec<usize> = (0..s.len()).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
            let first = subsets
                .iter()
                .position(|b| supp.iter().all(|p| b.contains(p)))
                .expect("own subset contains the support");
            if first == a {
                total += supp
                    .iter()
                    .map(|&p| (sig.dims()[p] * sig.dims()[p] - 1) as u128)
                    .product::<u128>();
            }
        }
    }
    total
}

/// `D² − constrained_count`: traceless Hermitian directions invisible to
/// every scenario marginal.
pub fn kernel_dim(scenario: &MarginalScenario) -> u128 {
    let d2: u128 = scenario.sig().dims().iter().map(|&d| (d * d) as u128).product();
    d2 - constrained_count(scenario)
}

struct Block {
    weight: f64,
    /// (position in the constrained list, target coefficient)
    entries: Vec<(usize, f64)>,
}

pub(crate) struct ConstraintSet {
    sig: PartySignature,
    objective: Objective,
    transform: BlochTransform,
    indices: Vec<usize>,
    targets: Vec<f64>,
    blocks: Vec<Block>,
}

impl ConstraintSet {
    pub fn new(marginals: &[Marginal]) -> Result<Self> {
        let sig = common_system(marginals)?.clone();
        let subsets: Vec<Vec<usize>> = marginals.iter().map(|m| m.subset().to_vec()).collect();
        let transform = BlochTransform::new(&sig);
        let indices = constrained_indices(&transform, &sig, &subsets);
        let mut num = vec![0.0; indices.len()];
        let mut den = vec![0.0; indices.len()];
        let mut blocks = Vec::with_capacity(marginals.len());
        for m in marginals {
            let local_sig = m.state().sig();
            let local = BlochTransform::new(local_sig);
            let coeffs = local.forward(m.state().matrix());
            let weight = 1.0 / local_sig.total_dim() as f64;
            let mut entries = Vec::with_capacity(coeffs.len());
            for (flat, &c) in coeffs.iter().enumerate() {
                let lk = local.multi_index(flat);
                let mut gk = vec![0; sig.parties()];
                for (i, &p) in m.subset().iter().enumerate() {
                    gk[p] = lk[i];
                }
                let pos = indices
                    .binary_search(&transform.flat_index(&gk))
                    .expect("supported coefficient is constrained");
                num[pos] += weight * c;
                den[pos] += weight;
                entries.push((pos, c));
            }
            blocks.push(Block { weight, entries });
        }
        // the trace row
        num[0] += 1.0;
        den[0] += 1.0;
        let targets = num.iter().zip(&den).map(|(n, d)| n / d).collect();
        Ok(Self {
            objective: Objective::new(&sig, marginals),
            sig,
            transform,
            indices,
            targets,
            blocks,
        })
    }

    pub fn sig(&self) -> &PartySignature {
        &self.sig
    }

    /// Squared residual as a function of a PSD factor.
    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn dim(&self) -> usize {
        self.sig.total_dim()
    }

    pub fn transform(&self) -> &BlochTransform {
        &self.transform
    }

    /// Constrained flat indices and their affine targets.
    pub fn targets(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.targets.iter().copied())
    }

    pub fn coeffs(&self, x: &CMatrix) -> Vec<f64> {
        self.transform.forward(x)
    }

    /// `sqrt(Σ_a ‖Tr_Ā X − σ_a‖²_F)` from the Bloch coefficients of `X`.
    #[cfg(test)]
    pub fn residual(&self, c: &[f64]) -> f64 {
        let mut total = 0.0;
        for b in &self.blocks {
            let mut s = 0.0;
            for &(pos, t) in &b.entries {
                let diff = c[self.indices[pos]] - t;
                s += diff * diff;
            }
            total += b.weight * s;
        }
        total.sqrt()
    }

    /// Residual of `X / Tr X`.
    pub fn normalized_residual(&self, c: &[f64]) -> f64 {
        let c0 = c[0];
        if c0 <= 0.0 {
            return f64::INFINITY;
        }
        let mut total = 0.0;
        for b in &self.blocks {
            let mut s = 0.0;
            for &(pos, t) in &b.entries {
                let diff = c[self.indices[pos]] / c0 - t;
                s += diff * diff;
            }
            total += b.weight * s;
        }
        total.sqrt()
    }

    /// Coefficient vector of `P_A(X) − X`, given the coefficients of `X`.
    pub fn correction(&self, c: &[f64]) -> Vec<f64> {
        let mut delta = vec![0.0; c.len()];
        for (&k, &t) in self.indices.iter().zip(&self.targets) {
            delta[k] = t - c[k];
        }
        delta
    }

    /// Frobenius projection onto the affine constraint set.
    pub fn project(&self, x: &CMatrix, c: &[f64]) -> CMatrix {
        x + self.transform.inverse(&self.correction(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::map::build_marginal_map;
    use crate::marginal::{all_m_scenario, extract, half_plus_one_scenario};
    use crate::rng::rng_from_seed;
    use crate::tensor::random::{haar_random_pure, random_density, random_hermitian_trace_one};
    use crate::tensor::DensityMatrix;

    fn q(n: usize) -> PartySignature {
        PartySignature::qubits(n).unwrap()
    }

    #[test]
    fn combinatorial_rank_matches_svd() {
        let cases = vec![
            all_m_scenario(q(4), 2).unwrap(),
            all_m_scenario(q(3), 1).unwrap(),
            half_plus_one_scenario(q(4)).unwrap(),
            MarginalScenario::new(
                PartySignature::new(vec![3, 2, 2]).unwrap(),
                vec![vec![0, 1], vec![1, 2]],
            )
            .unwrap(),
        ];
        for sc in cases {
            let map = build_marginal_map(&sc).unwrap();
            assert_eq!(map.rank() as u128, constrained_count(&sc), "{:?}", sc.subsets());
            assert_eq!(map.kernel_dim() as u128, kernel_dim(&sc));
        }
    }

    #[test]
    fn projection_agrees_with_pseudoinverse() {
        let sig = PartySignature::new(vec![2, 3, 2]).unwrap();
        let sc = MarginalScenario::new(sig.clone(), vec![vec![0, 1], vec![1, 2]]).unwrap();
        let map = build_marginal_map(&sc).unwrap();
        // inconsistent on the shared party: targets from two different states
        let m1 = extract(&random_density(&sig, 2, 1), &sc).unwrap();
        let m2 = extract(&random_density(&sig, 3, 2), &sc).unwrap();
        let ms = vec![m1[0].clone(), m2[1].clone()];
        let cs = ConstraintSet::new(&ms).unwrap();
        let mut rng = rng_from_seed(8);
        let x = random_hermitian_trace_one(12, &mut rng);
        let c = cs.coeffs(x.matrix());
        let fast = cs.project(x.matrix(), &c);
        let slow = map.project(x.matrix(), &map.targets(&ms).unwrap());
        assert!((fast - slow).norm() < 1e-10);
    }

    #[test]
    fn residual_matches_direct_marginal_distance() {
        let sc = all_m_scenario(q(3), 2).unwrap();
        let ms = extract(&haar_random_pure(&q(3), 6), &sc).unwrap();
        let cs = ConstraintSet::new(&ms).unwrap();
        let other = random_density(&q(3), 8, 4);
        let direct: f64 = extract(&other, &sc)
            .unwrap()
            .iter()
            .zip(&ms)
            .map(|(a, b)| (a.state().matrix() - b.state().matrix()).norm_squared())
            .sum::<f64>()
            .sqrt();
        assert!((cs.residual(&cs.coeffs(other.matrix())) - direct).abs() < 1e-12);
        let mm = DensityMatrix::maximally_mixed(q(3));
        let y = cs.project(mm.matrix(), &cs.coeffs(mm.matrix()));
        assert!(cs.residual(&cs.coeffs(&y)) < 1e-12);
    }
}
