use crate::error::{Error, Result};
use crate::tensor::PartySignature;

/// A system signature plus the party subsets whose marginals are in play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalScenario {
    sig: PartySignature,
    subsets: Vec<Vec<usize>>,
}

impl MarginalScenario {
    /// Sorts every subset and drops repeated subsets, keeping the first
    /// occurrence. A party listed twice inside one subset is an error.
    pub fn new(sig: PartySignature, subsets: Vec<Vec<usize>>) -> Result<Self> {
        if subsets.is_empty() {
            return Err(Error::InvalidArgument("scenario has no subsets".into()));
        }
        let mut out: Vec<Vec<usize>> = Vec::with_capacity(subsets.len());
        for mut s in subsets {
            s.sort_unstable();
            sig.check_subset(&s)?;
            if !out.contains(&s) {
                out.push(s);
            }
        }
        Ok(Self { sig, subsets: out })
    }

    pub fn sig(&self) -> &PartySignature {
        &self.sig
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }
}

/// `{r} ∪ {N/2, …, N−1}` for `r = 0..N/2` (0-based). For `N = 2` this is the
/// single full subset.
pub fn half_plus_one_scenario(sig: PartySignature) -> Result<MarginalScenario> {
    let n = sig.parties();
    if n % 2 == 1 {
        return Err(Error::OddN(n));
    }
    let block: Vec<usize> = (n / 2..n).collect();
    let subsets = (0..n / 2)
        .map(|r| std::iter::once(r).chain(block.iter().copied()).collect())
        .collect();
    MarginalScenario::new(sig, subsets)
}

/// `{r} ∪ {(N−1)/2, …, N−1}` for `r = 0..(N−1)/2`: `(N−1)/2` subsets of
/// `(N+3)/2` parties.
pub fn odd_scenario(sig: PartySignature) -> Result<MarginalScenario> {
    let n = sig.parties();
    if n.is_multiple_of(2) {
        return Err(Error::EvenN(n));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 parties, got {n}")));
    }
    let half = (n - 1) / 2;
    let block: Vec<usize> = (half..n).collect();
    let subsets = (0..half)
        .map(|r| std::iter::once(r).chain(block.iter().copied()).collect())
        .collect();
    MarginalScenario::new(sig, subsets)
}

/// Every `m`-party subset, lexicographic.
pub fn all_m_scenario(sig: PartySignature, m: usize) -> Result<MarginalScenario> {
    let n = sig.parties();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("subset size {m} out of range 1..={n}")));
    }
    let mut subsets = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        subsets.push(cur.clone());
        // advance to the next combination
        let mut i = m;
        while i > 0 && cur[i - 1] == n - m + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        cur[i - 1] += 1;
        for j in i..m {
            cur[j] = cur[j - 1] + 1;
        }
    }
    MarginalScenario::new(sig, subsets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: usize) -> PartySignature {
        PartySignature::qubits(n).unwrap()
    }

    #[test]
    fn half_plus_one_instances() {
        let s = half_plus_one_scenario(q(8)).unwrap();
        assert_eq!(
            s.subsets(),
            &[
                vec![0, 4, 5, 6, 7],
                vec![1, 4, 5, 6, 7],
                vec![2, 4, 5, 6, 7],
                vec![3, 4, 5, 6, 7]
            ]
        );
        assert_eq!(half_plus_one_scenario(q(2)).unwrap().subsets(), &[vec![0, 1]]);
        assert_eq!(
            half_plus_one_scenario(q(4)).unwrap().subsets(),
            &[vec![0, 2, 3], vec![1, 2, 3]]
        );
        assert!(matches!(half_plus_one_scenario(q(5)), Err(Error::OddN(5))));
    }

    #[test]
    fn half_plus_one_shares_block() {
        for n in (2..=12).step_by(2) {
            let s = half_plus_one_scenario(q(n)).unwrap();
            assert_eq!(s.len(), n / 2);
            for sub in s.subsets() {
                assert_eq!(sub.len(), n / 2 + 1);
                assert!((n / 2..n).all(|p| sub.contains(&p)));
            }
        }
    }

    #[test]
    fn odd_instances() {
        assert_eq!(odd_scenario(q(3)).unwrap().subsets(), &[vec![0, 1, 2]]);
        let s = odd_scenario(q(5)).unwrap();
        assert_eq!(s.subsets(), &[vec![0, 2, 3, 4], vec![1, 2, 3, 4]]);
        assert!(s.subsets().iter().all(|x| x.len() == 4));
        assert!(matches!(odd_scenario(q(4)), Err(Error::EvenN(4))));
    }

    #[test]
    fn canonicalization() {
        let s = MarginalScenario::new(q(3), vec![vec![2, 0], vec![0, 2], vec![1]]).unwrap();
        assert_eq!(s.subsets(), &[vec![0, 2], vec![1]]);
        assert!(MarginalScenario::new(q(3), vec![vec![1, 1]]).is_err());
        assert!(MarginalScenario::new(q(3), vec![vec![3]]).is_err());
        assert!(MarginalScenario::new(q(3), vec![vec![]]).is_err());
    }

    #[test]
    fn all_m_counts() {
        assert_eq!(all_m_scenario(q(4), 2).unwrap().len(), 6);
        assert_eq!(all_m_scenario(q(6), 3).unwrap().len(), 20);
        assert_eq!(all_m_scenario(q(4), 4).unwrap().subsets(), &[vec![0, 1, 2, 3]]);
        assert!(all_m_scenario(q(4), 5).is_err());
    }
}
