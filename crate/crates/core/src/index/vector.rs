use std::collections::BTreeMap;

use crate::error::{invalid, Result};

/// `Σ_{k=1}^{len} (-1)^k v_k` with 1-based positions, so the first entry
/// enters with a minus sign.
pub fn alternating_sum(entries: &[u32]) -> Result<i64> {
    if entries.is_empty() || !entries.len().is_multiple_of(2) {
        return invalid(format!(
            "alternating sum needs a nonempty even-length tuple, got length {}",
            entries.len()
        ));
    }
    Ok(signed_sum(entries))
}

pub(crate) fn signed_sum(entries: &[u32]) -> i64 {
    entries
        .iter()
        .enumerate()
        .map(|(k, &v)| if k % 2 == 0 { -(v as i64) } else { v as i64 })
        .sum()
}

/// Ordered index tuple of even length with entries in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexVector {
    entries: Vec<u32>,
    alt_sum: i64,
}

impl IndexVector {
    pub fn new(entries: Vec<u32>, n: u32) -> Result<Self> {
        if n == 0 {
            return invalid("n must be at least 1");
        }
        if let Some(bad) = entries.iter().find(|&&v| v == 0 || v > n) {
            return invalid(format!("entry {bad} outside 1..={n}"));
        }
        let alt_sum = alternating_sum(&entries)?;
        Ok(Self { entries, alt_sum })
    }

    /// Caller guarantees the range and parity checks.
    pub(crate) fn from_checked(entries: Vec<u32>) -> Self {
        let alt_sum = signed_sum(&entries);
        Self { entries, alt_sum }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Half the length, the `p` of `A_{2p}`.
    pub fn half_len(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn alt_sum(&self) -> i64 {
        self.alt_sum
    }

    pub fn multiset(&self) -> IndexMultiset {
        IndexMultiset::from_entries(&self.entries)
    }

    pub fn is_pair_matched(&self) -> bool {
        is_odd_even_pair_matched(self)
    }

    pub fn into_entries(self) -> Vec<u32> {
        self.entries
    }
}

impl AsRef<[u32]> for IndexVector {
    fn as_ref(&self) -> &[u32] {
        &self.entries
    }
}

/// The multiset `S_J` of a tuple: value → multiplicity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexMultiset(BTreeMap<u32, usize>);

impl IndexMultiset {
    pub fn from_entries(entries: &[u32]) -> Self {
        let mut m = BTreeMap::new();
        for &v in entries {
            *m.entry(v).or_insert(0) += 1;
        }
        Self(m)
    }

    pub fn multiplicity(&self, value: u32) -> usize {
        self.0.get(&value).copied().unwrap_or(0)
    }

    pub fn contains(&self, value: u32) -> bool {
        self.0.contains_key(&value)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        self.0.iter().map(|(&v, &m)| (v, m))
    }

    pub fn values(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.keys().copied()
    }

    /// Merge another multiset into this one (multiplicities add).
    pub fn absorb(&mut self, other: &IndexMultiset) {
        for (v, m) in other.iter() {
            *self.0.entry(v).or_insert(0) += m;
        }
    }
}

/// True iff every value occurs equally often at odd and at even (1-based)
/// positions.
pub fn is_odd_even_pair_matched(v: &IndexVector) -> bool {
    let mut balance: BTreeMap<u32, i64> = BTreeMap::new();
    for (k, &x) in v.entries().iter().enumerate() {
        *balance.entry(x).or_insert(0) += if k % 2 == 0 { 1 } else { -1 };
    }
    balance.values().all(|&b| b == 0)
}

/// Per-value form: `value` occurs, and equally often at odd and even
/// positions.
pub fn is_value_pair_matched(v: &IndexVector, value: u32) -> bool {
    let (mut odd, mut even) = (0usize, 0usize);
    for (k, &x) in v.entries().iter().enumerate() {
        if x == value {
            if k % 2 == 0 {
                odd += 1;
            } else {
                even += 1;
            }
        }
    }
    odd > 0 && odd == even
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(e: &[u32], n: u32) -> IndexVector {
        IndexVector::new(e.to_vec(), n).unwrap()
    }

    #[test]
    fn alternating_sum_examples() {
        assert_eq!(alternating_sum(&[1, 1]).unwrap(), 0);
        assert_eq!(alternating_sum(&[1, 2, 1, 3]).unwrap(), 3);
        assert_eq!(alternating_sum(&[2, 2, 1, 1]).unwrap(), 0);
    }

    #[test]
    fn alternating_sum_rejects_odd_and_empty() {
        assert!(alternating_sum(&[1, 2, 3]).is_err());
        assert!(alternating_sum(&[]).is_err());
    }

    #[test]
    fn vector_validation() {
        assert!(IndexVector::new(vec![0, 1], 3).is_err());
        assert!(IndexVector::new(vec![4, 1], 3).is_err());
        assert!(IndexVector::new(vec![1, 2, 3], 3).is_err());
        assert_eq!(iv(&[1, 2, 1, 3], 3).alt_sum(), 3);
    }

    #[test]
    fn pair_matching_examples() {
        let a = iv(&[1, 1, 3, 4], 4);
        assert!(!is_odd_even_pair_matched(&a));
        assert!(is_value_pair_matched(&a, 1));
        let b = iv(&[1, 2, 1, 3], 3);
        assert!(!is_value_pair_matched(&b, 1));
        assert!(is_odd_even_pair_matched(&iv(&[5, 5], 5)));
        assert!(!is_value_pair_matched(&a, 2));
    }

    #[test]
    fn multiset_totals() {
        let m = iv(&[1, 2, 1, 2, 2, 3], 3).multiset();
        assert_eq!(m.multiplicity(2), 3);
        assert_eq!(m.multiplicity(7), 0);
        assert_eq!(m.total(), 6);
    }

    proptest! {
        #[test]
        fn pair_matched_implies_zero_sum(
            n in 1u32..6,
            raw in proptest::collection::vec(1u32..6, 1..4),
            perm_seed in any::<u64>(),
        ) {
            // Build a matched tuple: each value once at an odd and once at an
            // even slot, arranged by a seeded shuffle of the even slots.
            let vals: Vec<u32> = raw.iter().map(|v| (v - 1) % n + 1).collect();
            let mut evens = vals.clone();
            let len = evens.len();
            let mut s = perm_seed;
            for i in (1..len).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                evens.swap(i, (s >> 33) as usize % (i + 1));
            }
            let mut e = Vec::with_capacity(2 * len);
            for (o, ev) in vals.iter().zip(&evens) {
                e.push(*o);
                e.push(*ev);
            }
            let v = IndexVector::new(e, n).unwrap();
            prop_assert!(is_odd_even_pair_matched(&v));
            prop_assert_eq!(v.alt_sum(), 0);
        }

        #[test]
        fn alt_sum_within_bounds(n in 1u32..20, e in proptest::collection::vec(1u32..20, 1..5)) {
            let mut e: Vec<u32> = e.into_iter().map(|v| (v - 1) % n + 1).collect();
            if e.len() % 2 == 1 { e.push(1); }
            let p = (e.len() / 2) as i64;
            let v = IndexVector::new(e, n).unwrap();
            prop_assert!(v.alt_sum().abs() <= p * (n as i64 - 1));
            prop_assert_eq!(v.multiset().total(), v.len());
        }
    }
}
