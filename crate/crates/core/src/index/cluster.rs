use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::enumerate::{enumerate_a, Selection};
use super::vector::IndexVector;
use crate::budget::{power_size, Budget};
use crate::error::{invalid, Result};

/// `S_J ∩ S_K ≠ ∅`.
pub fn are_connected<J: AsRef<[u32]>, K: AsRef<[u32]>>(j: J, k: K) -> bool {
    let k = k.as_ref();
    j.as_ref().iter().any(|v| k.contains(v))
}

/// Number of the vectors whose multiset contains `value`.
pub fn cross_multiplicity<V: AsRef<[u32]>>(vectors: &[V], value: u32) -> usize {
    vectors.iter().filter(|v| v.as_ref().contains(&value)).count()
}

/// Maximal connected groups of vectors under shared-value connectivity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    /// Each cluster lists vector positions in ascending order; clusters are
    /// ordered by their smallest member.
    pub clusters: Vec<Vec<usize>>,
    /// Value → number of vectors containing it.
    pub cross_multiplicity: BTreeMap<u32, usize>,
}

impl ClusterPartition {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn is_single_cluster(&self) -> bool {
        self.clusters.len() == 1
    }

    pub fn cluster_of(&self, vector: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(&vector))
    }

    /// Values appearing in two or more vectors.
    pub fn cross_matched(&self) -> impl Iterator<Item = u32> + '_ {
        self.cross_multiplicity
            .iter()
            .filter(|(_, &m)| m >= 2)
            .map(|(&v, _)| v)
    }
}

/// Connected components of the connectivity graph, found by breadth-first
/// search over pairwise [`are_connected`] edges.
pub fn partition_into_clusters<V: AsRef<[u32]>>(vectors: &[V]) -> Result<ClusterPartition> {
    if vectors.is_empty() {
        return invalid("cluster partition needs at least one vector");
    }
    let m = vectors.len();
    let mut seen = vec![false; m];
    let mut clusters = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for b in 0..m {
                if !seen[b] && are_connected(vectors[a].as_ref(), vectors[b].as_ref()) {
                    seen[b] = true;
                    members.push(b);
                    queue.push_back(b);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }

    let mut cross = BTreeMap::new();
    for v in vectors {
        let distinct: BTreeSet<u32> = v.as_ref().iter().copied().collect();
        for value in distinct {
            *cross.entry(value).or_insert(0) += 1;
        }
    }
    Ok(ClusterPartition { clusters, cross_multiplicity: cross })
}

fn validate_shape(lengths: &[usize]) -> Result<()> {
    if lengths.len() < 2 {
        return invalid("cluster counts need at least two vectors");
    }
    if let Some(bad) = lengths.iter().find(|&&l| l < 2 || l % 2 != 0) {
        return invalid(format!("vector lengths must be even and at least 2, got {bad}"));
    }
    Ok(())
}

fn domain_size(n: u32, lengths: &[usize]) -> u128 {
    let total: u32 = lengths.iter().map(|&l| l as u32).sum();
    power_size(n as u64, total)
}

/// Shared depth-first walk over `A_{2p_1} × … × A_{2p_ℓ}` keeping running
/// value multiplicities; calls `leaf` on every tuple that forms a single
/// cluster with all multiplicities at least two.
struct BWalk<'a> {
    sets: &'a [Vec<IndexVector>],
    counts: Vec<u32>,
    chosen: Vec<usize>,
}

impl<'a> BWalk<'a> {
    fn new(n: u32, sets: &'a [Vec<IndexVector>]) -> Self {
        Self {
            sets,
            counts: vec![0; n as usize + 1],
            chosen: Vec::with_capacity(sets.len()),
        }
    }

    fn push(&mut self, level: usize, idx: usize) {
        for &v in self.sets[level][idx].entries() {
            self.counts[v as usize] += 1;
        }
        self.chosen.push(idx);
    }

    fn pop(&mut self, level: usize) {
        let idx = self.chosen.pop().expect("walk stack underflow");
        for &v in self.sets[level][idx].entries() {
            self.counts[v as usize] -= 1;
        }
    }

    fn leaf_ok(&self) -> bool {
        if self.counts.contains(&1) {
            return false;
        }
        // Single cluster: union vectors through shared values.
        let l = self.chosen.len();
        let mut parent: Vec<usize> = (0..l).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut owner: Vec<Option<usize>> = vec![None; self.counts.len()];
        for (level, &idx) in self.chosen.iter().enumerate() {
            for &v in self.sets[level][idx].entries() {
                match owner[v as usize] {
                    None => owner[v as usize] = Some(level),
                    Some(o) => {
                        let (a, b) = (find(&mut parent, o), find(&mut parent, level));
                        parent[a] = b;
                    }
                }
            }
        }
        let root = find(&mut parent, 0);
        (1..l).all(|i| find(&mut parent, i) == root)
    }

    fn walk(&mut self, level: usize, leaf: &mut dyn FnMut(&[usize])) {
        if level == self.sets.len() {
            if self.leaf_ok() {
                leaf(&self.chosen);
            }
            return;
        }
        for idx in 0..self.sets[level].len() {
            self.push(level, idx);
            self.walk(level + 1, leaf);
            self.pop(level);
        }
    }
}

fn materialize(n: u32, lengths: &[usize]) -> Result<Vec<Vec<IndexVector>>> {
    lengths
        .iter()
        .map(|&l| Ok(enumerate_a(n, l, Selection::mod_n(), Budget(u64::MAX))?.collect()))
        .collect()
}

/// `|B_{P_ℓ}|`: tuples `(J_1, …, J_ℓ) ∈ A_{2p_1} × … × A_{2p_ℓ}` that form a
/// single cluster and in which every value has total multiplicity at least
/// two. `lengths` holds `(2p_1, …, 2p_ℓ)`.
pub fn count_b(n: u32, lengths: &[usize], budget: Budget) -> Result<BigInt> {
    validate_shape(lengths)?;
    if n == 0 {
        return invalid("n must be at least 1");
    }
    budget.check(format!("B_P enumeration for P = {lengths:?} at n = {n}"), domain_size(n, lengths))?;
    let sets = materialize(n, lengths)?;
    let total: u64 = (0..sets[0].len())
        .into_par_iter()
        .map(|first| {
            let mut walk = BWalk::new(n, &sets);
            let mut hits = 0u64;
            walk.push(0, first);
            walk.walk(1, &mut |_| hits += 1);
            hits
        })
        .sum();
    Ok(BigInt::from(total))
}

/// Every member of `B_{P_ℓ}`, lexicographic in `(J_1, …, J_ℓ)`.
pub fn collect_b(n: u32, lengths: &[usize], budget: Budget) -> Result<Vec<Vec<IndexVector>>> {
    validate_shape(lengths)?;
    if n == 0 {
        return invalid("n must be at least 1");
    }
    budget.check(format!("B_P enumeration for P = {lengths:?} at n = {n}"), domain_size(n, lengths))?;
    let sets = materialize(n, lengths)?;
    let mut out = Vec::new();
    let mut walk = BWalk::new(n, &sets);
    walk.walk(0, &mut |chosen| {
        out.push(
            chosen
                .iter()
                .enumerate()
                .map(|(level, &idx)| sets[level][idx].clone())
                .collect(),
        );
    });
    Ok(out)
}

/// One row of a scaling scan: `|B_P| / n^{Σp_i − ℓ/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRatio {
    pub n: u32,
    pub count: BigInt,
    pub ratio: f64,
}

pub fn cluster_ratio_scan(lengths: &[usize], n_values: &[u32], budget: Budget) -> Result<Vec<ClusterRatio>> {
    validate_shape(lengths)?;
    let half_sum: f64 = lengths.iter().map(|&l| (l / 2) as f64).sum();
    let exponent = half_sum - lengths.len() as f64 / 2.0;
    n_values
        .iter()
        .map(|&n| {
            let count = count_b(n, lengths, budget)?;
            let ratio = count.to_f64().unwrap_or(f64::INFINITY) / (n as f64).powf(exponent);
            Ok(ClusterRatio { n, count, ratio })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(e: &[u32], n: u32) -> IndexVector {
        IndexVector::new(e.to_vec(), n).unwrap()
    }

    #[test]
    fn connectivity_examples() {
        assert!(are_connected([1, 1], [1, 2, 3, 4]));
        assert!(!are_connected([1, 1], [2, 2]));
        assert!(are_connected([1, 2, 1, 2], [2, 3, 4, 5]));
    }

    #[test]
    fn cross_multiplicity_examples() {
        assert_eq!(cross_multiplicity(&[vec![1, 1], vec![1, 2, 3, 2]], 1), 2);
        assert_eq!(cross_multiplicity(&[vec![1, 1], vec![2, 2]], 1), 1);
        assert_eq!(
            cross_multiplicity(&[vec![1, 2, 1, 2], vec![2, 2], vec![2, 3, 3, 2]], 2),
            3
        );
    }

    #[test]
    fn partition_examples() {
        let p = partition_into_clusters(&[iv(&[1, 1], 3), iv(&[1, 2, 2, 1], 3), iv(&[3, 3], 3)]).unwrap();
        assert_eq!(p.clusters, vec![vec![0, 1], vec![2]]);
        assert_eq!(p.cross_matched().collect::<Vec<_>>(), vec![1]);

        let p = partition_into_clusters(&[iv(&[1, 1], 1)]).unwrap();
        assert_eq!(p.clusters, vec![vec![0]]);

        let p = partition_into_clusters(&[
            iv(&[1, 2, 1, 2], 4),
            iv(&[2, 3, 3, 2], 4),
            iv(&[3, 4, 4, 3], 4),
        ])
        .unwrap();
        assert!(p.is_single_cluster());
        assert_eq!(p.cross_multiplicity[&2], 2);
        assert_eq!(p.cross_multiplicity[&4], 1);

        assert!(partition_into_clusters::<Vec<u32>>(&[]).is_err());
    }

    #[test]
    fn count_b_examples() {
        let b = Budget::INDEX_DEFAULT;
        assert_eq!(count_b(1, &[2, 2], b).unwrap(), BigInt::from(1));
        assert_eq!(count_b(2, &[2, 2], b).unwrap(), BigInt::from(2));
        assert_eq!(count_b(3, &[2, 2, 2], b).unwrap(), BigInt::from(3));
    }

    #[test]
    fn count_b_errors() {
        assert!(count_b(3, &[2], Budget::INDEX_DEFAULT).is_err());
        assert!(count_b(3, &[2, 3], Budget::INDEX_DEFAULT).is_err());
        assert!(count_b(10, &[4, 4], Budget(1000)).is_err());
    }

    #[test]
    fn collect_matches_count() {
        for n in 1..=4u32 {
            for shape in [vec![2, 2], vec![2, 4], vec![4, 4], vec![2, 2, 2]] {
                let members = collect_b(n, &shape, Budget::INDEX_DEFAULT).unwrap();
                assert_eq!(BigInt::from(members.len()), count_b(n, &shape, Budget::INDEX_DEFAULT).unwrap());
                for m in &members {
                    assert!(partition_into_clusters(m).unwrap().is_single_cluster());
                }
            }
        }
    }

    #[test]
    fn ratio_scan_small() {
        let rows = cluster_ratio_scan(&[2, 2, 2], &[1, 4], Budget::INDEX_DEFAULT).unwrap();
        assert_eq!(rows[0].ratio, 1.0);
        assert!((rows[1].ratio - 0.5).abs() < 1e-15);
    }
}
