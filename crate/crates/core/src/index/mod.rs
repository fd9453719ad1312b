//! Alternating-sum constrained index tuples and their matching structure.
//!
//! A tuple `(i_1, …, i_{2p})` with entries in `1..=n` enters the trace
//! formula `Tr M^{2p} = n Σ_{A_{2p}} X_{i_1}⋯X_{i_{2p}}` when its alternating
//! sum `Σ (-1)^k i_k` vanishes modulo `n`. This module is the brute-force
//! layer every other module is checked against.

mod cluster;
mod count;
mod enumerate;
mod vector;

pub use cluster::{
    are_connected, cluster_ratio_scan, collect_b, count_b, cross_multiplicity,
    partition_into_clusters, ClusterPartition, ClusterRatio,
};
pub use count::{count_a_s_closed_form, limit_ratio};
pub use enumerate::{count_a, enumerate_a, AIter, Distinctness, Selection, SumConstraint};
pub use vector::{
    alternating_sum, is_odd_even_pair_matched, is_value_pair_matched, IndexMultiset, IndexVector,
};
