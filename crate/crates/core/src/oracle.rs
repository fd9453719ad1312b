//! Exact finite-n expectations and covariances of the trace statistics.
//!
//! Entries are independent, so `E Π x_{i_k}` factorizes over distinct
//! values into moments at their multiplicities. Enumeration runs over the
//! mod-n index set `A_{2p}`; tuples are bucketed by multiplicity signature
//! so rational arithmetic happens once per signature.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::budget::{power_size, Budget};
use crate::combin::big_pow;
use crate::error::{invalid, Result};
use crate::index::{enumerate_a, IndexMultiset, IndexVector, Selection};
use crate::model::MomentProfile;

/// Sorted multiplicities of the distinct values in a tuple.
type Signature = Vec<u8>;

fn signature(m: &IndexMultiset) -> Signature {
    let mut sig: Signature = m.iter().map(|(_, k)| k as u8).collect();
    sig.sort_unstable();
    sig
}

fn signature_moment(sig: &[u8], moments: &MomentProfile) -> Result<BigRational> {
    if sig.contains(&1) {
        return Ok(BigRational::zero());
    }
    let mut acc = BigRational::one();
    for &k in sig {
        match moments.mu_ref(k as usize) {
            Some(mu) => acc *= mu,
            None => {
                return invalid(format!(
                    "moment of order {k} needed but the profile stops at {}",
                    moments.order()
                ))
            }
        }
    }
    Ok(acc)
}

/// `E Π x_{v_k}` for independent entries: `Π_v μ_{mult(v)}`. Zero as soon as
/// some value occurs once.
pub fn moment_of_product(entries: &[u32], moments: &MomentProfile) -> Result<BigRational> {
    signature_moment(&signature(&IndexMultiset::from_entries(entries)), moments)
}

fn check(what: &str, n: u32, exp: u32, budget: Budget) -> Result<()> {
    budget.check(what, power_size(n as u64, exp))
}

fn collect_mod_n(n: u32, p: u32) -> Result<Vec<IndexVector>> {
    // Budget already checked by the caller against the full tuple space.
    Ok(enumerate_a(n, 2 * p as usize, Selection::mod_n(), Budget(u64::MAX))?.collect())
}

fn scale(n: u32, exponent: i64) -> BigRational {
    let nn = big_pow(n as i64, exponent.unsigned_abs() as u32);
    if exponent >= 0 {
        BigRational::from_integer(nn)
    } else {
        BigRational::new(BigInt::one(), nn)
    }
}

/// `E Tr M^{2p} = n^{1−p} Σ_{A_{2p}} E Π x`.
pub fn exact_expected_trace(n: u32, p: u32, moments: &MomentProfile, budget: Budget) -> Result<BigRational> {
    if n == 0 || p == 0 {
        return invalid("exact_expected_trace needs n, p >= 1");
    }
    check("exact expected trace", n, 2 * p, budget)?;
    let mut counts: HashMap<Signature, u64> = HashMap::new();
    for v in enumerate_a(n, 2 * p as usize, Selection::mod_n(), Budget(u64::MAX))? {
        let sig = signature(&v.multiset());
        if !sig.contains(&1) {
            *counts.entry(sig).or_insert(0) += 1;
        }
    }
    let mut total = BigRational::zero();
    for (sig, c) in counts {
        total += signature_moment(&sig, moments)? * BigInt::from(c);
    }
    Ok(total * scale(n, 1 - p as i64))
}

#[derive(Default)]
struct PairTally {
    joint: HashMap<Signature, u64>,
    product: HashMap<(usize, usize), u64>,
}

impl PairTally {
    fn merge(mut self, other: PairTally) -> PairTally {
        for (k, c) in other.joint {
            *self.joint.entry(k).or_insert(0) += c;
        }
        for (k, c) in other.product {
            *self.product.entry(k).or_insert(0) += c;
        }
        self
    }
}

/// Exact `Cov(w_p, w_q) = n^{1−p−q} Σ_{J ∈ A_{2p}, K ∈ A_{2q}} (E x_J x_K − E x_J E x_K)`.
/// Pairs sharing no value contribute zero by independence and are skipped.
pub fn exact_cov_w(n: u32, p: u32, q: u32, moments: &MomentProfile, budget: Budget) -> Result<BigRational> {
    if n == 0 || p == 0 || q == 0 {
        return invalid("exact_cov_w needs n, p, q >= 1");
    }
    check("exact covariance", n, 2 * (p + q), budget)?;
    let js = collect_mod_n(n, p)?;
    let ks = if p == q { js.clone() } else { collect_mod_n(n, q)? };

    // Distinct single-vector signatures, indexed, for the product term.
    let mut sig_ids: HashMap<Signature, usize> = HashMap::new();
    let mut sigs: Vec<Signature> = Vec::new();
    let mut id_of = |m: &IndexMultiset| {
        let s = signature(m);
        *sig_ids.entry(s.clone()).or_insert_with(|| {
            sigs.push(s);
            sigs.len() - 1
        })
    };
    let j_sets: Vec<(IndexMultiset, usize)> = js.iter().map(|v| v.multiset()).map(|m| { let id = id_of(&m); (m, id) }).collect();
    let k_sets: Vec<(IndexMultiset, usize)> = ks.iter().map(|v| v.multiset()).map(|m| { let id = id_of(&m); (m, id) }).collect();

    let tally = j_sets
        .par_iter()
        .fold(PairTally::default, |mut t, (jm, jid)| {
            for (km, kid) in &k_sets {
                if !jm.values().any(|v| km.contains(v)) {
                    continue;
                }
                let mut joint = jm.clone();
                joint.absorb(km);
                let sig = signature(&joint);
                if !sig.contains(&1) {
                    *t.joint.entry(sig).or_insert(0) += 1;
                }
                *t.product.entry((*jid, *kid)).or_insert(0) += 1;
            }
            t
        })
        .reduce(PairTally::default, PairTally::merge);

    let single: Vec<BigRational> = sigs.iter().map(|s| signature_moment(s, moments)).collect::<Result<_>>()?;
    let mut total = BigRational::zero();
    for (sig, c) in tally.joint {
        total += signature_moment(&sig, moments)? * BigInt::from(c);
    }
    for ((a, b), c) in tally.product {
        total -= &single[a] * &single[b] * BigInt::from(c);
    }
    Ok(total * scale(n, 1 - p as i64 - q as i64))
}
