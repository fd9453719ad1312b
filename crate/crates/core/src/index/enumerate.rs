use rayon::prelude::*;

use super::vector::{signed_sum, IndexVector};
use crate::budget::{power_size, Budget};
use crate::error::{invalid, Result};

/// Which alternating-sum constraint a tuple must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumConstraint {
    /// `alt_sum ≡ 0 (mod n)`.
    ModN,
    /// `alt_sum == s * n`.
    Exact(i64),
}

/// Distinctness requirement of the primed sets `A'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distinctness {
    Any,
    /// All entries pairwise distinct.
    Pairwise,
    /// Only neighbouring entries differ.
    Consecutive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub constraint: SumConstraint,
    pub distinct: Distinctness,
}

impl Selection {
    /// `A_{2p}`.
    pub fn mod_n() -> Self {
        Self { constraint: SumConstraint::ModN, distinct: Distinctness::Any }
    }

    /// `A_{2p,s}`.
    pub fn exact_sum(s: i64) -> Self {
        Self { constraint: SumConstraint::Exact(s), distinct: Distinctness::Any }
    }

    /// `A'_{2p}` (pairwise distinct).
    pub fn distinct() -> Self {
        Self { constraint: SumConstraint::ModN, distinct: Distinctness::Pairwise }
    }

    /// `A'_{2p,s}` (pairwise distinct).
    pub fn distinct_exact_sum(s: i64) -> Self {
        Self { constraint: SumConstraint::Exact(s), distinct: Distinctness::Pairwise }
    }

    /// Same constraint, consecutive-distinct reading of `A'`.
    pub fn consecutive(self) -> Self {
        Self { distinct: Distinctness::Consecutive, ..self }
    }

    fn accepts_distinctness(&self, e: &[u32]) -> bool {
        match self.distinct {
            Distinctness::Any => true,
            Distinctness::Consecutive => e.windows(2).all(|w| w[0] != w[1]),
            Distinctness::Pairwise => {
                let mut sorted = e.to_vec();
                sorted.sort_unstable();
                sorted.windows(2).all(|w| w[0] != w[1])
            }
        }
    }
}

/// Lexicographic stream of tuples selected by [`Selection`].
///
/// The first `2p - 1` coordinates run through an odometer; the last one is
/// solved from the constraint, so at most one candidate exists per prefix
/// and the stream stays in lexicographic order.
#[derive(Debug, Clone)]
pub struct AIter {
    n: u32,
    selection: Selection,
    prefix: Vec<u32>,
    first_end: u32,
    done: bool,
}

impl AIter {
    fn new(n: u32, two_p: usize, selection: Selection, first: std::ops::RangeInclusive<u32>) -> Self {
        let mut prefix = vec![1u32; two_p - 1];
        prefix[0] = *first.start();
        Self {
            n,
            selection,
            prefix,
            first_end: *first.end(),
            done: first.is_empty(),
        }
    }

    fn advance(&mut self) {
        for pos in (0..self.prefix.len()).rev() {
            let limit = if pos == 0 { self.first_end } else { self.n };
            if self.prefix[pos] < limit {
                self.prefix[pos] += 1;
                return;
            }
            self.prefix[pos] = 1;
        }
        self.done = true;
    }

    fn complete(&self) -> Option<u32> {
        let n = self.n as i64;
        // The last slot has even position, so it enters with a plus sign.
        let partial = signed_sum(&self.prefix);
        let last = match self.selection.constraint {
            SumConstraint::ModN => {
                let r = (-partial).rem_euclid(n);
                if r == 0 {
                    n
                } else {
                    r
                }
            }
            SumConstraint::Exact(s) => s * n - partial,
        };
        (1..=n).contains(&last).then_some(last as u32)
    }
}

impl Iterator for AIter {
    type Item = IndexVector;

    fn next(&mut self) -> Option<IndexVector> {
        while !self.done {
            let candidate = self.complete().map(|last| {
                let mut e = Vec::with_capacity(self.prefix.len() + 1);
                e.extend_from_slice(&self.prefix);
                e.push(last);
                e
            });
            self.advance();
            if let Some(e) = candidate {
                if self.selection.accepts_distinctness(&e) {
                    return Some(IndexVector::from_checked(e));
                }
            }
        }
        None
    }
}

fn validate(n: u32, two_p: usize) -> Result<()> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if two_p < 2 || !two_p.is_multiple_of(2) {
        return invalid(format!("tuple length must be even and at least 2, got {two_p}"));
    }
    Ok(())
}

/// Stream every tuple of `{1..n}^{two_p}` satisfying `selection`, in
/// lexicographic order. The brute-force domain `n^{two_p}` must fit the
/// budget.
pub fn enumerate_a(n: u32, two_p: usize, selection: Selection, budget: Budget) -> Result<AIter> {
    validate(n, two_p)?;
    budget.check(
        format!("enumeration of length-{two_p} tuples over 1..={n}"),
        power_size(n as u64, two_p as u32),
    )?;
    Ok(AIter::new(n, two_p, selection, 1..=n))
}

/// Number of tuples [`enumerate_a`] would yield, counted in parallel over
/// the first coordinate.
pub fn count_a(n: u32, two_p: usize, selection: Selection, budget: Budget) -> Result<u64> {
    validate(n, two_p)?;
    budget.check(
        format!("enumeration of length-{two_p} tuples over 1..={n}"),
        power_size(n as u64, two_p as u32),
    )?;
    if two_p == 2 {
        return Ok(AIter::new(n, two_p, selection, 1..=n).count() as u64);
    }
    Ok((1..=n)
        .into_par_iter()
        .map(|first| AIter::new(n, two_p, selection, first..=first).count() as u64)
        .sum())
}
