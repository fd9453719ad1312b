//! Limiting covariance of the scaled, centered traces and the moments of
//! the limiting Gaussian family, in exact rational arithmetic.
//!
//! With `w_p = (Tr M^{2p} − E Tr M^{2p}) / √n` on the scaled matrix,
//!
//! ```text
//! σ_{p,q} = lim Cov(w_p, w_q) = Σ_{k=2}^{min(p,q)} c_k g(k) + (μ4 − 1) c_1
//! c_k     = C(p, p−k)² (p−k)! C(q, q−k)² (q−k)!
//! g(k)    = k!² / (2k−1)! Σ_{s=−(k−1)}^{k−1} (2 − 1{s=0}) Σ_{j=0}^{k+s−1} (−1)^j C(2k, j) (k+s−j)^{2k−1}
//! ```

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combin::{big_pow, binomial, factorial, integer, parse_rational};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// `c_k = C(p,p−k)² (p−k)! C(q,q−k)² (q−k)!`.
pub fn coefficient_c(p: u32, q: u32, k: u32) -> Result<BigInt> {
    if k == 0 || k > p.min(q) {
        return invalid(format!("k = {k} outside 1..=min(p, q) = {}", p.min(q)));
    }
    let side = |m: u32| {
        let b = binomial(m as u64, (m - k) as u64);
        &b * &b * factorial((m - k) as u64)
    };
    Ok(side(p) * side(q))
}

/// `g(k)`, evaluated term by term from its defining double sum.
pub fn g_function(k: u32) -> Result<BigRational> {
    if k == 0 {
        return invalid("g(k) needs k >= 1");
    }
    let k_i = k as i64;
    let kk = factorial(k as u64);
    let mut acc = BigInt::zero();
    for s in -(k_i - 1)..=(k_i - 1) {
        let weight = if s == 0 { 1 } else { 2 };
        let mut inner = BigInt::zero();
        for j in 0..=(k_i + s - 1) {
            let t = binomial(2 * k as u64, j as u64) * big_pow(k_i + s - j, 2 * k - 1);
            inner += if j % 2 == 0 { t } else { -t };
        }
        acc += inner * weight;
    }
    Ok(BigRational::new(acc * &kk * &kk, factorial(2 * k as u64 - 1)))
}

/// Inputs to `σ_{p,q}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovarianceParams {
    p: u32,
    q: u32,
    mu4: BigRational,
}

impl CovarianceParams {
    pub fn new(p: u32, q: u32, mu4: BigRational) -> Result<Self> {
        if p == 0 || q == 0 {
            return invalid("σ_{p,q} needs p, q >= 1 (w_0 is identically zero)");
        }
        if mu4 < BigRational::one() {
            return invalid(format!("fourth moment {mu4} below 1 is impossible when E x² = 1"));
        }
        Ok(Self { p, q, mu4 })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn mu4(&self) -> &BigRational {
        &self.mu4
    }
}

/// Limiting covariance `σ_{p,q}`. The `k = 1` pairing enters only through
/// the fourth-moment term.
pub fn sigma_pq(params: &CovarianceParams) -> BigRational {
    let (p, q) = (params.p, params.q);
    let mut total = BigRational::zero();
    for k in 2..=p.min(q) {
        let c = coefficient_c(p, q, k).expect("k in range");
        total += g_function(k).expect("k >= 2") * BigRational::from_integer(c);
    }
    let c1 = coefficient_c(p, q, 1).expect("k = 1 always in range");
    total + (&params.mu4 - BigRational::one()) * BigRational::from_integer(c1)
}

/// Convenience wrapper over [`sigma_pq`].
pub fn sigma(p: u32, q: u32, mu4: &BigRational) -> Result<BigRational> {
    Ok(sigma_pq(&CovarianceParams::new(p, q, mu4.clone())?))
}

/// `[σ_{p_i, p_j}]` for the given exponents.
pub fn sigma_matrix(ps: &[u32], mu4: &BigRational) -> Result<Vec<Vec<BigRational>>> {
    ps.iter()
        .map(|&a| ps.iter().map(|&b| sigma(a, b, mu4)).collect())
        .collect()
}

/// Smallest eigenvalue of a symmetric matrix given by rows.
pub fn min_eigenvalue(rows: &[Vec<f64>]) -> f64 {
    let d = rows.len();
    if d == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Even polynomial test function `Q(x) = Σ_{k=1}^d a_k x^{2k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialQ {
    coeffs: Vec<BigRational>,
}

impl PolynomialQ {
    /// `coeffs[k-1]` multiplies `x^{2k}`.
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self> {
        match coeffs.last() {
            None => invalid("Q needs at least one coefficient"),
            Some(top) if top.is_zero() => invalid("leading coefficient of Q must be nonzero"),
            _ => Ok(Self { coeffs }),
        }
    }

    pub fn degree_half(&self) -> u32 {
        self.coeffs.len() as u32
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(Scalar::to_f64).collect()
    }

    /// Exponents `1..=d` paired with their coefficients, skipping zeros.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| (i as u32 + 1, a))
    }
}

impl FromStr for PolynomialQ {
    type Err = Error;

    /// Comma-separated `a_1,…,a_d`, each an integer, fraction or decimal.
    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                parse_rational(t).ok_or_else(|| Error::InvalidArgument(format!("bad Q coefficient {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        PolynomialQ::new(coeffs)
    }
}

impl fmt::Display for PolynomialQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for PolynomialQ {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PolynomialQ {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Numbers(Vec<f64>),
        }
        let text = match Repr::deserialize(d)? {
            Repr::Text(t) => t,
            Repr::Numbers(v) => v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `σ_Q² = Σ_{ℓ,k} a_ℓ a_k σ_{ℓ,k}`.
pub fn sigma_q(q: &PolynomialQ, mu4: &BigRational) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for (l, al) in q.terms() {
        for (k, ak) in q.terms() {
            total += al * ak * sigma(l, k, mu4)?;
        }
    }
    Ok(total)
}

/// All pair partitions of `{0, …, l−1}`, each as a list of `(y, z)` with
/// `y < z`, ordered by first element. Empty for odd `l`.
pub fn pair_partitions(l: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(rest: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        let first = rest.remove(0);
        for i in 0..rest.len() {
            let partner = rest.remove(i);
            cur.push((first, partner));
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, partner);
        }
        rest.insert(0, first);
    }
    let mut out = Vec::new();
    if l.is_multiple_of(2) {
        rec(&mut (0..l).collect(), &mut Vec::new(), &mut out);
    }
    out
}

/// `E[N_{p_1} ⋯ N_{p_ℓ}]` for a centered Gaussian family with covariance
/// `sigma`: the sum over pair partitions of products of pair covariances.
/// Zero for odd `ℓ`; one for the empty product.
pub fn gaussian_family_moment<T: Scalar>(ps: &[u32], sigma: impl Fn(u32, u32) -> T) -> T {
    pair_partitions(ps.len())
        .into_iter()
        .map(|pi| {
            pi.into_iter()
                .fold(T::one(), |acc, (y, z)| acc * sigma(ps[y], ps[z]))
        })
        .fold(T::zero(), |acc, term| acc + term)
}

/// Gaussian-family moment under the exact `σ_{p,q}` for the given `μ4`.
pub fn limiting_mixed_moment(ps: &[u32], mu4: &BigRational) -> Result<BigRational> {
    CovarianceParams::new(1, 1, mu4.clone())?;
    if ps.contains(&0) {
        return invalid("exponents must be at least 1");
    }
    Ok(gaussian_family_moment(ps, |a, b| sigma(a, b, mu4).expect("validated")))
}

/// `true` when an exact covariance value is negative (used to flag broken
/// semidefiniteness in reports).
pub fn is_negative(v: &BigRational) -> bool {
    v.is_negative()
}

pub fn gaussian_mu4() -> BigRational {
    integer(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::rational;
    use crate::index::limit_ratio;

    #[test]
    fn coefficient_examples() {
        assert_eq!(coefficient_c(1, 1, 1).unwrap(), BigInt::from(1));
        assert_eq!(coefficient_c(2, 2, 1).unwrap(), BigInt::from(16));
        assert_eq!(coefficient_c(2, 1, 1).unwrap(), BigInt::from(4));
        assert!(coefficient_c(2, 1, 2).is_err());
        assert!(coefficient_c(2, 2, 0).is_err());
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_function(1).unwrap(), rational(1, 1));
        assert_eq!(g_function(2).unwrap(), rational(16, 3));
        assert!(g_function(0).is_err());
    }

    #[test]
    fn g_matches_limit_ratios() {
        for k in 1..=6u32 {
            let kf = BigRational::from_integer(factorial(k as u64));
            let sum: BigRational = (-(k as i64 - 1)..=(k as i64 - 1))
                .map(|s| limit_ratio(k, s).unwrap() * integer(if s == 0 { 1 } else { 2 }))
                .sum();
            assert_eq!(g_function(k).unwrap(), &kf * &kf * sum, "k={k}");
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(1, 1, &integer(3)).unwrap(), integer(2));
        assert_eq!(sigma(1, 1, &integer(1)).unwrap(), integer(0));
        assert_eq!(sigma(2, 2, &integer(3)).unwrap(), rational(112, 3));
        assert_eq!(sigma(1, 2, &integer(3)).unwrap(), integer(8));
    }

    #[test]
    fn params_validation() {
        assert!(CovarianceParams::new(0, 1, integer(3)).is_err());
        assert!(CovarianceParams::new(1, 1, rational(1, 2)).is_err());
    }

    #[test]
    fn sigma_q_examples() {
        let q: PolynomialQ = "1".parse().unwrap();
        assert_eq!(sigma_q(&q, &integer(3)).unwrap(), integer(2));
        let q: PolynomialQ = "1,1".parse().unwrap();
        assert_eq!(sigma_q(&q, &integer(3)).unwrap(), rational(166, 3));
        assert!("0".parse::<PolynomialQ>().is_err());
        assert!(PolynomialQ::new(vec![]).is_err());
        let q: PolynomialQ = "0,1/2".parse().unwrap();
        assert_eq!(sigma_q(&q, &integer(3)).unwrap(), rational(112, 12));
    }

    #[test]
    fn polynomial_serde() {
        let q: PolynomialQ = serde_json::from_str("\"1,1/2\"").unwrap();
        assert_eq!(q.coeffs(), &[integer(1), rational(1, 2)]);
        let q: PolynomialQ = serde_json::from_str("[1, 0.5]").unwrap();
        assert_eq!(q.coeffs(), &[integer(1), rational(1, 2)]);
        assert_eq!(serde_json::to_string(&q).unwrap(), "\"1,1/2\"");
    }

    #[test]
    fn pair_partition_counts() {
        // (l-1)!!
        let expected = [1usize, 0, 1, 0, 3, 0, 15, 0, 105];
        for (l, &e) in expected.iter().enumerate() {
            assert_eq!(pair_partitions(l).len(), e, "l={l}");
        }
    }

    #[test]
    fn wick_examples() {
        let mu4 = integer(3);
        assert_eq!(limiting_mixed_moment(&[1, 1], &mu4).unwrap(), integer(2));
        assert_eq!(limiting_mixed_moment(&[1, 1, 1], &mu4).unwrap(), integer(0));
        assert_eq!(limiting_mixed_moment(&[1, 1, 1, 1], &mu4).unwrap(), integer(12));
        let f = gaussian_family_moment(&[1, 1, 1, 1], |_, _| 2.0f64);
        assert_eq!(f, 12.0);
    }

    /// Pairing recursion: m(ps) = Σ_j σ(p_1, p_j) m(ps without 1 and j).
    fn wick_recursive(ps: &[u32], sigma: &dyn Fn(u32, u32) -> BigRational) -> BigRational {
        if ps.is_empty() {
            return integer(1);
        }
        if ps.len() % 2 == 1 {
            return integer(0);
        }
        let mut total = integer(0);
        for j in 1..ps.len() {
            let rest: Vec<u32> = ps
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != 0 && i != j)
                .map(|(_, &p)| p)
                .collect();
            total += sigma(ps[0], ps[j]) * wick_recursive(&rest, sigma);
        }
        total
    }

    #[test]
    fn wick_recursion_agrees_with_enumeration() {
        let mu4 = rational(9, 5);
        let sig = |a: u32, b: u32| sigma(a, b, &mu4).unwrap();
        let patterns: [&[u32]; 6] = [
            &[1, 2],
            &[1, 2, 3, 1],
            &[2, 2, 1, 3, 1, 2],
            &[1, 1, 1, 1, 2, 2, 3, 3],
            &[3, 1, 2, 1, 2, 3, 1, 2],
            &[1, 2, 3, 4, 1, 2, 3],
        ];
        for ps in patterns {
            assert_eq!(gaussian_family_moment(ps, sig), wick_recursive(ps, &sig), "{ps:?}");
        }
    }

    #[test]
    fn fourth_moment_identity() {
        for mu4 in [integer(1), rational(9, 5), integer(3), integer(9)] {
            for p in 1..=4u32 {
                let s = sigma(p, p, &mu4).unwrap();
                assert_eq!(limiting_mixed_moment(&[p; 4], &mu4).unwrap(), integer(3) * &s * &s);
            }
        }
    }

    #[test]
    fn symmetry_and_psd() {
        for mu4 in [integer(1), rational(9, 5), integer(3), integer(9)] {
            for p in 1..=6u32 {
                assert!(!is_negative(&sigma(p, p, &mu4).unwrap()));
                for q in 1..=6u32 {
                    assert_eq!(sigma(p, q, &mu4).unwrap(), sigma(q, p, &mu4).unwrap());
                }
            }
        }
        for mu4 in [integer(1), integer(3), integer(9)] {
            for d in 1..=4u32 {
                let ps: Vec<u32> = (1..=d).collect();
                let m = sigma_matrix(&ps, &mu4).unwrap();
                let f: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect();
                assert!(min_eigenvalue(&f) >= -1e-9, "d={d} mu4={mu4}");
            }
        }
    }
}
