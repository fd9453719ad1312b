use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::combin::{big_pow, binomial, factorial};
use crate::error::{invalid, Result};

/// Closed-form `|A_{2p,s}|`:
/// `Σ_{k=0}^{p+s-1} (-1)^k C(2p,k) C((p+s-k)n + p - 1, 2p - 1)`.
pub fn count_a_s_closed_form(n: u64, p: u32, s: i64) -> Result<BigInt> {
    if p == 0 {
        return invalid("p must be at least 1");
    }
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let p_i = p as i64;
    if s.abs() > p_i - 1 {
        return invalid(format!("s = {s} outside [-(p-1), p-1] for p = {p}"));
    }
    let mut total = BigInt::zero();
    for k in 0..(p_i + s) {
        // k < p + s, so the upper argument is at least n + p - 1 >= 0.
        let upper = (p_i + s - k) as u64 * n + p as u64 - 1;
        let term = binomial(2 * p as u64, k as u64) * binomial(upper, 2 * p as u64 - 1);
        if k % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// `lim |A_{2k,s}| / n^{2k-1} = (1/(2k-1)!) Σ_{j=0}^{k+s-1} (-1)^j C(2k,j) (k+s-j)^{2k-1}`.
pub fn limit_ratio(k: u32, s: i64) -> Result<BigRational> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    let k_i = k as i64;
    if s.abs() >= k_i {
        return invalid(format!("|s| = {} must be below k = {k}", s.abs()));
    }
    let mut sum = BigInt::zero();
    for j in 0..(k_i + s) {
        let term = binomial(2 * k as u64, j as u64) * big_pow(k_i + s - j, 2 * k - 1);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(BigRational::new(sum, factorial(2 * k as u64 - 1)))
}
