//! Exact factorials and binomial coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `C(n, k)` by the multiplicative formula; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn big_pow(base: i64, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

pub fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn integer(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// Parse `"3"`, `"-9/5"` or `"0.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int.trim() {
            "" | "-" | "+" => BigInt::zero(),
            s => s.parse().ok()?,
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part: BigInt = frac.parse().ok()?;
        let magnitude = num_traits::Signed::abs(&int_part) * &scale + frac_part;
        let num = if negative { -magnitude } else { magnitude };
        return Some(BigRational::new(num, scale));
    }
    t.parse::<BigInt>().ok().map(BigRational::from_integer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pascal_values() {
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(5, 0), BigInt::from(1));
        assert_eq!(binomial(5, 5), BigInt::from(1));
        assert_eq!(binomial(3, 4), BigInt::zero());
        assert_eq!(
            binomial(100, 49),
            "98913082887808032681188722800".parse::<BigInt>().unwrap()
        );
    }

    #[test]
    fn binomial_matches_factorial_ratio() {
        for n in 0..25u64 {
            for k in 0..=n {
                let direct = factorial(n) / (factorial(k) * factorial(n - k));
                assert_eq!(binomial(n, k), direct, "C({n},{k})");
            }
        }
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3"), Some(integer(3)));
        assert_eq!(parse_rational(" -9/5 "), Some(rational(-9, 5)));
        assert_eq!(parse_rational("0.25"), Some(rational(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(rational(-3, 2)));
        assert_eq!(parse_rational("-.5"), Some(rational(-1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1."), None);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(10), BigInt::from(3_628_800));
    }
}
