//! Caps on brute-force enumeration sizes.

use crate::error::{Error, Result};

/// Environment variable overriding every default budget.
pub const BUDGET_ENV: &str = "RC_FLUCT_BUDGET";

/// Maximum number of tuples a brute-force enumeration may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Budget {
    /// Default for index-set enumeration.
    pub const INDEX_DEFAULT: Budget = Budget(100_000_000);
    /// Default for exact moment oracles and for exact centering.
    pub const ORACLE_DEFAULT: Budget = Budget(10_000_000);

    /// `default` unless `RC_FLUCT_BUDGET` holds a valid integer.
    pub fn from_env_or(default: Budget) -> Budget {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().replace('_', "").parse::<u64>().ok())
            .map(Budget)
            .unwrap_or(default)
    }

    pub fn allows(&self, required: u128) -> bool {
        required <= self.0 as u128
    }

    pub fn check(&self, what: impl Into<String>, required: u128) -> Result<()> {
        if self.allows(required) {
            Ok(())
        } else {
            Err(Error::BudgetExceeded {
                what: what.into(),
                required,
                budget: self.0,
            })
        }
    }
}

/// `n^exp`, saturating at `u128::MAX`.
pub fn power_size(n: u64, exp: u32) -> u128 {
    (n as u128).checked_pow(exp).unwrap_or(u128::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_reports_bound() {
        let b = Budget(100);
        assert!(b.check("x", 100).is_ok());
        match b.check("A_4 at n=4", 256) {
            Err(Error::BudgetExceeded { required, budget, .. }) => {
                assert_eq!(required, 256);
                assert_eq!(budget, 100);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn power_size_saturates() {
        assert_eq!(power_size(8, 6), 262_144);
        assert_eq!(power_size(u64::MAX, 8), u128::MAX);
    }
}
