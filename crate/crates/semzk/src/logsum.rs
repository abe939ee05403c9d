//! Log-space accumulation for quadrature of exponentially weighted
//! integrands.
//!
//! Weighted norms like `||exp(alpha*phi) g||` overflow f64 long before the
//! parameter ranges of interest are reached (`alpha ~ R^(3/2)` with
//! `phi` up to ~25). Every such integral is therefore accumulated as a
//! running log-sum-exp of per-node exponents and only linearized on demand,
//! behind an explicit overflow guard.

use crate::error::{Error, Result};

/// Cap on exponents that may be linearized into an f64 (`exp(700)` is
/// still finite, `exp(710)` is not).
pub const EXP_CAP: f64 = 700.0;

/// Running log-sum-exp accumulator: represents `ln(sum of exp(e_i))`.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    sum: f64, // sum of exp(e_i - max)
}

impl LogSum {
    pub fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    /// Add a term `exp(e)`.
    pub fn push(&mut self, e: f64) {
        if e == f64::NEG_INFINITY {
            return;
        }
        if e <= self.max {
            self.sum += (e - self.max).exp();
        } else if self.max == f64::NEG_INFINITY {
            self.max = e;
            self.sum = 1.0;
        } else {
            self.sum = self.sum * (self.max - e).exp() + 1.0;
            self.max = e;
        }
    }

    /// Add a term `c * exp(e)` with `c >= 0`.
    pub fn push_scaled(&mut self, e: f64, c: f64) {
        if c > 0.0 {
            self.push(e + c.ln());
        }
    }

    /// Natural log of the accumulated sum; `-inf` when empty.
    pub fn ln_value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

/// `ln(exp(a) + exp(b))`.
pub fn ln_add(a: f64, b: f64) -> f64 {
    let mut s = LogSum::new();
    s.push(a);
    s.push(b);
    s.ln_value()
}

/// Linearize a log-scale value, failing (rather than silently clamping)
/// when it exceeds the overflow cap.
pub fn linearize(ln_value: f64) -> Result<f64> {
    if ln_value > EXP_CAP {
        Err(Error::OverflowGuard {
            exponent: ln_value,
            cap: EXP_CAP,
        })
    } else {
        Ok(ln_value.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum_in_representable_range() {
        let xs = [0.3, -1.2, 4.0, 2.2, 2.2];
        let mut acc = LogSum::new();
        for &x in &xs {
            acc.push(x);
        }
        let direct: f64 = xs.iter().map(|x| x.exp()).sum();
        assert!((acc.ln_value() - direct.ln()).abs() < 1e-13);
    }

    #[test]
    fn survives_huge_exponents() {
        let mut acc = LogSum::new();
        acc.push(100_000.0);
        acc.push(100_000.0 + (3.0f64).ln());
        assert!((acc.ln_value() - (100_000.0 + (4.0f64).ln())).abs() < 1e-10);
        assert!(linearize(acc.ln_value()).is_err());
    }

    #[test]
    fn empty_sum_is_log_zero() {
        assert_eq!(LogSum::new().ln_value(), f64::NEG_INFINITY);
    }
}
