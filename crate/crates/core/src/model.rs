//! The `(n, θ)` Bernoulli sparsity model and the per-row probabilities every
//! other module is written in terms of.

use crate::{Error, Result};

/// Entries of an `n × p` matrix are nonzero independently with probability `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityModel {
    n: usize,
    theta: f64,
}

impl SparsityModel {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        // Written this way so NaN is rejected too.
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidTheta(theta));
        }
        Ok(Self { n, theta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `ln(1 - θ)`; `-inf` at θ = 1.
    pub fn log_miss(&self) -> f64 {
        (-self.theta).ln_1p()
    }

    /// Probability that one row stays all-zero over `k` columns, `(1 - θ)^k`.
    ///
    /// Short powers use `powi` so dyadic inputs stay exact; longer ones go through
    /// `exp(k · ln(1 - θ))`, which underflows cleanly instead of accumulating error.
    pub fn row_miss(&self, k: u64) -> f64 {
        if k == 0 {
            return 1.0;
        }
        if self.theta == 1.0 {
            return 0.0;
        }
        if k <= 32 {
            (1.0 - self.theta).powi(k as i32)
        } else {
            (k as f64 * self.log_miss()).exp()
        }
    }

    /// Probability that one row has at least one nonzero among `k` columns.
    pub fn row_hit(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if self.theta == 1.0 {
            return 1.0;
        }
        let miss = self.row_miss(k);
        if miss < 0.5 {
            1.0 - miss
        } else {
            -(k as f64 * self.log_miss()).exp_m1()
        }
    }

    /// `ln(row_hit(k))`, accurate at both ends of the range.
    pub fn log_row_hit(&self, k: u64) -> f64 {
        let miss = self.row_miss(k);
        if miss < 0.5 {
            (-miss).ln_1p()
        } else {
            self.row_hit(k).ln()
        }
    }
}
