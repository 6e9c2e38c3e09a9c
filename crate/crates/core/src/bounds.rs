//! Closed-form lower bounds on the number of columns, and the harmonic, digamma and
//! Taylor helpers they are assembled from.
//!
//! Every bound is returned with its hidden constant set to 1. Bounds that divide by
//! `ln(1 - θ)` are undefined at θ = 1 and report that as an error (or `None` in a
//! [`BoundReport`]).

use crate::coverage::{exact_expected_cover_time, phase_sum_expectation};
use crate::{Error, Result, SparsityModel};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.5772156649015329;

/// Above this θ the factor `1 + θ/2 + θ²/3 + …` dropped by [`small_theta_bound`]
/// exceeds about 1.05.
pub const SMALL_THETA_LIMIT: f64 = 0.1;

/// Default truncation tolerance for the exact expectation inside [`bound_report`].
pub const REPORT_TOL: f64 = 1e-10;

/// The two branches of the theorem's `max { n/(1 - (1-θ)^n), ln(n)/θ }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremTerms {
    pub coverage_term: f64,
    pub log_term: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremBranch {
    Coverage,
    Log,
}

impl TheoremTerms {
    pub fn value(&self) -> f64 {
        self.coverage_term.max(self.log_term)
    }

    /// Which branch attains the max; ties go to the coverage branch.
    pub fn dominant(&self) -> TheoremBranch {
        if self.log_term > self.coverage_term {
            TheoremBranch::Log
        } else {
            TheoremBranch::Coverage
        }
    }
}

pub fn theorem_terms(model: &SparsityModel) -> TheoremTerms {
    TheoremTerms {
        coverage_term: simple_lower_bound(model),
        log_term: (model.n() as f64).ln() / model.theta(),
    }
}

/// `max { n/(1 - (1-θ)^n), ln(n)/θ }` (natural log).
pub fn theorem_bound(model: &SparsityModel) -> f64 {
    theorem_terms(model).value()
}

/// `n / (1 - (1-θ)^n)`: every phase of the phase-sum replaced by its cheapest one.
pub fn simple_lower_bound(model: &SparsityModel) -> f64 {
    model.n() as f64 / model.row_hit(model.n() as u64)
}

/// `Hₙ = Σ_{k=1}^{n} 1/k`, summed smallest term first.
pub fn harmonic(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    Ok((1..=n).rev().map(|k| 1.0 / k as f64).sum())
}

/// `ψ(n+1) = Hₙ - γ`.
pub fn digamma_psi0(n: usize) -> Result<f64> {
    Ok(harmonic(n)? - EULER_GAMMA)
}

/// `ln(n+1) - 1/(2(n+1)) - 1/(12(n+1)²)`, a lower bound for `ψ(n+1)`.
pub fn psi_lower_bound(n: usize) -> f64 {
    let x = n as f64 + 1.0;
    x.ln() - 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x)
}

/// `n - (γ + ψ(n+1)) / ln(1-θ)`.
pub fn digamma_bound(model: &SparsityModel) -> Result<f64> {
    if model.theta() == 1.0 {
        return Err(Error::UndefinedAtThetaOne("digamma_bound"));
    }
    let psi = digamma_psi0(model.n())?;
    Ok(model.n() as f64 - (EULER_GAMMA + psi) / model.log_miss())
}

/// [`digamma_bound`] with `ψ(n+1)` replaced by [`psi_lower_bound`].
pub fn digamma_approx_bound(model: &SparsityModel) -> Result<f64> {
    if model.theta() == 1.0 {
        return Err(Error::UndefinedAtThetaOne("digamma_approx_bound"));
    }
    let n = model.n();
    Ok(n as f64 - (EULER_GAMMA + psi_lower_bound(n)) / model.log_miss())
}

/// Partial sum `θ + θ²/2 + … + θ^T/T` of the series for `-ln(1-θ)`.
pub fn log1m_taylor(theta: f64, terms: usize) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "taylor expansion needs theta in (0, 1), got {theta}"
        )));
    }
    if terms == 0 {
        return Err(Error::InvalidArgument(
            "taylor expansion needs at least one term".into(),
        ));
    }
    let mut power = 1.0;
    let mut sum = 0.0;
    for k in 1..=terms {
        power *= theta;
        sum += power / k as f64;
    }
    Ok(sum)
}

/// Bound on `-ln(1-θ) - log1m_taylor(θ, T)`: `θ^{T+1} / ((T+1)(1-θ))`.
pub fn log1m_taylor_remainder_bound(theta: f64, terms: usize) -> f64 {
    let next = terms as f64 + 1.0;
    theta.powf(next) / (next * (1.0 - theta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallThetaBound {
    pub value: f64,
    /// θ exceeds [`SMALL_THETA_LIMIT`], where dropping the series factor is no longer
    /// a good approximation.
    pub outside_regime: bool,
}

/// `n + (γ + ln(n+1)) / θ`, the small-θ simplification of [`digamma_approx_bound`].
///
/// This is a reference curve for sparse models; it is not a guaranteed bound on
/// either the phase-sum or the exact expectation.
pub fn small_theta_bound(model: &SparsityModel) -> SmallThetaBound {
    let n = model.n() as f64;
    SmallThetaBound {
        value: n + (EULER_GAMMA + (n + 1.0).ln()) / model.theta(),
        outside_regime: model.theta() > SMALL_THETA_LIMIT,
    }
}

/// Every bound for one model, next to the phase-sum and the exact expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub model: SparsityModel,
    pub theorem_bound: f64,
    pub simple_lower_bound: f64,
    /// `None` at θ = 1.
    pub digamma_bound: Option<f64>,
    /// `None` at θ = 1.
    pub digamma_approx_bound: Option<f64>,
    pub small_theta_bound: SmallThetaBound,
    pub phase_sum: f64,
    pub exact_expectation: f64,
}

pub fn bound_report(model: &SparsityModel) -> BoundReport {
    let exact = exact_expected_cover_time(model, REPORT_TOL)
        .expect("REPORT_TOL is positive")
        .exact_expectation;
    BoundReport {
        model: *model,
        theorem_bound: theorem_bound(model),
        simple_lower_bound: simple_lower_bound(model),
        digamma_bound: digamma_bound(model).ok(),
        digamma_approx_bound: digamma_approx_bound(model).ok(),
        small_theta_bound: small_theta_bound(model),
        phase_sum: phase_sum_expectation(model),
        exact_expectation: exact,
    }
}
