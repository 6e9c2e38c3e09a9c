//! Exact quantities of the row-coverage process.
//!
//! Under the Bernoulli model rows are covered independently, so the cover time is the
//! maximum of `n` i.i.d. geometric(θ) variables. That gives closed forms for its
//! distribution and a tail-sum for its mean. The phase-sum expression charges one
//! geometric waiting phase per newly identified row; because a single column can
//! identify several rows at once it overestimates the true mean, and both are
//! reported side by side.

use crate::{Error, Result, SparsityModel};

/// Largest `n` accepted by [`inclusion_exclusion_expectation`]. Past this the
/// alternating binomial sum cancels away most of its significant digits.
pub const INCLUSION_EXCLUSION_MAX_N: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverTimeSummary {
    /// Mean number of columns until every row has a nonzero.
    pub exact_expectation: f64,
    /// The phase-sum estimate, `Σ_{k=1}^{n} 1/(1 - (1-θ)^k)`.
    pub phase_sum: f64,
    /// `n·Hₙ`, the uniform single-coupon analogue.
    pub classic_reference: f64,
    /// Absolute bound on the error of `exact_expectation` from truncating the tail sum.
    pub truncation_error_bound: f64,
}

/// Expected draws for the uniform coupon collector, `Σ_{k=0}^{n-1} 1/(1 - k/n) = n·Hₙ`.
pub fn classic_harmonic_sum(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let nf = n as f64;
    // 1/(1 - k/n) == n/(n - k); summed smallest first.
    Ok((0..n).rev().map(|k| nf / (nf - k as f64)).sum())
}

/// The phase-sum with its inner binomial sum evaluated term by term:
///
/// `Σ_{k=0}^{n-1} 1 / (1 - Σ_{r=0}^{k} C(k,r) θ^r (1-θ)^{n-r})`.
///
/// Terms of the inner sum follow the recurrence
/// `t_{r+1} = t_r · (k-r)/(r+1) · θ/(1-θ)` starting from `t_0 = (1-θ)^n`. If `t_0`
/// would underflow the recurrence runs in log space instead.
pub fn phase_sum_raw(model: &SparsityModel) -> f64 {
    let n = model.n();
    let theta = model.theta();
    if theta == 1.0 {
        // (1-θ)^{n-r} vanishes for every r ≤ k < n, so each phase costs one column.
        return n as f64;
    }
    let ratio = theta / (1.0 - theta);
    let log_t0 = n as f64 * model.log_miss();
    let linear = log_t0 > -600.0;
    let t0 = model.row_miss(n as u64);
    let log_ratio = ratio.ln();

    let mut total = 0.0;
    let mut log_terms = Vec::new();
    for k in 0..n {
        let inner = if linear {
            let mut t = t0;
            let mut s = 0.0;
            for r in 0..=k {
                s += t;
                t *= (k - r) as f64 / (r + 1) as f64 * ratio;
            }
            s
        } else {
            log_terms.clear();
            let mut lt = log_t0;
            for r in 0..=k {
                log_terms.push(lt);
                if r < k {
                    lt += ((k - r) as f64 / (r + 1) as f64).ln() + log_ratio;
                }
            }
            log_sum_exp(&log_terms)
        };
        total += 1.0 / (1.0 - inner);
    }
    total
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    (max + s.ln()).exp()
}

/// The collapsed phase-sum, `Σ_{k=1}^{n} 1/(1 - (1-θ)^k)`.
pub fn phase_sum_expectation(model: &SparsityModel) -> f64 {
    (1..=model.n() as u64)
        .rev()
        .map(|k| 1.0 / model.row_hit(k))
        .sum()
}

/// Mean cover time via `E[T] = Σ_{t≥0} P(T > t)`, truncated at the first `T` whose
/// tail bound `n·(1-θ)^{T+1}/θ` is at most `tol`.
///
/// Work is `O(log(n/(θ·tol)) / θ)` terms.
pub fn exact_expected_cover_time(model: &SparsityModel, tol: f64) -> Result<CoverTimeSummary> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let (exact_expectation, truncation_error_bound) = if model.theta() == 1.0 {
        (1.0, 0.0)
    } else {
        let n = model.n() as f64;
        let theta = model.theta();
        let mut sum = CompensatedSum::default();
        let mut t = 0u64;
        loop {
            sum.add(uncovered_probability(model, t));
            let bound = n * model.row_miss(t + 1) / theta;
            if bound <= tol {
                break (sum.value(), bound);
            }
            t += 1;
        }
    };
    Ok(CoverTimeSummary {
        exact_expectation,
        phase_sum: phase_sum_expectation(model),
        classic_reference: classic_harmonic_sum(model.n())?,
        truncation_error_bound,
    })
}

/// Mean cover time by inclusion-exclusion over the set of uncovered rows,
/// `Σ_{k=1}^{n} (-1)^{k+1} C(n,k) / (1 - (1-θ)^k)`. Only for `n ≤ 30`.
pub fn inclusion_exclusion_expectation(model: &SparsityModel) -> Result<f64> {
    let n = model.n();
    if n > INCLUSION_EXCLUSION_MAX_N {
        return Err(Error::InclusionExclusionTooLarge {
            n,
            max: INCLUSION_EXCLUSION_MAX_N,
        });
    }
    let mut binom = 1.0;
    let mut sum = CompensatedSum::default();
    for k in 1..=n {
        // C(n,k) stays an exact integer in f64 for n ≤ 30.
        binom = binom * (n - k + 1) as f64 / k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum.add(sign * binom / model.row_hit(k as u64));
    }
    Ok(sum.value())
}

/// Rough absolute rounding-error scale of [`inclusion_exclusion_expectation`]:
/// machine epsilon times the sum of absolute term magnitudes.
pub fn inclusion_exclusion_error_scale(model: &SparsityModel) -> f64 {
    let n = model.n();
    let mut binom = 1.0;
    let mut abs_sum = 0.0;
    for k in 1..=n {
        binom = binom * (n - k + 1) as f64 / k as f64;
        abs_sum += binom / model.row_hit(k as u64);
    }
    abs_sum * f64::EPSILON
}

/// `P(every row has a nonzero among p columns) = (1 - (1-θ)^p)^n`.
pub fn coverage_probability(model: &SparsityModel, p: usize) -> f64 {
    if p == 0 {
        return 0.0;
    }
    if model.n() == 1 {
        return model.row_hit(p as u64);
    }
    (model.n() as f64 * model.log_row_hit(p as u64)).exp()
}

/// `P(T > t) = 1 - coverage_probability(t)`, without cancellation when coverage is
/// close to 1.
pub fn uncovered_probability(model: &SparsityModel, t: u64) -> f64 {
    if t == 0 {
        return 1.0;
    }
    -(model.n() as f64 * model.log_row_hit(t)).exp_m1()
}

/// `P(T = t)` for the cover time `T`, `t ≥ 1`.
pub fn cover_time_pmf(model: &SparsityModel, t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidArgument(
            "cover time t must be at least 1".into(),
        ));
    }
    let mass = coverage_probability(model, t) - coverage_probability(model, t - 1);
    Ok(mass.max(0.0))
}

/// Smallest `p` with `coverage_probability(model, p) ≥ 1 - delta`.
///
/// Starts from `⌈ln(1 - (1-δ)^{1/n}) / ln(1-θ)⌉` and then walks to the exact answer
/// using [`coverage_probability`] itself, so the result is consistent with it even
/// where the closed form rounds the wrong way.
pub fn coverage_threshold(model: &SparsityModel, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidDelta(delta));
    }
    let target = 1.0 - delta;
    let mut p = if model.theta() == 1.0 {
        1
    } else {
        // 1 - (1-δ)^{1/n}
        let per_row = -((-delta).ln_1p() / model.n() as f64).exp_m1();
        let guess = (per_row.ln() / model.log_miss()).ceil();
        if guess.is_finite() && guess >= 1.0 {
            guess as usize
        } else {
            1
        }
    };
    while coverage_probability(model, p) < target {
        p += 1;
    }
    while p > 1 && coverage_probability(model, p - 1) >= target {
        p -= 1;
    }
    Ok(p)
}

/// Neumaier summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize, theta: f64) -> SparsityModel {
        SparsityModel::new(n, theta).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    /// E[T] by enumerating every coupon sequence of length `len` and truncating the
    /// rest; for n = 2 the tail decays like 2^-len.
    fn brute_force_classic(n: usize, len: u32) -> f64 {
        let mut expectation = 0.0;
        let total = (n as u64).pow(len);
        for code in 0..total {
            let mut seen = vec![false; n];
            let mut c = code;
            let mut count = 0;
            for step in 1..=len {
                let coupon = (c % n as u64) as usize;
                c /= n as u64;
                if !seen[coupon] {
                    seen[coupon] = true;
                    count += 1;
                    if count == n {
                        expectation += step as f64 / total as f64;
                        break;
                    }
                }
            }
        }
        expectation
    }

    #[test]
    fn classic_sum_values() {
        assert_eq!(classic_harmonic_sum(1).unwrap(), 1.0);
        assert!(close(classic_harmonic_sum(2).unwrap(), 3.0, 1e-15));
        assert!(close(classic_harmonic_sum(3).unwrap(), 5.5, 1e-15));
        assert!(matches!(classic_harmonic_sum(0), Err(Error::ZeroDimension)));
        // Sequences of length 20 leave a tail of (20+2)·2^-19 < 5e-5.
        assert!((brute_force_classic(2, 20) - 3.0).abs() < 5e-5);
    }

    #[test]
    fn phase_sum_examples() {
        assert!(close(phase_sum_raw(&model(1, 0.5)), 2.0, 1e-15));
        let expected = 2.0 + 4.0 / 3.0 + 8.0 / 7.0;
        assert!(close(phase_sum_raw(&model(3, 0.5)), expected, 1e-14));
        assert!(close(
            phase_sum_expectation(&model(3, 0.5)),
            expected,
            1e-14
        ));
        assert_eq!(phase_sum_raw(&model(3, 1.0)), 3.0);
        assert!(close(phase_sum_expectation(&model(1, 0.25)), 4.0, 1e-15));
        assert_eq!(phase_sum_expectation(&model(2, 1.0)), 2.0);
    }

    #[test]
    fn phase_sum_raw_survives_large_n() {
        // (1-θ)^n underflows here, which forces the log-space path.
        for &(n, theta) in &[(1000, 0.9), (1500, 0.6), (1000, 0.01)] {
            let m = model(n, theta);
            let raw = phase_sum_raw(&m);
            let collapsed = phase_sum_expectation(&m);
            assert!(raw.is_finite());
            assert!(
                close(raw, collapsed, 1e-10),
                "n={n} θ={theta}: {raw} vs {collapsed}"
            );
        }
    }

    #[test]
    fn exact_expectation_examples() {
        let s = exact_expected_cover_time(&model(1, 0.5), 1e-10).unwrap();
        assert!((s.exact_expectation - 2.0).abs() <= 1e-10);
        assert!(s.truncation_error_bound <= 1e-10);

        let s = exact_expected_cover_time(&model(3, 0.5), 1e-10).unwrap();
        assert!((s.exact_expectation - 22.0 / 7.0).abs() <= 1e-10);
        assert!(close(s.phase_sum, 2.0 + 4.0 / 3.0 + 8.0 / 7.0, 1e-14));
        assert!(close(s.classic_reference, 5.5, 1e-15));

        let s = exact_expected_cover_time(&model(3, 1.0), 1e-10).unwrap();
        assert_eq!(s.exact_expectation, 1.0);
        assert_eq!(s.truncation_error_bound, 0.0);

        for tol in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                exact_expected_cover_time(&model(3, 0.5), tol),
                Err(Error::InvalidTolerance(_))
            ));
        }
    }

    #[test]
    fn inclusion_exclusion_examples() {
        assert!(close(
            inclusion_exclusion_expectation(&model(1, 0.5)).unwrap(),
            2.0,
            1e-15
        ));
        let v = inclusion_exclusion_expectation(&model(3, 0.5)).unwrap();
        assert!(close(v, 6.0 - 4.0 + 8.0 / 7.0, 1e-14));
        assert!(close(
            inclusion_exclusion_expectation(&model(2, 1.0)).unwrap(),
            1.0,
            1e-15
        ));
        assert!(matches!(
            inclusion_exclusion_expectation(&model(31, 0.5)),
            Err(Error::InclusionExclusionTooLarge { n: 31, max: 30 })
        ));
        assert!(inclusion_exclusion_expectation(&model(30, 0.5)).is_ok());
        let msg = inclusion_exclusion_expectation(&model(40, 0.5))
            .unwrap_err()
            .to_string();
        assert!(msg.contains("tail-sum"));
    }

    #[test]
    fn coverage_probability_examples() {
        assert_eq!(coverage_probability(&model(3, 0.5), 3), 0.669921875);
        assert_eq!(coverage_probability(&model(1, 1.0), 1), 1.0);
        assert_eq!(coverage_probability(&model(2, 0.5), 0), 0.0);
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(cover_time_pmf(&model(1, 0.5), 2).unwrap(), 0.25);
        assert!(close(
            cover_time_pmf(&model(3, 0.5), 1).unwrap(),
            0.125,
            1e-15
        ));
        assert_eq!(cover_time_pmf(&model(2, 1.0), 1).unwrap(), 1.0);
        assert!(cover_time_pmf(&model(2, 0.5), 0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(coverage_threshold(&model(3, 0.5), 0.1).unwrap(), 5);
        assert_eq!(coverage_threshold(&model(1, 1.0), 0.5).unwrap(), 1);
        assert_eq!(coverage_threshold(&model(1, 0.5), 0.25).unwrap(), 2);
        for delta in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(
                coverage_threshold(&model(3, 0.5), delta),
                Err(Error::InvalidDelta(_))
            ));
        }
    }

    #[test]
    fn compensated_sum_recovers_small_addends() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-17);
        }
        assert_eq!(s.value(), 1.0 + 1e-16);
    }
}
