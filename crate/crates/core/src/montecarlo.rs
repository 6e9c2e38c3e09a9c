//! Seeded simulation of the Bernoulli sparsity process.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, trial index)`, and
//! every sweep point re-keys the seed by `p`. Trials run on the rayon pool, but
//! results are gathered in trial order before any floating-point reduction, so the
//! estimates are bit-identical for any number of worker threads.

use nalgebra::DMatrix;
use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use rayon::prelude::*;

use crate::coverage::coverage_probability;
use crate::{Error, Result, SparsityModel};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// Stream id used by [`pattern_for_seed`]. Other consumers of a seed (the OMF
/// harness) use different ids so their draws never overlap with the pattern.
pub const PATTERN_STREAM: u64 = 0;

/// How a single cover time is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoverTimeSampler {
    /// Maximum over rows of the index of each row's first nonzero. `O(n)` per trial.
    #[default]
    MaxOfGeometrics,
    /// Draw whole columns until every row has been hit. Slower; kept to check the
    /// shortcut against the literal process.
    ColumnScan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Lower end of the 95% interval.
    pub ci_low: f64,
    /// Upper end of the 95% interval.
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    /// Normal-approximation interval for the mean of `samples`.
    pub fn from_samples(samples: &[f64], seed: u64) -> Self {
        let count = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / count;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1.0)
        } else {
            0.0
        };
        let std_error = (var / count).sqrt();
        Self {
            mean,
            std_error,
            ci_low: mean - Z_95 * std_error,
            ci_high: mean + Z_95 * std_error,
            trials: samples.len() as u64,
            seed,
        }
    }

    /// Wilson score interval for a binomial proportion.
    pub fn from_successes(successes: u64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let phat = successes as f64 / n;
        let z2 = Z_95 * Z_95;
        let denom = 1.0 + z2 / n;
        let center = (phat + z2 / (2.0 * n)) / denom;
        let half = Z_95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
        Self {
            mean: phat,
            std_error: (phat * (1.0 - phat) / n).sqrt(),
            // The interval always contains phat; clamp away rounding at 0 and 1.
            ci_low: (center - half).max(0.0).min(phat),
            ci_high: (center + half).min(1.0).max(phat),
            trials,
            seed,
        }
    }
}

/// One sweep point: the empirical coverage frequency next to the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub p: usize,
    pub empirical: MonteCarloEstimate,
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCurve {
    pub model: SparsityModel,
    pub points: Vec<PhasePoint>,
}

/// The random stream for `(seed, id)`.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Mixes `salt` into `seed` (splitmix64 finalizer) to key an independent family of
/// streams.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws an `n × p` nonzero indicator pattern, one column at a time, top to bottom.
pub fn sample_pattern<R: Rng + ?Sized>(
    model: &SparsityModel,
    p: usize,
    rng: &mut R,
) -> DMatrix<bool> {
    let bernoulli = Bernoulli::new(model.theta()).expect("theta validated by SparsityModel");
    let n = model.n();
    let data: Vec<bool> = (0..n * p).map(|_| bernoulli.sample(rng)).collect();
    DMatrix::from_vec(n, p, data)
}

/// The pattern keyed by `seed` alone; [`crate::omf::sample_sparse_matrix`] shares it.
pub fn pattern_for_seed(model: &SparsityModel, p: usize, seed: u64) -> DMatrix<bool> {
    sample_pattern(model, p, &mut stream(seed, PATTERN_STREAM))
}

/// `true` when no row of `pattern` is all-false.
pub fn pattern_covers_rows(pattern: &DMatrix<bool>) -> bool {
    pattern.nrows() > 0 && pattern.row_iter().all(|row| row.iter().any(|&b| b))
}

/// Index (1-based) of the first column by which every row has had a nonzero.
pub fn sample_cover_time<R: Rng + ?Sized>(
    model: &SparsityModel,
    rng: &mut R,
    sampler: CoverTimeSampler,
) -> u64 {
    match sampler {
        CoverTimeSampler::MaxOfGeometrics => {
            // Geometric counts failures before the first success.
            let geometric =
                Geometric::new(model.theta()).expect("theta validated by SparsityModel");
            (0..model.n())
                .map(|_| geometric.sample(rng))
                .max()
                .unwrap_or(0)
                + 1
        }
        CoverTimeSampler::ColumnScan => {
            let bernoulli =
                Bernoulli::new(model.theta()).expect("theta validated by SparsityModel");
            let mut uncovered = vec![true; model.n()];
            let mut remaining = model.n();
            let mut column = 0;
            while remaining > 0 {
                column += 1;
                for row in uncovered.iter_mut() {
                    // Every row is drawn, covered or not, so the stream consumption
                    // matches a full column.
                    if bernoulli.sample(rng) && *row {
                        *row = false;
                        remaining -= 1;
                    }
                }
            }
            column
        }
    }
}

pub fn estimate_expected_cover_time(
    model: &SparsityModel,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    estimate_expected_cover_time_with(model, trials, seed, CoverTimeSampler::default())
}

pub fn estimate_expected_cover_time_with(
    model: &SparsityModel,
    trials: u64,
    seed: u64,
    sampler: CoverTimeSampler,
) -> Result<MonteCarloEstimate> {
    if trials < 2 {
        return Err(Error::TooFewTrials {
            min: 2,
            got: trials,
        });
    }
    let samples = cover_time_samples(model, trials, seed, sampler);
    let samples: Vec<f64> = samples.into_iter().map(|t| t as f64).collect();
    Ok(MonteCarloEstimate::from_samples(&samples, seed))
}

/// Raw cover-time draws for trials `0..trials`, in trial order.
pub fn cover_time_samples(
    model: &SparsityModel,
    trials: u64,
    seed: u64,
    sampler: CoverTimeSampler,
) -> Vec<u64> {
    (0..trials)
        .into_par_iter()
        .map(|i| sample_cover_time(model, &mut stream(seed, i), sampler))
        .collect()
}

pub fn estimate_coverage_probability(
    model: &SparsityModel,
    p: usize,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    estimate_coverage_probability_with(model, p, trials, seed, CoverTimeSampler::default())
}

/// Fraction of trials whose `n × p` pattern has no all-zero row, with a Wilson
/// interval. With [`CoverTimeSampler::ColumnScan`] the full pattern is drawn and
/// inspected; otherwise a trial is covered iff its cover time is at most `p`.
pub fn estimate_coverage_probability_with(
    model: &SparsityModel,
    p: usize,
    trials: u64,
    seed: u64,
    sampler: CoverTimeSampler,
) -> Result<MonteCarloEstimate> {
    if trials < 1 {
        return Err(Error::TooFewTrials {
            min: 1,
            got: trials,
        });
    }
    let covered: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let hit = match sampler {
                CoverTimeSampler::MaxOfGeometrics => {
                    p > 0 && sample_cover_time(model, &mut rng, sampler) <= p as u64
                }
                CoverTimeSampler::ColumnScan => {
                    p > 0 && pattern_covers_rows(&sample_pattern(model, p, &mut rng))
                }
            };
            u64::from(hit)
        })
        .sum();
    Ok(MonteCarloEstimate::from_successes(covered, trials, seed))
}

/// Empirical and closed-form coverage probability for every `p` in `p_min..=p_max`.
/// Point `p` uses the seed `derive_seed(seed, p)`.
pub fn phase_sweep(
    model: &SparsityModel,
    p_min: usize,
    p_max: usize,
    trials: u64,
    seed: u64,
) -> Result<PhaseCurve> {
    if p_min > p_max {
        return Err(Error::InvertedRange { p_min, p_max });
    }
    let points = (p_min..=p_max)
        .map(|p| {
            Ok(PhasePoint {
                p,
                empirical: estimate_coverage_probability(
                    model,
                    p,
                    trials,
                    derive_seed(seed, p as u64),
                )?,
                analytic: coverage_probability(model, p),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseCurve {
        model: *model,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: usize, theta: f64) -> SparsityModel {
        SparsityModel::new(n, theta).unwrap()
    }

    #[test]
    fn deterministic_models_cover_in_one_column() {
        for sampler in [
            CoverTimeSampler::MaxOfGeometrics,
            CoverTimeSampler::ColumnScan,
        ] {
            let mut rng = stream(123, 0);
            assert_eq!(sample_cover_time(&model(1, 1.0), &mut rng, sampler), 1);
            assert_eq!(sample_cover_time(&model(3, 1.0), &mut rng, sampler), 1);
        }
    }

    #[test]
    fn degenerate_mean_has_zero_spread() {
        let e = estimate_expected_cover_time(&model(1, 1.0), 100, 7).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.std_error, 0.0);
        assert_eq!((e.trials, e.seed), (100, 7));
        assert!(matches!(
            estimate_expected_cover_time(&model(1, 0.5), 1, 7),
            Err(Error::TooFewTrials { min: 2, got: 1 })
        ));
    }

    #[test]
    fn coverage_edge_cases() {
        let e = estimate_coverage_probability(&model(2, 1.0), 1, 50, 3).unwrap();
        assert_eq!(e.mean, 1.0);
        assert!(e.ci_low <= 1.0 && e.ci_high == 1.0);
        let e = estimate_coverage_probability(&model(5, 0.2), 0, 10, 0).unwrap();
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.ci_low, 0.0);
        assert!(estimate_coverage_probability(&model(5, 0.2), 3, 0, 0).is_err());
    }

    #[test]
    fn wilson_interval_known_value() {
        // 8 of 10: center (0.8 + 0.19208)/1.38415, half-width 0.24268.
        let e = MonteCarloEstimate::from_successes(8, 10, 0);
        assert!((e.ci_low - 0.4901624).abs() < 1e-6, "{}", e.ci_low);
        assert!((e.ci_high - 0.9433178).abs() < 1e-6, "{}", e.ci_high);
    }

    #[test]
    fn sweep_rejects_inverted_range_and_fills_analytic() {
        assert!(matches!(
            phase_sweep(&model(3, 0.5), 4, 3, 10, 0),
            Err(Error::InvertedRange { p_min: 4, p_max: 3 })
        ));
        let curve = phase_sweep(&model(1, 1.0), 1, 3, 10, 5).unwrap();
        assert_eq!(curve.points.len(), 3);
        assert!(curve.points.iter().all(|pt| pt.empirical.mean == 1.0));
        let curve = phase_sweep(&model(3, 0.5), 1, 10, 10, 0).unwrap();
        for pt in &curve.points {
            let expected = (1.0 - 0.5f64.powi(pt.p as i32)).powi(3);
            assert!((pt.analytic - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(11, 1);
        let b = derive_seed(11, 2);
        let c = derive_seed(12, 1);
        assert!(a != b && a != c && b != c);
        assert_eq!(a, derive_seed(11, 1));
    }

    #[test]
    fn pattern_is_column_major_and_keyed_by_seed() {
        let m = model(3, 0.5);
        let a = pattern_for_seed(&m, 4, 3);
        assert_eq!(a, pattern_for_seed(&m, 4, 3));
        assert_eq!(a.shape(), (3, 4));
        let mut rng = stream(3, PATTERN_STREAM);
        let bern = Bernoulli::new(0.5).unwrap();
        for j in 0..4 {
            for i in 0..3 {
                assert_eq!(a[(i, j)], bern.sample(&mut rng));
            }
        }
    }
}
