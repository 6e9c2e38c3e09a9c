//! Concrete factorization instances `Y = VX` with orthogonal `V` and Bernoulli-sparse
//! `X`, and the row-coverage check on `X`.
//!
//! Nothing here tries to recover `V` or `X` from `Y`. The harness only builds
//! instances and verifies the necessary condition plus the algebraic identities
//! that make it meaningful.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::montecarlo::{derive_seed, pattern_for_seed, stream, MonteCarloEstimate};
use crate::{Error, Result, SparsityModel};

/// Stream id for the nonzero values of `X`.
const VALUE_STREAM: u64 = 1;
/// Stream id for the Gaussian matrix orthogonalized into `V`.
const ORTHOGONAL_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct OmfInstance {
    pub n: usize,
    pub p: usize,
    pub theta: f64,
    pub v: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub covered: bool,
    pub uncovered_rows: Vec<usize>,
    pub nonzeros_per_row: Vec<usize>,
}

/// A Haar-distributed orthogonal matrix: QR of a standard normal matrix with the
/// columns of Q flipped so that R has a positive diagonal.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut rng = stream(seed, ORTHOGONAL_STREAM);
    let gaussian = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let qr = gaussian.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(q)
}

/// `X` with the indicator pattern of [`pattern_for_seed`] and standard normal
/// values on the support.
pub fn sample_sparse_matrix(model: &SparsityModel, p: usize, seed: u64) -> DMatrix<f64> {
    let pattern = pattern_for_seed(model, p, seed);
    let mut rng = stream(seed, VALUE_STREAM);
    // Column-major walk, same order the pattern was drawn in.
    let values = pattern.iter().map(|&nonzero| {
        if nonzero {
            loop {
                let v: f64 = StandardNormal.sample(&mut rng);
                if v != 0.0 {
                    break v;
                }
            }
        } else {
            0.0
        }
    });
    DMatrix::from_iterator(model.n(), p, values)
}

pub fn assemble_instance(n: usize, p: usize, theta: f64, seed: u64) -> Result<OmfInstance> {
    let model = SparsityModel::new(n, theta)?;
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let v = random_orthogonal(n, seed)?;
    let x = sample_sparse_matrix(&model, p, seed);
    let y = &v * &x;
    Ok(OmfInstance {
        n,
        p,
        theta,
        v,
        x,
        y,
        seed,
    })
}

/// Exact zero test per entry; `x` is constructed, not measured.
pub fn row_coverage_check(x: &DMatrix<f64>) -> Result<CoverageReport> {
    if x.is_empty() {
        return Err(Error::InvalidArgument(
            "coverage check needs a nonempty matrix".into(),
        ));
    }
    let nonzeros_per_row: Vec<usize> = x
        .row_iter()
        .map(|row| row.iter().filter(|&&v| v != 0.0).count())
        .collect();
    let uncovered_rows: Vec<usize> = nonzeros_per_row
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| i)
        .collect();
    Ok(CoverageReport {
        covered: uncovered_rows.is_empty(),
        uncovered_rows,
        nonzeros_per_row,
    })
}

/// Fraction of assembled instances whose `X` covers every row. Trial `i` assembles
/// the instance with seed `derive_seed(seed, i)`.
pub fn coverage_experiment(
    n: usize,
    theta: f64,
    p: usize,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    SparsityModel::new(n, theta)?;
    if trials < 1 {
        return Err(Error::TooFewTrials {
            min: 1,
            got: trials,
        });
    }
    let covered = (0..trials)
        .into_par_iter()
        .map(|i| {
            let instance = assemble_instance(n, p, theta, derive_seed(seed, i))?;
            Ok(u64::from(row_coverage_check(&instance.x)?.covered))
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    Ok(MonteCarloEstimate::from_successes(covered, trials, seed))
}

impl OmfInstance {
    /// `max |VᵀV - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let gram = self.v.transpose() * &self.v;
        (gram - DMatrix::identity(self.n, self.n)).amax()
    }

    /// `‖VᵀY - X‖_F`.
    pub fn recovery_error(&self) -> f64 {
        (self.v.transpose() * &self.y - &self.x).norm()
    }

    /// `‖Y - VX‖_F`.
    pub fn residual(&self) -> f64 {
        (&self.y - &self.v * &self.x).norm()
    }

    /// `|‖Y‖_F - ‖X‖_F| / ‖X‖_F`, or the absolute gap when `X = 0`.
    pub fn norm_gap(&self) -> f64 {
        let xn = self.x.norm();
        let gap = (self.y.norm() - xn).abs();
        if xn > 0.0 {
            gap / xn
        } else {
            gap
        }
    }

    /// Plain-text dump: a header line `n p theta seed`, then the rows of V, X and Y
    /// in that order, values separated by single spaces.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {:e} {}", self.n, self.p, self.theta, self.seed)?;
        for m in [&self.v, &self.x, &self.y] {
            for row in m.row_iter() {
                let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MalformedDump("missing header".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::MalformedDump(format!(
                "header has {} fields",
                fields.len()
            )));
        }
        let bad = |what: &str| Error::MalformedDump(format!("bad {what} in header"));
        let n: usize = fields[0].parse().map_err(|_| bad("n"))?;
        let p: usize = fields[1].parse().map_err(|_| bad("p"))?;
        let theta: f64 = fields[2].parse().map_err(|_| bad("theta"))?;
        let seed: u64 = fields[3].parse().map_err(|_| bad("seed"))?;

        let mut read_matrix = |rows: usize, cols: usize| -> Result<DMatrix<f64>> {
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let line = lines
                    .next()
                    .ok_or_else(|| Error::MalformedDump("truncated matrix".into()))??;
                let before = data.len();
                for tok in line.split_whitespace() {
                    data.push(
                        tok.parse::<f64>()
                            .map_err(|_| Error::MalformedDump(format!("bad value {tok:?}")))?,
                    );
                }
                if data.len() - before != cols {
                    return Err(Error::MalformedDump(format!(
                        "expected {cols} values per row, got {}",
                        data.len() - before
                    )));
                }
            }
            Ok(DMatrix::from_row_slice(rows, cols, &data))
        };
        let v = read_matrix(n, n)?;
        let x = read_matrix(n, p)?;
        let y = read_matrix(n, p)?;
        Ok(Self {
            n,
            p,
            theta,
            v,
            x,
            y,
            seed,
        })
    }
}
