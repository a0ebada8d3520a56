//! Nonparametric percentile bootstrap.
//!
//! Rows are first collapsed into distinct `(y, d, z)` cells with counts. An
//! iid resample of `n` rows is then exactly a multinomial draw of cell counts,
//! which is generated with sequential conditional binomials. Every replication
//! has its own generator seeded from `(seed, replication, attempt)`, so results
//! do not depend on thread scheduling.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{estimate, Estimates, SampleSummary};
use crate::data::{Observation, SampleData};
use crate::error::{LateError, Result};
use crate::seed::derive_seed;
use crate::Scalar;

/// Redraw budget per replication when the statistic is undefined on a resample.
const MAX_ATTEMPTS_PER_REPLICATION: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    Beta,
    Itt,
    K1,
    K2,
    Gamma,
    LowerBound,
    CellProb,
}

impl Statistic {
    pub const ALL: [Statistic; 7] = [
        Statistic::Beta,
        Statistic::Itt,
        Statistic::K1,
        Statistic::K2,
        Statistic::Gamma,
        Statistic::LowerBound,
        Statistic::CellProb,
    ];

    pub fn evaluate<T: Scalar>(self, est: &Estimates<T>) -> Result<T> {
        match self {
            Statistic::Beta => est.beta(),
            Statistic::Itt => Ok(est.itt_hat),
            Statistic::K1 => Ok(est.k1_hat),
            Statistic::K2 => Ok(est.k2_hat),
            Statistic::Gamma => est.gamma(),
            Statistic::LowerBound => est.lower_bound(),
            Statistic::CellProb => est.cell_prob(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Beta => "beta",
            Statistic::Itt => "itt",
            Statistic::K1 => "k1",
            Statistic::K2 => "k2",
            Statistic::Gamma => "gamma",
            Statistic::LowerBound => "lower-bound",
            Statistic::CellProb => "cell-prob",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = LateError;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| LateError::InvalidArgument(format!("unknown statistic '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI<T = f64> {
    pub statistic: Statistic,
    pub point: T,
    pub lo: T,
    pub hi: T,
    pub std_error: T,
    pub level: T,
    pub replications: usize,
    pub seed: u64,
    /// Resamples discarded because the statistic was undefined on them.
    pub redraws: u64,
}

/// Cell-compressed sample ready for multinomial resampling.
#[derive(Debug, Clone)]
pub struct Resampler<T> {
    cells: Vec<Observation<T>>,
    counts: Vec<u64>,
    n: u64,
}

impl<T: Scalar> Resampler<T> {
    pub fn new(data: &SampleData<T>) -> Self {
        let mut rows: Vec<Observation<T>> = data.rows().to_vec();
        rows.sort_by(|a, b| {
            (a.z, a.d)
                .cmp(&(b.z, b.d))
                .then_with(|| a.y.partial_cmp(&b.y).unwrap_or(Ordering::Equal))
        });
        let mut cells: Vec<Observation<T>> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for row in rows {
            match cells.last() {
                Some(last) if *last == row => *counts.last_mut().unwrap() += 1,
                _ => {
                    cells.push(row);
                    counts.push(1);
                }
            }
        }
        Self {
            cells,
            counts,
            n: data.len() as u64,
        }
    }

    pub fn distinct_cells(&self) -> usize {
        self.cells.len()
    }

    /// Estimates on one iid resample of the original size.
    pub fn resample_estimates(&self, seed: u64) -> Result<Estimates<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut remaining_n = self.n;
        let mut remaining_count = self.n;
        let weights: Vec<T> = self
            .counts
            .iter()
            .map(|&count| {
                if remaining_n == 0 {
                    return T::zero();
                }
                let draw = if count == remaining_count {
                    remaining_n
                } else {
                    let p = count as f64 / remaining_count as f64;
                    Binomial::new(remaining_n, p)
                        .expect("valid binomial parameters")
                        .sample(&mut rng)
                };
                remaining_n -= draw;
                remaining_count -= count;
                T::from_u64(draw).unwrap()
            })
            .collect();
        SampleSummary::from_weighted(self.cells.iter().zip(weights)).estimates()
    }

    /// Statistic values on `replications` resamples, redrawing resamples on
    /// which the statistic is undefined. Returns the values and the number of
    /// redraws.
    pub fn draws(
        &self,
        statistic: Statistic,
        replications: usize,
        seed: u64,
    ) -> Result<(Vec<T>, u64)> {
        let outcomes: Vec<Result<(T, u64)>> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                for attempt in 0..MAX_ATTEMPTS_PER_REPLICATION {
                    let stream = derive_seed(seed, &[rep as u64, attempt]);
                    let value = self
                        .resample_estimates(stream)
                        .and_then(|e| statistic.evaluate(&e));
                    if let Ok(v) = value {
                        return Ok((v, attempt));
                    }
                }
                Err(LateError::BootstrapFailed(format!(
                    "statistic {statistic} undefined on {MAX_ATTEMPTS_PER_REPLICATION} consecutive resamples"
                )))
            })
            .collect();
        let mut values = Vec::with_capacity(replications);
        let mut redraws = 0;
        for outcome in outcomes {
            let (v, r) = outcome?;
            values.push(v);
            redraws += r;
        }
        Ok((values, redraws))
    }
}

/// Percentile bootstrap interval for `statistic` at confidence `level`.
///
/// The interval is widened to contain the point estimate when the percentile
/// endpoints happen to exclude it.
pub fn bootstrap<T: Scalar>(
    data: &SampleData<T>,
    statistic: Statistic,
    level: T,
    replications: usize,
    seed: u64,
) -> Result<BootstrapCI<T>> {
    if replications < 100 {
        return Err(LateError::InvalidArgument(
            "bootstrap needs at least 100 replications".into(),
        ));
    }
    if !(level > T::zero() && level < T::one()) {
        return Err(LateError::InvalidArgument(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let point = statistic.evaluate(&estimate(data)?)?;
    let (mut values, redraws) = Resampler::new(data).draws(statistic, replications, seed)?;
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let tail = (T::one() - level) / T::two();
    let lo = percentile(&values, tail).min(point);
    let hi = percentile(&values, T::one() - tail).max(point);
    Ok(BootstrapCI {
        statistic,
        point,
        lo,
        hi,
        std_error: std_dev(&values),
        level,
        replications,
        seed,
        redraws,
    })
}

/// Linear-interpolation percentile of sorted values, `q in [0, 1]`.
pub(crate) fn percentile<T: Scalar>(sorted: &[T], q: T) -> T {
    let last = sorted.len() - 1;
    let rank = q * T::from_usize(last).unwrap();
    let lower = rank.floor().to_usize().unwrap_or(0).min(last);
    let upper = rank.ceil().to_usize().unwrap_or(last).min(last);
    let frac = rank - T::from_usize(lower).unwrap();
    sorted[lower] + (sorted[upper] - sorted[lower]) * frac
}

pub(crate) fn std_dev<T: Scalar>(values: &[T]) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let n = T::from_usize(values.len()).unwrap();
    let mean = values.iter().copied().sum::<T>() / n;
    let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    (ss / (n - T::one())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(spec: &[(f64, u8, u8, usize)]) -> SampleData {
        let mut out = Vec::new();
        for &(y, d, z, count) in spec {
            out.extend(std::iter::repeat_n(Observation::new(y, d == 1, z == 1), count));
        }
        SampleData::new(out).unwrap()
    }

    #[test]
    fn constant_outcome_itt_is_degenerate_at_zero() {
        let data = rows(&[(2.0, 1, 1, 30), (2.0, 0, 1, 20), (2.0, 0, 0, 40), (2.0, 1, 0, 5)]);
        let ci = bootstrap(&data, Statistic::Itt, 0.95, 200, 1).unwrap();
        assert_eq!((ci.lo, ci.point, ci.hi), (0.0, 0.0, 0.0));
    }

    #[test]
    fn point_inside_interval_and_deterministic() {
        let data = rows(&[
            (1.0, 1, 1, 40),
            (0.0, 1, 1, 25),
            (0.0, 0, 1, 35),
            (1.0, 1, 0, 4),
            (1.0, 0, 0, 30),
            (0.0, 0, 0, 66),
        ]);
        for st in Statistic::ALL {
            let ci = bootstrap(&data, st, 0.9, 300, 42).unwrap();
            assert!(ci.lo <= ci.point && ci.point <= ci.hi, "{st}: {ci:?}");
            assert_eq!(ci, bootstrap(&data, st, 0.9, 300, 42).unwrap());
        }
    }

    #[test]
    fn compression_counts_cells() {
        let data = rows(&[(1.0, 1, 1, 10), (1.0, 1, 1, 5), (0.0, 0, 0, 3)]);
        let r = Resampler::new(&data);
        assert_eq!(r.distinct_cells(), 2);
        let est = r.resample_estimates(5);
        // Only two cells, one per arm, so every resample with both arms has k1 = 1, k2 = 0.
        if let Ok(e) = est {
            assert_eq!((e.k1_hat, e.k2_hat), (1.0, 0.0));
        }
    }

    #[test]
    fn undefined_statistic_fails_cleanly() {
        // Outcome not binary: cell probability is never defined.
        let data = rows(&[(0.5, 1, 1, 10), (0.0, 0, 0, 10)]);
        assert!(matches!(
            bootstrap(&data, Statistic::CellProb, 0.95, 100, 0),
            Err(LateError::NotBinary)
        ));
        // Take-up identical in both arms on every resample.
        let weak = rows(&[(1.0, 1, 1, 10), (0.0, 1, 0, 10)]);
        assert!(bootstrap(&weak, Statistic::Beta, 0.95, 100, 0).is_err());
    }

    #[test]
    fn rejects_bad_arguments() {
        let data = rows(&[(1.0, 1, 1, 10), (0.0, 0, 0, 10)]);
        assert!(bootstrap(&data, Statistic::Itt, 0.95, 99, 0).is_err());
        assert!(bootstrap(&data, Statistic::Itt, 1.0, 100, 0).is_err());
    }

    #[test]
    fn percentile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(percentile(&v, 0.5), 1.5);
        assert_eq!(percentile(&v, 0.0), 0.0);
        assert_eq!(percentile(&v, 1.0), 3.0);
    }
}
