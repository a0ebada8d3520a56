use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::{sample, Theta};
use crate::error::{LateError, Result};
use crate::estimation::{estimate, gamma};
use crate::seed::derive_seed;
use crate::Scalar;

/// Mean absolute estimation errors at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeErrors {
    pub n: usize,
    /// `None` when the true `beta` is undefined or no sample identified it.
    pub beta: Option<f64>,
    pub k1: f64,
    pub k2: f64,
    pub gamma: Option<f64>,
    /// Samples on which `beta_hat` was undefined.
    pub weak_iv: usize,
    /// Samples with an empty instrument arm.
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub seeds: usize,
    pub seed: u64,
    pub true_beta: Option<f64>,
    pub true_k1: f64,
    pub true_k2: f64,
    pub sizes: Vec<SizeErrors>,
    /// Every tracked error is nonincreasing along the size sequence.
    pub monotone_decay: bool,
}

#[derive(Default)]
struct Accumulator {
    beta: (f64, usize),
    k1: f64,
    k2: f64,
    gamma: (f64, usize),
    weak_iv: usize,
    degenerate: usize,
    ok: usize,
}

/// Average absolute error of `beta_hat`, `k1_hat`, `k2_hat` and `gamma_hat`
/// over `seeds` samples at each size in `sizes`.
pub fn run_consistency_sweep<T: Scalar>(
    theta: &Theta<T>,
    sizes: &[usize],
    seeds: usize,
    seed: u64,
) -> Result<ConsistencyReport> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(LateError::InvalidArgument(
            "sizes must be a nonempty list of positive counts".into(),
        ));
    }
    if seeds == 0 {
        return Err(LateError::InvalidArgument("seeds must be >= 1".into()));
    }
    let true_beta = theta.iv_beta().ok().map(Scalar::as_f64);
    let (k1, k2) = (theta.k1().as_f64(), theta.k2().as_f64());
    let true_gamma = gamma(k1, k2).ok();

    let mut rows = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        let per_seed: Vec<Result<Option<[Option<f64>; 4]>>> = (0..seeds as u64)
            .into_par_iter()
            .map(|s| {
                let data = sample(theta, n, derive_seed(seed, &[i as u64, s]))?;
                Ok(match estimate(&data) {
                    Ok(e) => Some([
                        e.beta_hat.map(Scalar::as_f64),
                        Some(e.k1_hat.as_f64()),
                        Some(e.k2_hat.as_f64()),
                        e.gamma_hat.map(Scalar::as_f64),
                    ]),
                    Err(LateError::DegenerateInstrument) => None,
                    Err(e) => return Err(e),
                })
            })
            .collect();
        let mut acc = Accumulator::default();
        for outcome in per_seed {
            let Some([b, e1, e2, g]) = outcome? else {
                acc.degenerate += 1;
                continue;
            };
            acc.ok += 1;
            acc.k1 += (e1.unwrap() - k1).abs();
            acc.k2 += (e2.unwrap() - k2).abs();
            match (b, true_beta) {
                (Some(b), Some(t)) => {
                    acc.beta.0 += (b - t).abs();
                    acc.beta.1 += 1;
                }
                (None, _) => acc.weak_iv += 1,
                _ => {}
            }
            if let (Some(g), Some(t)) = (g, true_gamma) {
                acc.gamma.0 += (g - t).abs();
                acc.gamma.1 += 1;
            }
        }
        let mean = |(sum, count): (f64, usize)| (count > 0).then(|| sum / count as f64);
        let ok = acc.ok.max(1) as f64;
        rows.push(SizeErrors {
            n,
            beta: mean(acc.beta),
            k1: acc.k1 / ok,
            k2: acc.k2 / ok,
            gamma: mean(acc.gamma),
            weak_iv: acc.weak_iv,
            degenerate: acc.degenerate,
        });
    }

    let nonincreasing = |f: &dyn Fn(&SizeErrors) -> Option<f64>| {
        rows.windows(2).all(|w| match (f(&w[0]), f(&w[1])) {
            (Some(a), Some(b)) => b <= a,
            _ => true,
        })
    };
    let monotone_decay = nonincreasing(&|r| r.beta)
        && nonincreasing(&|r| Some(r.k1))
        && nonincreasing(&|r| Some(r.k2))
        && nonincreasing(&|r| r.gamma);
    Ok(ConsistencyReport {
        seeds,
        seed,
        true_beta,
        true_k1: k1,
        true_k2: k2,
        sizes: rows,
        monotone_decay,
    })
}
