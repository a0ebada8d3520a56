use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::adversarial::verify_equivalence;
use crate::dgp::{sample, Theta};
use crate::error::{LateError, Result};
use crate::seed::derive_seed;
use crate::sign::Sign;
use crate::Scalar;

use super::procedure::{ProcedureKind, SignProcedure, SignSet};

/// Largest observational distance at which a pair is still simulated.
pub const EQUIVALENCE_GATE: f64 = 1e-9;

const DGP_TAG_BASE: u64 = 0;
const DGP_TAG_TWIN: u64 = 1;
const PROCEDURE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    /// Nominal non-coverage of the sign confidence sets.
    pub alpha: f64,
    pub procedure: ProcedureKind,
    pub bootstrap_replications: usize,
}

impl ExperimentConfig {
    pub fn new(n: usize, replications: usize, seed: u64, procedure: ProcedureKind) -> Self {
        Self {
            n,
            replications,
            seed,
            alpha: 0.05,
            procedure,
            bootstrap_replications: 200,
        }
    }

    pub fn validated(self) -> Result<Self> {
        if self.n == 0 || self.replications == 0 {
            return Err(LateError::InvalidArgument(
                "sample size and replications must be >= 1".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(LateError::InvalidArgument(format!(
                "alpha = {} outside (0, 1)",
                self.alpha
            )));
        }
        Ok(self)
    }
}

/// Event counts behind the inequality
/// `P({-1, 1} in CS) >= P(-1 in CS) + P(1 in CS) - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerTally {
    pub replications: u64,
    pub contains_negative: u64,
    pub contains_positive: u64,
    pub contains_both: u64,
}

impl LedgerTally {
    fn from_sets(sets: &[SignSet]) -> Self {
        let count = |f: &dyn Fn(&SignSet) -> bool| sets.iter().filter(|s| f(s)).count() as u64;
        Self {
            replications: sets.len() as u64,
            contains_negative: count(&|s| s.contains(Sign::Negative)),
            contains_positive: count(&|s| s.contains(Sign::Positive)),
            contains_both: count(&|s| s.contains(Sign::Negative) && s.contains(Sign::Positive)),
        }
    }

    /// The inequality on counts, free of rounding.
    pub fn holds(&self) -> bool {
        self.contains_both + self.replications >= self.contains_negative + self.contains_positive
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryTally {
    pub set: String,
    pub base: u64,
    pub twin: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    /// Number of categories after pooling sparse ones.
    pub categories: usize,
}

impl ChiSquareTest {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinExperimentReport {
    pub procedure: String,
    pub config: ExperimentConfig,
    pub equivalence_distance: f64,
    pub target_sign_base: Sign,
    pub target_sign_twin: Sign,
    pub categories: Vec<CategoryTally>,
    pub equality_test: ChiSquareTest,
    pub rejects_at_one_percent: bool,
    /// Share of base-process samples whose set contains the base complier sign.
    pub coverage_base: f64,
    /// Share of twin samples whose set contains the twin complier sign.
    pub coverage_twin: f64,
    pub ledger_base: LedgerTally,
    pub ledger_twin: LedgerTally,
    pub ledger_holds: bool,
}

/// Simulates a procedure on samples from an observationally equivalent pair.
pub fn run_twin_experiment<T: Scalar>(
    theta: &Theta<T>,
    twin: &Theta<T>,
    config: &ExperimentConfig,
) -> Result<TwinExperimentReport> {
    let config = config.validated()?;
    let procedure = config
        .procedure
        .build::<T>(config.alpha, config.bootstrap_replications);
    run_twin_experiment_with(theta, twin, &config, procedure.as_ref())
}

/// [`run_twin_experiment`] for an arbitrary procedure; `config.procedure` is
/// ignored.
pub fn run_twin_experiment_with<T: Scalar>(
    theta: &Theta<T>,
    twin: &Theta<T>,
    config: &ExperimentConfig,
    procedure: &dyn SignProcedure<T>,
) -> Result<TwinExperimentReport> {
    let config = config.validated()?;
    let distance = verify_equivalence(theta, twin).as_f64();
    if !(distance <= EQUIVALENCE_GATE) {
        return Err(LateError::RefuseToRun(format!(
            "processes are not observationally equivalent (distance {distance:e} > {EQUIVALENCE_GATE:e})"
        )));
    }
    let target_base = Sign::of(theta.late_complier()?);
    let target_twin = Sign::of(twin.late_complier()?);

    let run = |process: &Theta<T>, tag: u64| -> Result<Vec<SignSet>> {
        (0..config.replications as u64)
            .into_par_iter()
            .map(|rep| {
                let data = sample(process, config.n, derive_seed(config.seed, &[tag, rep]))?;
                let stream = derive_seed(config.seed, &[PROCEDURE_STREAM, tag, rep]);
                Ok(procedure.confidence_set(&data, stream))
            })
            .collect()
    };
    let base_sets = run(theta, DGP_TAG_BASE)?;
    let twin_sets = run(twin, DGP_TAG_TWIN)?;

    let mut base_counts = [0u64; 8];
    let mut twin_counts = [0u64; 8];
    for s in &base_sets {
        base_counts[s.bits() as usize] += 1;
    }
    for s in &twin_sets {
        twin_counts[s.bits() as usize] += 1;
    }
    let categories = (0..8u8)
        .filter(|&b| base_counts[b as usize] + twin_counts[b as usize] > 0)
        .map(|b| CategoryTally {
            set: SignSet::from_bits(b).expect("3-bit mask").to_string(),
            base: base_counts[b as usize],
            twin: twin_counts[b as usize],
        })
        .collect::<Vec<_>>();
    let equality_test = homogeneity_test(
        &categories
            .iter()
            .map(|c| [c.base, c.twin])
            .collect::<Vec<_>>(),
    );

    let reps = config.replications as f64;
    let coverage = |sets: &[SignSet], target: Sign| {
        sets.iter().filter(|s| s.contains(target)).count() as f64 / reps
    };
    let ledger_base = LedgerTally::from_sets(&base_sets);
    let ledger_twin = LedgerTally::from_sets(&twin_sets);
    Ok(TwinExperimentReport {
        procedure: procedure.name().to_string(),
        config,
        equivalence_distance: distance,
        target_sign_base: target_base,
        target_sign_twin: target_twin,
        rejects_at_one_percent: equality_test.rejects(0.01),
        equality_test,
        categories,
        coverage_base: coverage(&base_sets, target_base),
        coverage_twin: coverage(&twin_sets, target_twin),
        ledger_holds: ledger_base.holds() && ledger_twin.holds(),
        ledger_base,
        ledger_twin,
    })
}

/// Chi-square test of homogeneity for a two-row contingency table given as
/// per-category `[row0, row1]` counts. Categories with expected count below 5
/// are pooled.
pub fn homogeneity_test(table: &[[u64; 2]]) -> ChiSquareTest {
    let totals = [
        table.iter().map(|c| c[0]).sum::<u64>() as f64,
        table.iter().map(|c| c[1]).sum::<u64>() as f64,
    ];
    let grand = totals[0] + totals[1];
    let degenerate = |categories| ChiSquareTest {
        statistic: 0.0,
        degrees_of_freedom: 0,
        p_value: 1.0,
        categories,
    };
    if totals[0] == 0.0 || totals[1] == 0.0 {
        return degenerate(table.len());
    }
    let min_share = totals[0].min(totals[1]) / grand;
    let sparse = |c: &[u64; 2]| ((c[0] + c[1]) as f64) * min_share < 5.0;

    let mut cells: Vec<[u64; 2]> = table.iter().filter(|c| !sparse(c)).copied().collect();
    let mut pooled = [0u64; 2];
    for c in table.iter().filter(|c| sparse(c)) {
        pooled[0] += c[0];
        pooled[1] += c[1];
    }
    if pooled[0] + pooled[1] > 0 {
        if sparse(&pooled) && !cells.is_empty() {
            let smallest = (0..cells.len())
                .min_by_key(|&i| cells[i][0] + cells[i][1])
                .expect("nonempty");
            cells[smallest][0] += pooled[0];
            cells[smallest][1] += pooled[1];
        } else {
            cells.push(pooled);
        }
    }
    if cells.len() < 2 {
        return degenerate(cells.len());
    }
    let statistic: f64 = cells
        .iter()
        .map(|c| {
            let column = (c[0] + c[1]) as f64;
            (0..2)
                .map(|r| {
                    let expected = totals[r] * column / grand;
                    let diff = c[r] as f64 - expected;
                    diff * diff / expected
                })
                .sum::<f64>()
        })
        .sum();
    let df = cells.len() - 1;
    let p_value = ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .sf(statistic);
    ChiSquareTest {
        statistic,
        degrees_of_freedom: df,
        p_value,
        categories: cells.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_rows_do_not_reject() {
        let t = homogeneity_test(&[[50, 50], [30, 30], [20, 20]]);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.degrees_of_freedom, 2);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_rows_reject() {
        let t = homogeneity_test(&[[100, 0], [0, 100]]);
        assert!(t.rejects(0.01));
        assert!((t.statistic - 200.0).abs() < 1e-9);
    }

    #[test]
    fn sparse_categories_are_pooled() {
        let t = homogeneity_test(&[[90, 92], [2, 1], [1, 3], [7, 4]]);
        assert_eq!(t.categories, 2);
        let single = homogeneity_test(&[[100, 100]]);
        assert_eq!((single.degrees_of_freedom, single.p_value), (0, 1.0));
    }

    #[test]
    fn ledger_is_a_counting_identity() {
        let sets = [
            SignSet::singleton(Sign::Negative),
            SignSet::singleton(Sign::Positive),
            SignSet::ALL,
            SignSet::from_signs([Sign::Negative, Sign::Zero]),
        ];
        let tally = LedgerTally::from_sets(&sets);
        assert_eq!(
            (tally.contains_negative, tally.contains_positive, tally.contains_both),
            (3, 2, 1)
        );
        assert!(tally.holds());
    }
}
