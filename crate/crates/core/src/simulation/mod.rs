//! Monte Carlo harnesses: sign procedures run on samples from
//! observationally equivalent processes, and estimator consistency sweeps.

mod procedure;
mod sweep;
mod twin;

pub use procedure::{AlwaysAmbiguous, PlugInSign, ProcedureKind, SignProcedure, SignSet, TTestSign};
pub use sweep::{run_consistency_sweep, ConsistencyReport, SizeErrors};
pub use twin::{
    homogeneity_test, run_twin_experiment, run_twin_experiment_with, CategoryTally, ChiSquareTest,
    ExperimentConfig, LedgerTally, TwinExperimentReport, EQUIVALENCE_GATE,
};
