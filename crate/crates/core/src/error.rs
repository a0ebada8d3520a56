use thiserror::Error;

pub type Result<T, E = LateError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LateError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid DGP: {0}")]
    InvalidTheta(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("complier share is zero, complier LATE is undefined")]
    NoCompliers,
    #[error("defier share is zero, defier LATE is undefined")]
    NoDefiers,
    #[error("take-up is identical in both instrument arms, the IV estimand is undefined")]
    WeakIv,
    #[error("instrument takes a single value in the data")]
    DegenerateInstrument,
    #[error("sample is empty")]
    EmptySample,
    #[error("outcome is not binary; dichotomize it first")]
    NotBinary,
    #[error("nobody takes the treatment in either arm (k1 = k2 = 0)")]
    NoTakers,
    #[error("take-up rates not oriented: k1 = {k1} <= k2 = {k2}; relabel Z so that k1 > k2")]
    Orientation { k1: f64, k2: f64 },
    #[error("IV estimand is exactly zero; sign classification is undefined")]
    ZeroBeta,
    #[error("assumption not applicable: {0}")]
    AssumptionNotApplicable(String),
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("construction degenerate: {0}")]
    ConstructionDegenerate(String),
    #[error("bootstrap failed: {0}")]
    BootstrapFailed(String),
    #[error("refusing to run: {0}")]
    RefuseToRun(String),
}
