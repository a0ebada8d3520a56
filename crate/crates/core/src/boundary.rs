//! Phase-transition boundary `|beta| (k1 - k2)` and the classifiers that place
//! a process on the safe or the dangerous side of it.
//!
//! On the safe side the complier LATE has the sign of `beta`. On the
//! dangerous side (boundary included) an observationally equivalent process
//! with a complier LATE of the opposite sign can be built, see
//! [`crate::adversarial`].
//!
//! The rules are stated for `beta < 0`. A positive `beta` is handled by
//! negating outcomes (or recoding `Y -> 1 - Y` for 0/1 outcomes), which flips
//! the sign of every effect and leaves `|beta|` unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{LateError, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SafeSide,
    DangerSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Binary outcome, defier share known to be at most `eta`, `k2` away from zero.
    InteriorK2,
    /// Binary outcome, almost one-sided non-compliance; compares the testable
    /// cell probability P(Y = 1, D = 1 | Z = 0).
    OneSided,
    /// Outcomes bounded by `M`; compares `2 M eta`.
    GeneralBounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport<T = f64> {
    pub boundary: T,
    /// `eta`, the cell probability, or `2 M eta`, depending on the regime.
    pub compared: T,
    pub verdict: Verdict,
    pub regime: Regime,
    /// `boundary - compared`; the verdict is safe iff this is strictly positive.
    pub margin: T,
    /// A dangerous verdict only means the guarantee is lost, not that a
    /// sign-flipping twin is known to exist.
    pub sufficient_only: bool,
    /// Computed on the relabeled problem because `beta > 0`.
    pub relabeled: bool,
    /// Input problems that did not prevent classification.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl<T: Scalar> BoundaryReport<T> {
    fn new(boundary: T, compared: T, regime: Regime, relabeled: bool) -> Self {
        let margin = boundary - compared;
        let verdict = if margin > T::zero() {
            Verdict::SafeSide
        } else {
            Verdict::DangerSide
        };
        Self {
            boundary,
            compared,
            verdict,
            regime,
            margin,
            sufficient_only: regime == Regime::GeneralBounded,
            relabeled,
            warnings: Vec::new(),
        }
    }
}

fn check_orientation<T: Scalar>(k1: T, k2: T) -> Result<()> {
    if !(k1 > k2) {
        return Err(LateError::Orientation {
            k1: k1.as_f64(),
            k2: k2.as_f64(),
        });
    }
    Ok(())
}

fn check_beta<T: Scalar>(beta: T) -> Result<bool> {
    if beta == T::zero() || !beta.is_finite() {
        return Err(LateError::ZeroBeta);
    }
    Ok(beta > T::zero())
}

/// `|beta| (k1 - k2)`.
pub fn binary_boundary<T: Scalar>(beta: T, k1: T, k2: T) -> Result<T> {
    check_orientation(k1, k2)?;
    Ok(beta.abs() * (k1 - k2))
}

/// Binary outcomes with defier share at most `eta`.
pub fn classify_interior<T: Scalar>(beta: T, k1: T, k2: T, eta: T) -> Result<BoundaryReport<T>> {
    let boundary = binary_boundary(beta, k1, k2)?;
    let relabeled = check_beta(beta)?;
    if !(eta >= T::zero() && eta <= k2) {
        return Err(LateError::InvalidArgument(format!(
            "defier tolerance eta = {eta} must lie in [0, k2 = {k2}]"
        )));
    }
    Ok(BoundaryReport::new(boundary, eta, Regime::InteriorK2, relabeled))
}

/// Binary outcomes under almost one-sided non-compliance, classified by the
/// testable cell probability `P(Y = 1, D = 1 | Z = 0)`.
///
/// For `beta > 0` the outcome is recoded to `1 - Y`, whose cell probability is
/// `k2 - cell_prob`; this requires `cell_prob <= k2`.
///
/// With `beta < 0` a cell probability above `k2` cannot come from a single
/// population, but it happens with published summaries computed on different
/// samples. The comparison itself does not involve `k2`, so the verdict is
/// returned together with a warning.
pub fn classify_one_sided<T: Scalar>(
    beta: T,
    k1: T,
    k2: T,
    cell_prob: T,
) -> Result<BoundaryReport<T>> {
    let boundary = binary_boundary(beta, k1, k2)?;
    let relabeled = check_beta(beta)?;
    if cell_prob < T::zero() {
        return Err(LateError::InvalidArgument(format!(
            "cell probability {cell_prob} is negative"
        )));
    }
    let mut warnings = Vec::new();
    if cell_prob > k2 {
        let message =
            format!("P(Y = 1, D = 1 | Z = 0) = {cell_prob} exceeds P(D = 1 | Z = 0) = {k2}");
        if relabeled {
            return Err(LateError::InconsistentInputs(message));
        }
        warnings.push(message);
    }
    let compared = if relabeled { k2 - cell_prob } else { cell_prob };
    let mut report = BoundaryReport::new(boundary, compared, Regime::OneSided, relabeled);
    report.warnings = warnings;
    Ok(report)
}

/// Outcomes bounded by `bound` in absolute value: safe when
/// `2 bound eta < |beta| (k1 - k2)`. Sufficient only.
pub fn classify_general_bounded<T: Scalar>(
    beta: T,
    k1: T,
    k2: T,
    eta: T,
    bound: T,
) -> Result<BoundaryReport<T>> {
    let boundary = binary_boundary(beta, k1, k2)?;
    let relabeled = check_beta(beta)?;
    if !(bound > T::zero()) {
        return Err(LateError::InvalidArgument(format!(
            "outcome bound {bound} must be positive"
        )));
    }
    if !(eta >= T::zero()) {
        return Err(LateError::InvalidArgument(format!(
            "defier tolerance eta = {eta} must be non-negative"
        )));
    }
    Ok(BoundaryReport::new(
        boundary,
        T::two() * bound * eta,
        Regime::GeneralBounded,
        relabeled,
    ))
}
