//! Adversarial twins: processes with the same observable distribution as a
//! no-defier process but a complier LATE of the opposite sign.
//!
//! [`forge_continuous`] handles general bounded outcomes by moving the upper
//! tail of the always-taker law and the lower tail of the never-taker law onto
//! a small defier population. [`forge_binary_interior`] and
//! [`forge_binary_onesided`] are the 0/1-outcome versions, which only need
//! to move means.

mod binary;
mod continuous;
mod verify;

pub use binary::{forge_binary_interior, forge_binary_onesided, DEFAULT_FLOOR};
pub use continuous::forge_continuous;
pub use verify::{
    verify_binary_membership, verify_equivalence, verify_membership, BinaryMembershipFlags,
    MembershipFlags,
};

use serde::{Deserialize, Serialize};

use crate::dgp::{BinaryTheta, Theta};
use crate::error::{LateError, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForgeConfig<T = f64> {
    pub eps1: T,
    pub eps2: T,
    pub bound: T,
    pub eta: T,
    /// Position of `delta` inside its open admissible interval.
    pub delta_rule: T,
}

impl<T: Scalar> ForgeConfig<T> {
    pub fn new(eps1: T, eps2: T, bound: T, eta: T) -> Result<Self> {
        Self {
            eps1,
            eps2,
            bound,
            eta,
            delta_rule: T::lit(0.5),
        }
        .validated()
    }

    pub fn with_delta_rule(self, delta_rule: T) -> Result<Self> {
        Self { delta_rule, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let open_unit = |x: T| x > T::zero() && x < T::one();
        if !open_unit(self.eps1) {
            return Err(LateError::InvalidArgument(format!("eps1 = {} outside (0, 1)", self.eps1)));
        }
        if !(self.eps2 > T::zero()) {
            return Err(LateError::InvalidArgument(format!("eps2 = {} must be positive", self.eps2)));
        }
        if !(self.bound > T::zero()) || !self.bound.is_finite() {
            return Err(LateError::InvalidArgument(format!("M = {} must be positive", self.bound)));
        }
        if !(self.eta >= T::zero()) {
            return Err(LateError::InvalidArgument(format!("eta = {} must be non-negative", self.eta)));
        }
        if !open_unit(self.delta_rule) {
            return Err(LateError::InvalidArgument(format!(
                "delta_rule = {} outside (0, 1)",
                self.delta_rule
            )));
        }
        Ok(self)
    }
}

/// Truncation points of the continuous construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation<T = f64> {
    /// Always-taker outcomes above `b1` are handed to the defiers.
    pub b1: T,
    /// Never-taker outcomes at or below `b2` are handed to the defiers.
    pub b2: T,
    pub delta: T,
}

/// A forged twin with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ForgeResult<T, Twin, Flags> {
    pub twin: Twin,
    pub truncation: Option<Truncation<T>>,
    pub c_tilde: T,
    pub mu1_twin: T,
    pub mu2_twin: T,
    pub equivalence_distance: T,
    pub membership: Flags,
    /// Defier LATE if the defiers' untreated law were taken to be the
    /// never-taker law itself instead of its lower tail.
    pub mu2_alternative_reading: Option<T>,
}

pub type ContinuousForge<T = f64> = ForgeResult<T, Theta<T>, MembershipFlags>;
pub type BinaryForge<T = f64> = ForgeResult<T, BinaryTheta<T>, BinaryMembershipFlags>;

pub(crate) fn violated(inequality: &str) -> LateError {
    LateError::PreconditionViolated(inequality.to_string())
}
