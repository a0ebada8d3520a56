use serde::{Deserialize, Serialize};

use crate::dgp::{BinaryTheta, ComplianceType, Theta};
use crate::sign::Sign;
use crate::Scalar;

use super::ForgeConfig;

/// Largest discrepancy between the observable distributions of two processes:
/// the total-variation distance of each `Y | (D, Z)` cell and the gaps in
/// `P(Z = 1)`, `k1` and `k2`.
pub fn verify_equivalence<T: Scalar>(theta: &Theta<T>, twin: &Theta<T>) -> T {
    let left = theta.observed_law();
    let right = twin.observed_law();
    let mut worst = (left.instrument_prob - right.instrument_prob)
        .abs()
        .max((left.k1 - right.k1).abs())
        .max((left.k2 - right.k2).abs());
    for d in [false, true] {
        for z in [false, true] {
            let gap = match (left.cell(d, z), right.cell(d, z)) {
                (Some(a), Some(b)) => a.total_variation(b),
                (None, None) => T::zero(),
                _ => T::one(),
            };
            worst = worst.max(gap);
        }
    }
    worst
}

/// One flag per defining clause of the constrained parameter space: known
/// take-up, bounded outcomes, reproduced IV estimand, complier LATE at least
/// as large as `|beta|`, sign agreement of the two LATEs and a defier share of
/// at most `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipFlags {
    pub shares_valid: bool,
    pub take_up_treatment_arm: bool,
    pub take_up_control_arm: bool,
    pub outcome_bound: bool,
    pub late_identity: bool,
    pub complier_magnitude: bool,
    pub sign_agreement: bool,
    pub defier_share: bool,
}

impl MembershipFlags {
    pub fn all(&self) -> bool {
        self.shares_valid
            && self.take_up_treatment_arm
            && self.take_up_control_arm
            && self.outcome_bound
            && self.late_identity
            && self.complier_magnitude
            && self.sign_agreement
            && self.defier_share
    }

    pub fn failed_clauses(&self) -> Vec<&'static str> {
        [
            (self.shares_valid, "shares"),
            (self.take_up_treatment_arm, "a + b = k1"),
            (self.take_up_control_arm, "a + c = k2"),
            (self.outcome_bound, "|Y| <= M"),
            (self.late_identity, "(mu1 b - mu2 c) / (b - c) = beta"),
            (self.complier_magnitude, "|mu1| >= |beta|"),
            (self.sign_agreement, "sign(mu1) = sign(mu2)"),
            (self.defier_share, "0 <= c <= eta"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }
}

fn close<T: Scalar>(a: T, b: T, scale: T) -> bool {
    (a - b).abs() <= T::tolerance() * scale.max(T::one())
}

/// Checks each clause of the parameter-space definition on `twin`, relative
/// to the base process's `beta`, `k1` and `k2`.
pub fn verify_membership<T: Scalar>(
    twin: &Theta<T>,
    config: &ForgeConfig<T>,
    base_beta: T,
    base_k1: T,
    base_k2: T,
) -> MembershipFlags {
    let tol = T::tolerance();
    let s = twin.shares();
    let shares_valid = [s.always_taker, s.complier, s.defier]
        .iter()
        .all(|&x| x >= T::zero() && x <= T::one())
        && s.always_taker + s.complier + s.defier <= T::one() + tol;
    let outcome_bound = twin.all_laws().iter().all(|l| {
        l.treated.supported_within(config.bound) && l.untreated.supported_within(config.bound)
    });
    // The defier effect is read off the defier laws even when c = 0.
    let mu1 = twin.laws(ComplianceType::Complier).effect();
    let mu2 = twin.laws(ComplianceType::Defier).effect();
    let late_identity = match twin.iv_beta() {
        Ok(beta) => close(beta, base_beta, config.bound / (s.complier - s.defier).abs()),
        Err(_) => false,
    };
    MembershipFlags {
        shares_valid,
        take_up_treatment_arm: close(s.k1(), base_k1, T::one()),
        take_up_control_arm: close(s.k2(), base_k2, T::one()),
        outcome_bound,
        late_identity,
        complier_magnitude: mu1.abs() >= base_beta.abs() - tol,
        sign_agreement: Sign::of(mu1) == Sign::of(mu2),
        defier_share: s.defier >= T::zero() && s.defier <= config.eta + tol,
    }
}

/// Clauses of the binary-outcome parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryMembershipFlags {
    pub shares_valid: bool,
    pub take_up_treatment_arm: bool,
    pub take_up_control_arm: bool,
    pub outcomes_binary: bool,
    pub cells_above_floor: bool,
    pub defier_share: bool,
}

impl BinaryMembershipFlags {
    pub fn all(&self) -> bool {
        self.shares_valid
            && self.take_up_treatment_arm
            && self.take_up_control_arm
            && self.outcomes_binary
            && self.cells_above_floor
            && self.defier_share
    }
}

pub fn verify_binary_membership<T: Scalar>(
    twin: &BinaryTheta<T>,
    defier_cap: T,
    floor: T,
    base_k1: T,
    base_k2: T,
) -> BinaryMembershipFlags {
    let tol = T::tolerance();
    let s = twin.shares();
    let unit = T::zero()..=T::one();
    BinaryMembershipFlags {
        shares_valid: [s.always_taker, s.complier, s.defier]
            .iter()
            .all(|x| unit.contains(x))
            && s.always_taker + s.complier + s.defier <= T::one() + tol,
        take_up_treatment_arm: close(s.k1(), base_k1, T::one()),
        take_up_control_arm: close(s.k2(), base_k2, T::one()),
        outcomes_binary: twin
            .treated_means()
            .iter()
            .chain(twin.untreated_means())
            .all(|m| unit.contains(m)),
        cells_above_floor: twin.treated_success_control_arm() >= floor - tol
            && twin.untreated_failure_treatment_arm() >= floor - tol,
        defier_share: s.defier >= T::zero() && s.defier <= defier_cap + tol,
    }
}
