use crate::dgp::{BinaryTheta, ComplianceType, TypeShares};
use crate::error::{LateError, Result};
use crate::Scalar;

use super::{verify_binary_membership, verify_equivalence, violated, BinaryForge};

use ComplianceType::{AlwaysTaker, Complier, NeverTaker};

/// Lower bound on the observable cell probabilities and the first stage that
/// the binary constructions require.
pub const DEFAULT_FLOOR: f64 = 0.05;

struct Base<T> {
    k1: T,
    k2: T,
    beta: T,
    /// P(Y = 1, D = 1 | Z = 0).
    success_control: T,
    /// P(Y = 0, D = 0 | Z = 1).
    failure_treatment: T,
}

fn base<T: Scalar>(theta: &BinaryTheta<T>) -> Result<Base<T>> {
    if theta.shares().defier != T::zero() {
        return Err(violated("c = 0"));
    }
    let (k1, k2) = (theta.k1(), theta.k2());
    if !(k1 > k2) {
        return Err(LateError::Orientation {
            k1: k1.as_f64(),
            k2: k2.as_f64(),
        });
    }
    let beta = theta.iv_beta()?;
    if !(beta < T::zero()) {
        return Err(violated("beta < 0"));
    }
    Ok(Base {
        k1,
        k2,
        beta,
        success_control: theta.treated_success_control_arm(),
        failure_treatment: theta.untreated_failure_treatment_arm(),
    })
}

/// Clamps round-off excursions outside `[lo, hi]`; anything further out means
/// the window is empty.
fn within<T: Scalar>(value: T, lo: T, hi: T, window: &str) -> Result<T> {
    let tol = T::tolerance();
    if value < lo - tol || value > hi + tol {
        return Err(LateError::ConstructionDegenerate(format!(
            "{window}: {value} outside [{lo}, {hi}]"
        )));
    }
    Ok(value.max(lo).min(hi))
}

/// Twin with a defier share of `c` built from a no-defier binary process.
fn construct<T: Scalar>(
    theta: &BinaryTheta<T>,
    base: &Base<T>,
    c: T,
    defier_cap: T,
    floor: T,
) -> Result<BinaryForge<T>> {
    let (zero, one) = (T::zero(), T::one());
    let Base { k1, k2, beta, .. } = *base;
    let first_stage = k1 - k2;
    let untreated_treatment_arm = one - k1;
    if !(c > zero) {
        return Err(violated("c~ > 0"));
    }
    if !(c <= untreated_treatment_arm) {
        return Err(violated("c~ <= 1-k1"));
    }
    // Exact sign of mu1 on the twin, before any construction.
    let slack = beta * first_stage + c.min(base.success_control)
        - (c - base.failure_treatment).max(zero);
    if slack < -T::tolerance() {
        return Err(violated(
            "beta*(k1-k2) + min(c~, P(Y=D=1|Z=0)) - max(0, c~ - P(Y=D=0|Z=1)) >= 0",
        ));
    }

    let a = k2 - c;
    let b = first_stage + c;
    let never = untreated_treatment_arm - c;
    let r11 = theta.treated_mean(AlwaysTaker);
    let r10 = theta.treated_mean(Complier);
    let t10 = theta.untreated_mean(Complier);
    let t00 = theta.untreated_mean(NeverTaker);

    let r01 = one.min(base.success_control / c);
    let r01 = within(
        r01,
        zero.max(one - (k2 - base.success_control) / c),
        one.min(base.success_control / c),
        "r~01 window",
    )?;
    let t01 = zero.max(one - base.failure_treatment / c);
    let t01 = within(
        t01,
        zero.max(one - base.failure_treatment / c),
        one.min(t00 * untreated_treatment_arm / c),
        "t~01 window",
    )?;
    let r11_twin = if a > zero {
        within((r11 * k2 - r01 * c) / a, zero, one, "r~11 window")?
    } else {
        zero
    };
    let r10_twin = within((r10 * first_stage + r01 * c) / b, zero, one, "r~10 window")?;
    let t10_twin = within((t10 * first_stage + t01 * c) / b, zero, one, "t~10 window")?;
    let t00_twin = if never > zero {
        within(
            (t00 * untreated_treatment_arm - t01 * c) / never,
            zero,
            one,
            "t~00 window",
        )?
    } else {
        zero
    };

    // Indexed by ComplianceType::index; unidentified means are 0.
    let twin = BinaryTheta::new(
        TypeShares::new(a, b, c)?,
        theta.instrument_prob(),
        [r11_twin, r10_twin, r01, zero],
        [zero, t10_twin, t01, t00_twin],
    )?;
    let mu1 = twin.late_complier()?;
    let mu2 = twin.late_defier()?;
    if mu1 < -T::tolerance() {
        return Err(LateError::ConstructionDegenerate(format!(
            "twin complier LATE {mu1} is negative"
        )));
    }
    let equivalence_distance = verify_equivalence(&theta.to_theta(), &twin.to_theta());
    let membership = verify_binary_membership(&twin, defier_cap, floor, k1, k2);
    Ok(BinaryForge {
        twin,
        truncation: None,
        c_tilde: c,
        mu1_twin: mu1,
        mu2_twin: mu2,
        equivalence_distance,
        membership,
        mu2_alternative_reading: None,
    })
}

fn check_floor<T: Scalar>(value: T, floor: T, name: &str) -> Result<()> {
    if value < floor {
        return Err(violated(&format!("{name} >= {floor}")));
    }
    Ok(())
}

/// Binary outcomes with a known cap `eta` on the defier share.
///
/// Requires `beta (k1 - k2) + eta >= 0`; below that the sign of the complier
/// LATE is identified and no twin exists.
pub fn forge_binary_interior<T: Scalar>(
    theta: &BinaryTheta<T>,
    eta: T,
    floor: T,
) -> Result<BinaryForge<T>> {
    let base = base(theta)?;
    if !(eta >= T::zero() && eta <= base.k2) {
        return Err(violated("0 <= eta <= k2"));
    }
    if base.beta * (base.k1 - base.k2) + eta < T::zero() {
        return Err(violated(
            "beta*(k1-k2) + eta >= 0 (eta below |beta|(k1-k2): complier LATE sign is identified)",
        ));
    }
    check_floor(base.success_control, floor, "P(Y=D=1|Z=0)")?;
    check_floor(base.failure_treatment, floor, "P(Y=D=0|Z=1)")?;
    let c = base.k2.min(eta);
    construct(theta, &base, c, eta, floor)
}

/// Binary outcomes under almost one-sided non-compliance. The defier share is
/// the testable cell probability `P(Y = 1, D = 1 | Z = 0)`.
pub fn forge_binary_onesided<T: Scalar>(theta: &BinaryTheta<T>, floor: T) -> Result<BinaryForge<T>> {
    let base = base(theta)?;
    check_floor(base.k1 - base.k2, floor, "k1-k2")?;
    check_floor(base.failure_treatment, floor, "P(Y=D=0|Z=1)")?;
    if base.beta * (base.k1 - base.k2) + base.success_control < T::zero() {
        return Err(violated(
            "beta*(k1-k2) + P(Y=D=1|Z=0) >= 0 (cell probability below |beta|(k1-k2): complier LATE sign is identified)",
        ));
    }
    let c = base.success_control;
    let cap = c;
    let mut forged = construct(theta, &base, c, cap, T::zero())?;
    forged.membership.cells_above_floor = base.failure_treatment >= floor;
    Ok(forged)
}
