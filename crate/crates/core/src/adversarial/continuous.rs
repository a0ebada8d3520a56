use crate::dgp::{ComplianceType, DiscreteDist, PotentialOutcomeLaws, Theta, TypeShares};
use crate::error::{LateError, Result};
use crate::Scalar;

use super::{
    verify_equivalence, verify_membership, violated, ContinuousForge, ForgeConfig, Truncation,
};

use ComplianceType::{AlwaysTaker, Complier, NeverTaker};

/// Builds a twin of a no-defier process with `beta < 0` whose complier and
/// defier LATEs both exceed `-beta`.
///
/// The defier share is `eta`. Defiers take the always-taker outcomes above
/// `b1` when treated and the never-taker outcomes at or below `b2` when not,
/// and the always-taker, complier and never-taker laws are rebalanced so that
/// every observable cell is unchanged.
pub fn forge_continuous<T: Scalar>(
    theta: &Theta<T>,
    config: &ForgeConfig<T>,
) -> Result<ContinuousForge<T>> {
    let config = config.validated()?;
    let (eps1, eps2, eta) = (config.eps1, config.eps2, config.eta);
    let one = T::one();

    if theta.shares().defier != T::zero() {
        return Err(violated("c = 0"));
    }
    let beta = theta.iv_beta()?;
    if !(beta < T::zero()) {
        return Err(violated("beta < 0"));
    }
    let (k1, k2) = (theta.k1(), theta.k2());
    let first_stage = k1 - k2;
    if !(eta > T::zero()) {
        return Err(violated("eta > 0"));
    }
    if !(eta < eps1 * k2) {
        return Err(violated("eta < eps1*k2"));
    }
    if !(eta < eps1 * (one - k1)) {
        return Err(violated("eta < eps1*(1-k1)"));
    }
    if !(eta < eps1 * first_stage) {
        return Err(violated("eta < eps1*(k1-k2)"));
    }
    let three_beta = T::lit(3.0) * beta.abs();
    if !(three_beta / eta < eps2 / first_stage) {
        return Err(violated("3|beta|/eta < eps2/(k1-k2)"));
    }
    let supported = theta.all_laws().iter().all(|l| {
        l.treated.supported_within(config.bound) && l.untreated.supported_within(config.bound)
    });
    if !supported {
        return Err(violated("support in [-M, M]"));
    }

    let f11 = theta.treated_law(AlwaysTaker);
    let f10 = theta.treated_law(Complier);
    let g10 = theta.untreated_law(Complier);
    let g00 = theta.untreated_law(NeverTaker);
    let q1 = f11.quantile(one - eps1)?;
    let q2 = g00.quantile(eps1)?;
    if !(q1 - q2 > eps2) {
        return Err(violated("Q1(1-eps1) - Q2(eps1) > eps2"));
    }

    let delta = config.delta_rule * (eps2 - three_beta * first_stage / eta);
    let b1 = q1 - delta;
    let b2 = q2;
    let c = eta;
    let b = first_stage + c;
    let a = k2 - c;

    let f01 = f11.condition_above(b1)?;
    let g01 = g00.condition_at_most(b2)?;
    let f11_twin = DiscreteDist::signed_combination(&[(k2 / a, f11), (-c / a, &f01)])?;
    let f10_twin = DiscreteDist::mixture(&[(first_stage / b, f10), (c / b, &f01)])?;
    let never = one - k1 - c;
    let g00_twin =
        DiscreteDist::signed_combination(&[((one - k1) / never, g00), (-c / never, &g01)])?;
    let g10_twin = DiscreteDist::mixture(&[(first_stage / b, g10), (c / b, &g01)])?;
    let origin = DiscreteDist::point(T::zero());

    // Indexed by ComplianceType::index.
    let laws = [
        PotentialOutcomeLaws::new(f11_twin, origin.clone()),
        PotentialOutcomeLaws::new(f10_twin, g10_twin),
        PotentialOutcomeLaws::new(f01.clone(), g01),
        PotentialOutcomeLaws::new(origin, g00_twin),
    ];
    let twin = Theta::new(
        TypeShares::new(a, b, c)?,
        theta.instrument_prob(),
        config.bound,
        laws,
    )?;

    let mu1 = twin.late_complier()?;
    let mu2 = twin.late_defier()?;
    if !(mu1 > -beta) || !(mu2 > -beta) {
        return Err(LateError::ConstructionDegenerate(format!(
            "twin LATEs mu1 = {mu1}, mu2 = {mu2} do not exceed -beta = {}",
            -beta
        )));
    }
    let equivalence_distance = verify_equivalence(theta, &twin);
    let membership = verify_membership(&twin, &config, beta, k1, k2);
    Ok(ContinuousForge {
        truncation: Some(Truncation { b1, b2, delta }),
        c_tilde: c,
        mu1_twin: mu1,
        mu2_twin: mu2,
        equivalence_distance,
        membership,
        mu2_alternative_reading: Some(f01.mean() - g00.mean()),
        twin,
    })
}
