//! Identification results that do not rely on monotonicity: the magnitude
//! lower bound `max{|mu1|, |mu2|} >= |beta| * gamma` and sign identification
//! under `|mu1| >= |mu2|`.

use serde::{Deserialize, Serialize};

use crate::error::{LateError, Result};
use crate::sign::Sign;
use crate::Scalar;

/// `gamma = |k1 - k2| / (k1 + k2)`.
pub fn gamma<T: Scalar>(k1: T, k2: T) -> Result<T> {
    if k1 + k2 <= T::zero() {
        return Err(LateError::NoTakers);
    }
    Ok((k1 - k2).abs() / (k1 + k2))
}

/// Lower bound `|beta| * gamma` on the larger of the two LATE magnitudes,
/// valid for every process consistent with `(beta, k1, k2)`.
pub fn magnitude_lower_bound<T: Scalar>(beta: T, k1: T, k2: T) -> Result<T> {
    Ok(beta.abs() * gamma(k1, k2)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TightnessCertificate<T = f64> {
    /// Grid minimum of `max{|mu1|, |mu2|}`.
    pub minimum: T,
    pub closed_form: T,
    /// Defier-to-complier share ratio `c / b` at the minimum.
    pub argmin_ratio: T,
    /// Defier LATE at the minimum.
    pub argmin_defier_effect: T,
    /// Spacing of the defier-effect grid; the grid minimum is within half a
    /// spacing of the true minimum.
    pub grid_spacing: T,
}

/// Brute-force minimization of `max{|mu1|, |mu2|}` over all processes with
/// the given `(beta, k1, k2)`.
///
/// Writing `mu1 = r mu2 + (1 - r) beta` with `r = c / b in [0, k2 / k1]`, the
/// search covers `r` on a `grid_size` grid including both endpoints and `mu2`
/// on a `grid_size` grid over `[-2|beta|, 2|beta|]`.
pub fn lower_bound_tightness_certificate<T: Scalar>(
    beta: T,
    k1: T,
    k2: T,
    grid_size: usize,
) -> Result<TightnessCertificate<T>> {
    if beta == T::zero() {
        return Err(LateError::ZeroBeta);
    }
    if !(k2 >= T::zero()) || !(k1 > k2) {
        return Err(LateError::Orientation {
            k1: k1.as_f64(),
            k2: k2.as_f64(),
        });
    }
    if grid_size < 2 {
        return Err(LateError::InvalidArgument("grid_size must be >= 2".into()));
    }
    let steps = T::from_usize(grid_size - 1).unwrap();
    let max_ratio = k2 / k1;
    let reach = T::two() * beta.abs();
    let spacing = T::two() * reach / steps;
    let objective = |mu2: T, ratio: T| {
        let mu1 = ratio * mu2 + (T::one() - ratio) * beta;
        mu1.abs().max(mu2.abs())
    };

    let mut best = (T::infinity(), T::zero(), T::zero());
    for i in 0..grid_size {
        let ratio = if i + 1 == grid_size {
            max_ratio
        } else {
            max_ratio * T::from_usize(i).unwrap() / steps
        };
        for j in 0..grid_size {
            let mu2 = -reach + spacing * T::from_usize(j).unwrap();
            let value = objective(mu2, ratio);
            if value < best.0 {
                best = (value, ratio, mu2);
            }
        }
    }
    Ok(TightnessCertificate {
        minimum: best.0,
        closed_form: magnitude_lower_bound(beta, k1, k2)?,
        argmin_ratio: best.1,
        argmin_defier_effect: best.2,
        grid_spacing: spacing,
    })
}

/// Sign of the complier LATE under the modeling assumption `|mu1| >= |mu2|`,
/// which identifies it as `sign(beta)` when `cov(D, Z) > 0`.
pub fn sign_under_dominance<T: Scalar>(beta: T, cov_sign: Sign) -> Result<Sign> {
    if cov_sign != Sign::Positive {
        return Err(LateError::AssumptionNotApplicable(
            "sign identification under |mu1| >= |mu2| requires cov(D, Z) > 0".into(),
        ));
    }
    if beta == T::zero() {
        return Err(LateError::ZeroBeta);
    }
    Ok(Sign::of(beta))
}
