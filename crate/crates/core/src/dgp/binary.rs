use super::dist::DiscreteDist;
use super::theta::{ComplianceType, PotentialOutcomeLaws, Theta, TypeShares};
use crate::error::{LateError, Result};
use crate::Scalar;

/// Binary-outcome process: type shares plus the mean of `Y(1)` and `Y(0)`
/// for each compliance type. Arrays are indexed by [`ComplianceType::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTheta<T = f64> {
    shares: TypeShares<T>,
    instrument_prob: T,
    treated_means: [T; 4],
    untreated_means: [T; 4],
}

impl<T: Scalar> BinaryTheta<T> {
    pub fn new(
        shares: TypeShares<T>,
        instrument_prob: T,
        treated_means: [T; 4],
        untreated_means: [T; 4],
    ) -> Result<Self> {
        let unit = T::zero()..=T::one();
        if treated_means
            .iter()
            .chain(untreated_means.iter())
            .any(|m| !unit.contains(m))
        {
            return Err(LateError::InvalidTheta(
                "binary outcome means must lie in [0, 1]".into(),
            ));
        }
        if !(instrument_prob > T::zero() && instrument_prob < T::one()) {
            return Err(LateError::InvalidTheta(format!(
                "P(Z = 1) = {instrument_prob} outside (0, 1)"
            )));
        }
        let shares = TypeShares::new(shares.always_taker, shares.complier, shares.defier)?;
        Ok(Self {
            shares,
            instrument_prob,
            treated_means,
            untreated_means,
        })
    }

    pub fn shares(&self) -> &TypeShares<T> {
        &self.shares
    }

    pub fn instrument_prob(&self) -> T {
        self.instrument_prob
    }

    pub fn treated_mean(&self, ty: ComplianceType) -> T {
        self.treated_means[ty.index()]
    }

    pub fn untreated_mean(&self, ty: ComplianceType) -> T {
        self.untreated_means[ty.index()]
    }

    pub fn treated_means(&self) -> &[T; 4] {
        &self.treated_means
    }

    pub fn untreated_means(&self) -> &[T; 4] {
        &self.untreated_means
    }

    pub fn k1(&self) -> T {
        self.shares.k1()
    }

    pub fn k2(&self) -> T {
        self.shares.k2()
    }

    pub fn late_complier(&self) -> Result<T> {
        if self.shares.complier <= T::zero() {
            return Err(LateError::NoCompliers);
        }
        let ty = ComplianceType::Complier;
        Ok(self.treated_mean(ty) - self.untreated_mean(ty))
    }

    pub fn late_defier(&self) -> Result<T> {
        if self.shares.defier <= T::zero() {
            return Err(LateError::NoDefiers);
        }
        let ty = ComplianceType::Defier;
        Ok(self.treated_mean(ty) - self.untreated_mean(ty))
    }

    pub fn iv_beta(&self) -> Result<T> {
        let (b, c) = (self.shares.complier, self.shares.defier);
        if b == c {
            return Err(LateError::WeakIv);
        }
        let complier_term = if b > T::zero() {
            b * self.late_complier()?
        } else {
            T::zero()
        };
        let defier_term = if c > T::zero() {
            c * self.late_defier()?
        } else {
            T::zero()
        };
        Ok((complier_term - defier_term) / (b - c))
    }

    /// P(Y = 1, D = 1 | Z = 0) = r11 a + r01 c.
    pub fn treated_success_control_arm(&self) -> T {
        use ComplianceType::*;
        self.treated_mean(AlwaysTaker) * self.shares.always_taker
            + self.treated_mean(Defier) * self.shares.defier
    }

    /// P(Y = 0, D = 0 | Z = 1) = (1 - t01) c + (1 - t00)(1 - a - b - c).
    pub fn untreated_failure_treatment_arm(&self) -> T {
        use ComplianceType::*;
        (T::one() - self.untreated_mean(Defier)) * self.shares.defier
            + (T::one() - self.untreated_mean(NeverTaker)) * self.shares.never_taker()
    }

    /// E(Y | D = d, Z = z), `None` for empty cells. Indexed `[d][z]`.
    pub fn observed_means(&self) -> [[Option<T>; 2]; 2] {
        use ComplianceType::*;
        let s = &self.shares;
        let cell = |parts: [(ComplianceType, bool); 2]| -> Option<T> {
            let total: T = parts.iter().map(|(ty, _)| s.get(*ty)).sum();
            if total <= T::zero() {
                return None;
            }
            let weighted: T = parts
                .iter()
                .map(|&(ty, treated)| {
                    let m = if treated {
                        self.treated_mean(ty)
                    } else {
                        self.untreated_mean(ty)
                    };
                    s.get(ty) * m
                })
                .sum();
            Some(weighted / total)
        };
        [
            [
                cell([(Complier, false), (NeverTaker, false)]),
                cell([(Defier, false), (NeverTaker, false)]),
            ],
            [
                cell([(AlwaysTaker, true), (Defier, true)]),
                cell([(AlwaysTaker, true), (Complier, true)]),
            ],
        ]
    }

    /// Equivalent atomic process with Bernoulli outcome laws and bound 1.
    pub fn to_theta(&self) -> Theta<T> {
        let laws = std::array::from_fn(|i| {
            PotentialOutcomeLaws::new(
                DiscreteDist::bernoulli(self.treated_means[i]).expect("validated mean"),
                DiscreteDist::bernoulli(self.untreated_means[i]).expect("validated mean"),
            )
        });
        Theta::new(self.shares, self.instrument_prob, T::one(), laws)
            .expect("binary process is a valid atomic process")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_theta() -> BinaryTheta {
        BinaryTheta::new(
            TypeShares::new(0.2, 0.4, 0.05).unwrap(),
            0.5,
            [0.6, 0.3, 0.9, 0.2],
            [0.1, 0.5, 0.4, 0.7],
        )
        .unwrap()
    }

    #[test]
    fn matches_atomic_representation() {
        let b = sample_theta();
        let t = b.to_theta();
        assert!((b.late_complier().unwrap() - t.late_complier().unwrap()).abs() < 1e-15);
        assert!((b.late_defier().unwrap() - t.late_defier().unwrap()).abs() < 1e-15);
        assert!((b.iv_beta().unwrap() - t.iv_beta().unwrap()).abs() < 1e-14);
        let law = t.observed_law();
        let means = b.observed_means();
        for d in [false, true] {
            for z in [false, true] {
                let m = law.cell(d, z).unwrap().mean();
                assert!((m - means[d as usize][z as usize].unwrap()).abs() < 1e-15);
            }
        }
        let cell = law.joint_mass(1.0, true, false);
        assert!((cell - b.treated_success_control_arm()).abs() < 1e-15);
        let cell = law.joint_mass(0.0, false, true);
        assert!((cell - b.untreated_failure_treatment_arm()).abs() < 1e-15);
    }

    #[test]
    fn rejects_means_outside_unit_interval() {
        let err = BinaryTheta::new(
            TypeShares::new(0.2, 0.4, 0.0).unwrap(),
            0.5,
            [0.6, 1.3, 0.9, 0.2],
            [0.1; 4],
        );
        assert!(err.is_err());
    }
}
