use serde::{Deserialize, Serialize};

use super::dist::DiscreteDist;
use crate::error::{LateError, Result};
use crate::Scalar;

/// Compliance type, determined by the pair of potential treatments
/// `(D(1), D(0))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplianceType {
    /// (1, 1)
    AlwaysTaker,
    /// (1, 0)
    Complier,
    /// (0, 1)
    Defier,
    /// (0, 0)
    NeverTaker,
}

impl ComplianceType {
    pub const ALL: [ComplianceType; 4] = [
        ComplianceType::AlwaysTaker,
        ComplianceType::Complier,
        ComplianceType::Defier,
        ComplianceType::NeverTaker,
    ];

    pub fn index(self) -> usize {
        match self {
            ComplianceType::AlwaysTaker => 0,
            ComplianceType::Complier => 1,
            ComplianceType::Defier => 2,
            ComplianceType::NeverTaker => 3,
        }
    }

    /// Realized treatment for instrument value `z`.
    pub fn treatment(self, z: bool) -> bool {
        match self {
            ComplianceType::AlwaysTaker => true,
            ComplianceType::Complier => z,
            ComplianceType::Defier => !z,
            ComplianceType::NeverTaker => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComplianceType::AlwaysTaker => "always_taker",
            ComplianceType::Complier => "complier",
            ComplianceType::Defier => "defier",
            ComplianceType::NeverTaker => "never_taker",
        }
    }
}

/// Population shares of always-takers, compliers and defiers; never-takers
/// take the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeShares<T = f64> {
    pub always_taker: T,
    pub complier: T,
    pub defier: T,
}

impl<T: Scalar> TypeShares<T> {
    pub fn new(always_taker: T, complier: T, defier: T) -> Result<Self> {
        let shares = Self {
            always_taker,
            complier,
            defier,
        };
        shares.validate()?;
        Ok(shares)
    }

    /// Shares implied by take-up rates `k1 = a + b`, `k2 = a + c` and a
    /// chosen defier share `c`.
    pub fn from_take_up(k1: T, k2: T, defier: T) -> Result<Self> {
        Self::new(k2 - defier, k1 - k2 + defier, defier)
    }

    /// `1 - a - b - c`, floored at zero against rounding.
    pub fn never_taker(&self) -> T {
        (T::one() - self.always_taker - self.complier - self.defier).max(T::zero())
    }

    pub fn get(&self, ty: ComplianceType) -> T {
        match ty {
            ComplianceType::AlwaysTaker => self.always_taker,
            ComplianceType::Complier => self.complier,
            ComplianceType::Defier => self.defier,
            ComplianceType::NeverTaker => self.never_taker(),
        }
    }

    /// P(D = 1 | Z = 1) = a + b.
    pub fn k1(&self) -> T {
        self.always_taker + self.complier
    }

    /// P(D = 1 | Z = 0) = a + c.
    pub fn k2(&self) -> T {
        self.always_taker + self.defier
    }

    fn validate(&self) -> Result<()> {
        let tol = T::tolerance();
        let all = [self.always_taker, self.complier, self.defier];
        if all.iter().any(|s| !s.is_finite() || *s < T::zero()) {
            return Err(LateError::InvalidTheta(format!(
                "type shares must be non-negative: {self:?}"
            )));
        }
        if self.always_taker + self.complier + self.defier > T::one() + tol {
            return Err(LateError::InvalidTheta(format!(
                "type shares exceed one: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Laws of `Y(1)` and `Y(0)` for one compliance type. The two potential
/// outcomes are independent given type.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialOutcomeLaws<T = f64> {
    pub treated: DiscreteDist<T>,
    pub untreated: DiscreteDist<T>,
}

impl<T: Scalar> PotentialOutcomeLaws<T> {
    pub fn new(treated: DiscreteDist<T>, untreated: DiscreteDist<T>) -> Self {
        Self { treated, untreated }
    }

    /// Both potential outcomes degenerate at `value`.
    pub fn constant(value: T) -> Self {
        Self::new(DiscreteDist::point(value), DiscreteDist::point(value))
    }

    pub fn effect(&self) -> T {
        self.treated.mean() - self.untreated.mean()
    }
}

/// A full potential-outcomes data-generating process: type shares, the
/// instrument probability, an outcome bound and per-type outcome laws.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta<T = f64> {
    shares: TypeShares<T>,
    instrument_prob: T,
    bound: T,
    laws: [PotentialOutcomeLaws<T>; 4],
}

impl<T: Scalar> Theta<T> {
    /// `laws` is indexed by [`ComplianceType::index`].
    pub fn new(
        shares: TypeShares<T>,
        instrument_prob: T,
        bound: T,
        laws: [PotentialOutcomeLaws<T>; 4],
    ) -> Result<Self> {
        shares.validate()?;
        if !(instrument_prob > T::zero() && instrument_prob < T::one()) {
            return Err(LateError::InvalidTheta(format!(
                "P(Z = 1) = {instrument_prob} outside (0, 1)"
            )));
        }
        if !(bound > T::zero()) || !bound.is_finite() {
            return Err(LateError::InvalidTheta(format!(
                "outcome bound {bound} must be positive"
            )));
        }
        for ty in ComplianceType::ALL {
            let law = &laws[ty.index()];
            for (which, d) in [("treated", &law.treated), ("untreated", &law.untreated)] {
                if !d.supported_within(bound) {
                    return Err(LateError::InvalidTheta(format!(
                        "{which} outcome law of {} leaves [-{bound}, {bound}]",
                        ty.name()
                    )));
                }
            }
        }
        Ok(Self {
            shares,
            instrument_prob,
            bound,
            laws,
        })
    }

    pub fn shares(&self) -> &TypeShares<T> {
        &self.shares
    }

    pub fn instrument_prob(&self) -> T {
        self.instrument_prob
    }

    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn laws(&self, ty: ComplianceType) -> &PotentialOutcomeLaws<T> {
        &self.laws[ty.index()]
    }

    pub fn all_laws(&self) -> &[PotentialOutcomeLaws<T>; 4] {
        &self.laws
    }

    pub fn treated_law(&self, ty: ComplianceType) -> &DiscreteDist<T> {
        &self.laws[ty.index()].treated
    }

    pub fn untreated_law(&self, ty: ComplianceType) -> &DiscreteDist<T> {
        &self.laws[ty.index()].untreated
    }

    pub fn k1(&self) -> T {
        self.shares.k1()
    }

    pub fn k2(&self) -> T {
        self.shares.k2()
    }

    /// Complier LATE: E[Y(1) - Y(0) | complier].
    pub fn late_complier(&self) -> Result<T> {
        if self.shares.complier <= T::zero() {
            return Err(LateError::NoCompliers);
        }
        Ok(self.laws(ComplianceType::Complier).effect())
    }

    /// Defier LATE: E[Y(1) - Y(0) | defier].
    pub fn late_defier(&self) -> Result<T> {
        if self.shares.defier <= T::zero() {
            return Err(LateError::NoDefiers);
        }
        Ok(self.laws(ComplianceType::Defier).effect())
    }

    /// IV estimand `(mu1 b - mu2 c) / (b - c)`.
    pub fn iv_beta(&self) -> Result<T> {
        let b = self.shares.complier;
        let c = self.shares.defier;
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

    /// Same process with every outcome negated.
    pub fn negated(&self) -> Self {
        let laws = self.laws.clone().map(|l| PotentialOutcomeLaws {
            treated: l.treated.negated(),
            untreated: l.untreated.negated(),
        });
        Self {
            laws,
            ..self.clone()
        }
    }

    /// Same process with the instrument labels swapped: compliers and defiers
    /// trade places and `P(Z = 1)` becomes `1 - P(Z = 1)`.
    pub fn instrument_swapped(&self) -> Self {
        let mut laws = self.laws.clone();
        laws.swap(
            ComplianceType::Complier.index(),
            ComplianceType::Defier.index(),
        );
        Self {
            shares: TypeShares {
                always_taker: self.shares.always_taker,
                complier: self.shares.defier,
                defier: self.shares.complier,
            },
            instrument_prob: T::one() - self.instrument_prob,
            bound: self.bound,
            laws,
        }
    }
}
