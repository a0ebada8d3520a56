use super::dist::DiscreteDist;
use super::theta::{ComplianceType, Theta};
use crate::error::{LateError, Result};
use crate::Scalar;

/// Distribution of the observable triple `(Y, D, Z)`.
///
/// `cells[d][z]` is the law of `Y` given `D = d, Z = z`; a cell with zero
/// probability is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedLaw<T = f64> {
    pub instrument_prob: T,
    pub k1: T,
    pub k2: T,
    pub cells: [[Option<DiscreteDist<T>>; 2]; 2],
}

impl<T: Scalar> ObservedLaw<T> {
    pub fn cell(&self, d: bool, z: bool) -> Option<&DiscreteDist<T>> {
        self.cells[d as usize][z as usize].as_ref()
    }

    /// P(D = 1 | Z = z).
    pub fn take_up(&self, z: bool) -> T {
        if z {
            self.k1
        } else {
            self.k2
        }
    }

    /// E(Y | Z = z).
    pub fn arm_mean(&self, z: bool) -> T {
        let p = self.take_up(z);
        let treated = self.cell(true, z).map_or(T::zero(), |d| d.mean());
        let untreated = self.cell(false, z).map_or(T::zero(), |d| d.mean());
        p * treated + (T::one() - p) * untreated
    }

    /// E(Y | Z = 1) - E(Y | Z = 0).
    pub fn itt(&self) -> T {
        self.arm_mean(true) - self.arm_mean(false)
    }

    /// Wald ratio ITT / (k1 - k2).
    pub fn wald_ratio(&self) -> Result<T> {
        let first_stage = self.k1 - self.k2;
        if first_stage == T::zero() {
            return Err(LateError::WeakIv);
        }
        Ok(self.itt() / first_stage)
    }

    /// P(Y = y, D = d | Z = z) for the atom at `y`.
    pub fn joint_mass(&self, y: T, d: bool, z: bool) -> T {
        let p_d = if d { self.take_up(z) } else { T::one() - self.take_up(z) };
        self.cell(d, z).map_or(T::zero(), |law| {
            law.atoms()
                .iter()
                .filter(|a| (a.location - y).abs() <= T::tolerance())
                .map(|a| a.mass)
                .sum::<T>()
                * p_d
        })
    }
}

impl<T: Scalar> Theta<T> {
    /// Observed law via the type-mixture decomposition of each `(D, Z)` cell.
    pub fn observed_law(&self) -> ObservedLaw<T> {
        use ComplianceType::*;
        let s = self.shares();
        let cell = |parts: [(ComplianceType, bool); 2]| -> Option<DiscreteDist<T>> {
            let total: T = parts.iter().map(|(ty, _)| s.get(*ty)).sum();
            if total <= T::zero() {
                return None;
            }
            let components: Vec<(T, &DiscreteDist<T>)> = parts
                .iter()
                .map(|&(ty, treated)| {
                    let law = if treated {
                        self.treated_law(ty)
                    } else {
                        self.untreated_law(ty)
                    };
                    (s.get(ty) / total, law)
                })
                .collect();
            Some(DiscreteDist::mixture(&components).expect("mixture of valid laws"))
        };
        let treated_z1 = cell([(AlwaysTaker, true), (Complier, true)]);
        let treated_z0 = cell([(AlwaysTaker, true), (Defier, true)]);
        let untreated_z1 = cell([(Defier, false), (NeverTaker, false)]);
        let untreated_z0 = cell([(Complier, false), (NeverTaker, false)]);
        ObservedLaw {
            instrument_prob: self.instrument_prob(),
            k1: s.k1(),
            k2: s.k2(),
            cells: [[untreated_z0, untreated_z1], [treated_z0, treated_z1]],
        }
    }
}
