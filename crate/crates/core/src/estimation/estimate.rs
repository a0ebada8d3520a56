use serde::{Deserialize, Serialize};

use crate::data::{Observation, SampleData};
use crate::error::{LateError, Result};
use crate::Scalar;

/// Per-arm sufficient statistics. Counts are weights so the same code path
/// serves raw samples and multinomially resampled cell counts.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ArmSummary<T> {
    pub n: T,
    pub treated: T,
    pub outcome_sum: T,
    pub treated_success: T,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SampleSummary<T> {
    pub arms: [ArmSummary<T>; 2],
    pub binary: bool,
}

impl<T: Scalar> SampleSummary<T> {
    pub fn from_weighted<'a, I>(rows: I) -> Self
    where
        I: IntoIterator<Item = (&'a Observation<T>, T)>,
    {
        let mut arms = [ArmSummary::<T>::default(); 2];
        let mut binary = true;
        for (row, w) in rows {
            if w == T::zero() {
                continue;
            }
            let arm = &mut arms[row.z as usize];
            arm.n += w;
            arm.outcome_sum += w * row.y;
            if row.d {
                arm.treated += w;
                if row.y == T::one() {
                    arm.treated_success += w;
                }
            }
            binary &= row.y == T::zero() || row.y == T::one();
        }
        Self { arms, binary }
    }

    pub fn estimates(&self) -> Result<Estimates<T>> {
        let [control, treatment] = self.arms;
        if control.n == T::zero() || treatment.n == T::zero() {
            return Err(LateError::DegenerateInstrument);
        }
        let n = control.n + treatment.n;
        let k1 = treatment.treated / treatment.n;
        let k2 = control.treated / control.n;
        let itt = treatment.outcome_sum / treatment.n - control.outcome_sum / control.n;
        let first_stage = k1 - k2;
        let beta = (first_stage != T::zero()).then(|| itt / first_stage);
        let takers = k1 + k2;
        let gamma = (takers > T::zero()).then(|| first_stage.abs() / takers);
        let lower_bound = beta.zip(gamma).map(|(b, g)| b.abs() * g);
        let cell_prob = self
            .binary
            .then(|| control.treated_success / control.n);
        Ok(Estimates {
            n: n.to_usize().unwrap_or(0),
            pz_hat: treatment.n / n,
            k1_hat: k1,
            k2_hat: k2,
            beta_hat: beta,
            itt_hat: itt,
            gamma_hat: gamma,
            lower_bound_hat: lower_bound,
            cell_prob_hat: cell_prob,
        })
    }
}

/// Plug-in estimates from one sample.
///
/// `beta_hat` and `lower_bound_hat` are absent when `k1_hat = k2_hat`;
/// `gamma_hat` is absent when nobody is treated; `cell_prob_hat`
/// (P(Y = 1, D = 1 | Z = 0)) is only defined for 0/1 outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimates<T = f64> {
    pub n: usize,
    pub pz_hat: T,
    pub k1_hat: T,
    pub k2_hat: T,
    pub beta_hat: Option<T>,
    pub itt_hat: T,
    pub gamma_hat: Option<T>,
    pub lower_bound_hat: Option<T>,
    pub cell_prob_hat: Option<T>,
}

impl<T: Scalar> Estimates<T> {
    pub fn beta(&self) -> Result<T> {
        self.beta_hat.ok_or(LateError::WeakIv)
    }

    pub fn gamma(&self) -> Result<T> {
        self.gamma_hat.ok_or(LateError::NoTakers)
    }

    pub fn lower_bound(&self) -> Result<T> {
        self.beta()?;
        self.lower_bound_hat.ok_or(LateError::NoTakers)
    }

    pub fn cell_prob(&self) -> Result<T> {
        self.cell_prob_hat.ok_or(LateError::NotBinary)
    }
}

pub fn estimate<T: Scalar>(data: &SampleData<T>) -> Result<Estimates<T>> {
    SampleSummary::from_weighted(data.rows().iter().map(|r| (r, T::one()))).estimates()
}

/// Replaces each outcome with `1{y >= threshold}`.
pub fn dichotomize<T: Scalar>(data: &SampleData<T>, threshold: T) -> SampleData<T> {
    let rows = data
        .rows()
        .iter()
        .map(|r| {
            let y = if r.y >= threshold { T::one() } else { T::zero() };
            Observation::new(y, r.d, r.z)
        })
        .collect();
    SampleData::new(rows).expect("same nonempty rows")
}
