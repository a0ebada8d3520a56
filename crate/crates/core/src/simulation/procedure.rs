use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::SampleData;
use crate::error::{LateError, Result};
use crate::estimation::{estimate, Resampler, Statistic};
use crate::sign::Sign;
use crate::Scalar;

/// A subset of `{-1, 0, +1}`, stored as a 3-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignSet(u8);

impl SignSet {
    pub const ALL: SignSet = SignSet(0b111);

    fn bit(sign: Sign) -> u8 {
        1 << (sign.as_i8() + 1)
    }

    pub fn singleton(sign: Sign) -> Self {
        SignSet(Self::bit(sign))
    }

    pub fn from_signs<I: IntoIterator<Item = Sign>>(signs: I) -> Self {
        SignSet(signs.into_iter().fold(0, |m, s| m | Self::bit(s)))
    }

    pub fn contains(self, sign: Sign) -> bool {
        self.0 & Self::bit(sign) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Option<Self> {
        (bits <= 0b111).then_some(SignSet(bits))
    }

    pub fn signs(self) -> impl Iterator<Item = Sign> {
        [Sign::Negative, Sign::Zero, Sign::Positive]
            .into_iter()
            .filter(move |&s| self.contains(s))
    }
}

impl fmt::Display for SignSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.signs().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", inner.join(","))
    }
}

/// Maps a sample to a confidence set for the sign of the complier LATE.
/// Procedures see only the data, never the process that generated it.
pub trait SignProcedure<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    /// `seed` drives any internal randomization such as a bootstrap.
    fn confidence_set(&self, data: &SampleData<T>, seed: u64) -> SignSet;
}

/// `{sign(beta_hat)}`, or everything when `beta_hat` is undefined.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlugInSign;

impl<T: Scalar> SignProcedure<T> for PlugInSign {
    fn name(&self) -> &str {
        "plug-in-sign"
    }

    fn confidence_set(&self, data: &SampleData<T>, _seed: u64) -> SignSet {
        match estimate(data).and_then(|e| e.beta()) {
            Ok(beta) => SignSet::singleton(Sign::of(beta)),
            Err(_) => SignSet::ALL,
        }
    }
}

/// `{sign(beta_hat)}` when `|beta_hat|` exceeds the two-sided normal critical
/// value times a bootstrap standard error, everything otherwise.
#[derive(Debug, Clone, Copy)]
pub struct TTestSign {
    pub alpha: f64,
    pub bootstrap_replications: usize,
}

impl TTestSign {
    pub fn new(alpha: f64, bootstrap_replications: usize) -> Self {
        Self {
            alpha,
            bootstrap_replications,
        }
    }

    fn critical_value(&self) -> f64 {
        Normal::new(0.0, 1.0)
            .expect("standard normal")
            .inverse_cdf(1.0 - self.alpha / 2.0)
    }
}

impl<T: Scalar> SignProcedure<T> for TTestSign {
    fn name(&self) -> &str {
        "t-test-sign"
    }

    fn confidence_set(&self, data: &SampleData<T>, seed: u64) -> SignSet {
        let Ok(beta) = estimate(data).and_then(|e| e.beta()) else {
            return SignSet::ALL;
        };
        let Ok((draws, _)) =
            Resampler::new(data).draws(Statistic::Beta, self.bootstrap_replications, seed)
        else {
            return SignSet::ALL;
        };
        let se = crate::estimation::std_dev(&draws);
        if beta.abs() > T::lit(self.critical_value()) * se {
            SignSet::singleton(Sign::of(beta))
        } else {
            SignSet::ALL
        }
    }
}

/// Always `{-1, 0, +1}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysAmbiguous;

impl<T: Scalar> SignProcedure<T> for AlwaysAmbiguous {
    fn name(&self) -> &str {
        "always-ambiguous"
    }

    fn confidence_set(&self, _data: &SampleData<T>, _seed: u64) -> SignSet {
        SignSet::ALL
    }
}

/// Names of the built-in procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcedureKind {
    PlugInSign,
    TTestSign,
    AlwaysAmbiguous,
}

impl ProcedureKind {
    pub const ALL: [ProcedureKind; 3] = [
        ProcedureKind::PlugInSign,
        ProcedureKind::TTestSign,
        ProcedureKind::AlwaysAmbiguous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProcedureKind::PlugInSign => "plug-in-sign",
            ProcedureKind::TTestSign => "t-test-sign",
            ProcedureKind::AlwaysAmbiguous => "always-ambiguous",
        }
    }

    pub fn build<T: Scalar>(
        self,
        alpha: f64,
        bootstrap_replications: usize,
    ) -> Box<dyn SignProcedure<T>> {
        match self {
            ProcedureKind::PlugInSign => Box::new(PlugInSign),
            ProcedureKind::TTestSign => Box::new(TTestSign::new(alpha, bootstrap_replications)),
            ProcedureKind::AlwaysAmbiguous => Box::new(AlwaysAmbiguous),
        }
    }
}

impl fmt::Display for ProcedureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProcedureKind {
    type Err = LateError;

    fn from_str(s: &str) -> Result<Self> {
        ProcedureKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| LateError::InvalidArgument(format!("unknown procedure '{s}'")))
    }
}
