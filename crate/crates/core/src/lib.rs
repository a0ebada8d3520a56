//! Sensitivity of local average treatment effects to violations of the
//! monotonicity assumption.
//!
//! The crate models instrumental-variable designs with a binary instrument
//! `Z`, a binary treatment `D` and an outcome `Y` as mixtures of four
//! compliance types, and provides:
//!
//! * [`dgp`]: exact algebra of potential-outcome processes with finite atomic
//!   outcome laws, their observable distribution and samplers;
//! * [`estimation`]: plug-in estimators, the assumption-free magnitude bound
//!   and percentile bootstrap intervals;
//! * [`boundary`]: the defier-share boundary `|beta| (k1 - k2)` below which the
//!   complier LATE has the sign of the IV estimand;
//! * [`adversarial`]: constructions of observationally equivalent processes
//!   with a complier LATE of the opposite sign;
//! * [`simulation`]: Monte Carlo harnesses for sign procedures and estimator
//!   consistency.
//!
//! Everything numeric is generic over [`Scalar`] (`f64` or `f32`); the
//! aliases at the crate root fix `f64` or `f32`.

// `!(a < b)` is used on purpose so that NaN inputs fail preconditions.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversarial;
pub mod boundary;
pub mod data;
pub mod dgp;
pub mod document;
pub mod error;
pub mod estimation;
pub mod fixtures;
pub mod scalar;
pub mod seed;
pub mod sign;
pub mod simulation;

pub use error::{LateError, Result};
pub use scalar::Scalar;
pub use sign::Sign;

pub type DistF64 = dgp::DiscreteDist<f64>;
pub type DistF32 = dgp::DiscreteDist<f32>;
pub type ThetaF64 = dgp::Theta<f64>;
pub type ThetaF32 = dgp::Theta<f32>;
pub type BinaryThetaF64 = dgp::BinaryTheta<f64>;
pub type BinaryThetaF32 = dgp::BinaryTheta<f32>;
pub type ObservedLawF64 = dgp::ObservedLaw<f64>;
pub type SampleDataF64 = data::SampleData<f64>;
pub type SampleDataF32 = data::SampleData<f32>;
pub type EstimatesF64 = estimation::Estimates<f64>;
pub type EstimatesF32 = estimation::Estimates<f32>;
pub type BoundaryReportF64 = boundary::BoundaryReport<f64>;
pub type ForgeConfigF64 = adversarial::ForgeConfig<f64>;
pub type ContinuousForgeF64 = adversarial::ContinuousForge<f64>;
pub type BinaryForgeF64 = adversarial::BinaryForge<f64>;
