//! Contraction, partial contraction and semi-contraction toolkit.
//!
//! Matrix measures and seminorms ([`linalg`]), vector-field models
//! ([`system`]), sampled certificates for the contraction conditions
//! ([`certify`]), RK4 verification of the resulting decay estimates
//! ([`integrate`]) and a method-of-lines reaction-diffusion solver
//! ([`rdpde`]).
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the precision for the common double-precision case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod export;
pub mod integrate;
pub mod linalg;
pub mod rdpde;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::DenseMatrix<f64>;
pub type Norm = linalg::NormKind<f64>;
pub type Map = linalg::SurjectiveMap<f64>;
pub type Model = system::VectorFieldModel<f64>;
pub type Ltv = system::LtvSystem<f64>;
pub type Rate = system::RateFunction<f64>;
pub type Cert = certify::Certificate<f64>;
pub type Report = integrate::DecayReport<f64>;
pub type Scenario = rdpde::RdScenario<f64>;

pub type Matrix32 = linalg::DenseMatrix<f32>;
pub type Norm32 = linalg::NormKind<f32>;
pub type Map32 = linalg::SurjectiveMap<f32>;
pub type Model32 = system::VectorFieldModel<f32>;
pub type Ltv32 = system::LtvSystem<f32>;
pub type Rate32 = system::RateFunction<f32>;
pub type Cert32 = certify::Certificate<f32>;
pub type Report32 = integrate::DecayReport<f32>;
pub type Scenario32 = rdpde::RdScenario<f32>;
