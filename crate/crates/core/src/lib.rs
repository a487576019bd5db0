//! Numerics for the liquid drop model with a background attraction, restricted
//! to configurations made of balls.
//!
//! The energy of a set `Ω ⊂ R^d` is
//!
//! ```text
//! E_Z(Ω) = Per(Ω) + ∬_{Ω×Ω} |x − y|^{-s} dx dy − Z ∫_Ω |x|^{-p} dx,   0 < p < s < d.
//! ```
//!
//! For small `Z` minimizers split into well separated droplets whose rescaled
//! positions minimize a point interaction energy `F_{N,m}`. This crate provides
//! the pieces needed to study that regime numerically:
//!
//! * [`model`]: parameters, ball geometry and single-ball energies,
//! * [`integrals`]: Riesz cross energies and confinement integrals over balls,
//! * [`interaction`]: the point energy `F_{N,m}` and its gradient,
//! * [`optimizer`]: multistart minimization of `F_{N,m}` and of mass splits,
//! * [`asymptotics`]: small-`Z` expansion, separation scale and threshold checks,
//! * [`oracle`]: brute-force reference computations used to validate the above.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod asymptotics;
mod error;
pub mod integrals;
pub mod interaction;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod quad;
pub mod rng;
pub mod special;

pub use error::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub use asymptotics::{ExpansionReport, GeneralizedConfig};
pub use integrals::{IntegralMethod, Method, QuadratureResult};
pub use interaction::{EnergyParts, MassVector, PointConfiguration};
pub use model::{BallDroplet, Model, ModelParams, RieszConstants};
pub use optimizer::{ConfigResult, OptimizerOptions, PartitionResult};
pub use oracle::OracleRecord;
pub use rng::RngSeed;
