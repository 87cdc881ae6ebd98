//! Reconstructing the first reflector of an obstacle from time-domain
//! enclosure data.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments,
    clippy::should_implement_trait
)]

pub mod config;
pub mod error;
pub mod geom;
pub mod indicator;
pub mod numeric;
pub mod obstacle;
pub mod potentials;
pub mod probe;
pub mod quadrature;
pub mod verify;
pub mod wavesim;

pub use error::{Error, Result};
