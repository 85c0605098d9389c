//! Numerical laboratory for the exterior harmonic potential, its level-set
//! functionals and the Ricci-pinching, volume-growth and boundary-Willmore
//! hypotheses on rotationally symmetric 3-manifolds `ds² + f(s)² g_{S²}`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod catalog;
pub mod error;
pub mod fit;
pub mod functionals;
pub mod metric;
pub mod potential;
pub mod quadrature;
pub mod roots;
mod serde_util;

pub use error::{Error, Result};
