//! Stationary radially symmetric compressible flow outside the unit ball in
//! `R^n`, `n >= 2`: viscous (Navier-Stokes) and inviscid (Euler) solutions,
//! the inflow boundary layer, and numerical studies of the inviscid limit.

// `!(x > 0.0)` is used on purpose so that NaN is rejected along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary_layer;
pub mod cli;
pub mod error;
pub mod euler;
pub mod gas;
pub mod limit_lab;
pub mod ns;
pub mod numerics;
pub mod profile;

pub use error::{Error, Result};
pub use gas::{FlowConfig, GasLaw, Regime};
pub use numerics::{RadialGrid, ToleranceSet};
pub use profile::{FlowState, RadialProfile};
