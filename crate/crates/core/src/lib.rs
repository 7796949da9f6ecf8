//! Rotationally symmetric warped-product metrics with oscillating volume growth.
//!
//! Modules, bottom-up:
//! - [`magnitude`]: nonnegative reals that switch to log storage outside `f64` range
//! - [`quad`]: adaptive quadrature
//! - [`warp`]: concave piecewise warping functions and the oscillating schedule
//! - [`geodesy`]: geodesic distances on the model manifold
//! - [`volume`]: ball volumes, growth orders and comparison checks
//! - [`scales`]: slope scales of log-volume traces
//! - [`conedim`]: rescaled-ball samples, packing capacity and box dimension

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod conedim;
pub mod error;
pub mod geodesy;
pub mod magnitude;
pub mod quad;
pub mod scales;
pub mod volume;
pub mod warp;

pub use error::{Error, Result};
pub use magnitude::Magnitude;
pub use warp::{
    build_oscillating_warp, check_concave_join, find_join_point, WarpFunction, WarpPiece,
};
