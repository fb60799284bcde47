//! One-sided fractional integrals on Sⁿ and on ball layers of ℝⁿ, their
//! Marchaud-type inverses, and Riesz potential inversion on spherical caps.
//!
//! Everything numeric is generic over [`real::Real`] (`f32` or `f64`); the
//! aliases below fix the precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ballops;
pub mod error;
pub mod field;
pub mod frac1d;
pub mod geometry;
pub mod grids;
pub mod marchaud;
pub mod oracle;
pub mod poisson;
pub mod quadrature;
pub mod real;
pub mod riesz;
pub mod special;
pub mod sphereops;
pub mod suite;
mod surface;

pub use error::{Error, Result};
pub use frac1d::{Side, Sided};
pub use geometry::{CapSpec, LayerSpec, PlanePoint, SpherePoint};
pub use grids::{Decay, Density, PolarGrid, RadialGrid, Surface};
pub use marchaud::InversionParams;

pub type Density64 = grids::Density<f64>;
pub type Density32 = grids::Density<f32>;
pub type SpherePoint64 = geometry::SpherePoint<f64>;
pub type SpherePoint32 = geometry::SpherePoint<f32>;
pub type PlanePoint64 = geometry::PlanePoint<f64>;
pub type PlanePoint32 = geometry::PlanePoint<f32>;
pub type CapSpec64 = geometry::CapSpec<f64>;
pub type CapSpec32 = geometry::CapSpec<f32>;
pub type InversionParams64 = marchaud::InversionParams<f64>;
pub type InversionParams32 = marchaud::InversionParams<f32>;
