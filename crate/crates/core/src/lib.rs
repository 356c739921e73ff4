//! Resonances of rank-one Friedrichs models in a constant field.

pub mod contours;
pub mod error;
pub mod numerics;
pub mod profiles;
pub mod quadrature;
pub mod resolvent;
pub mod rootfind;
pub mod trajectories;

pub use error::{Error, Result};
pub use numerics::{Real, ScaledComplex};

pub type ScaledComplex64 = ScaledComplex<f64>;
pub type ScaledComplex32 = ScaledComplex<f32>;
pub type ContourPath64 = contours::ContourPath<f64>;
