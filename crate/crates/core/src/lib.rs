//! Monte Carlo simulator and analytical channel model for diffusive
//! molecular communication with a spherical receiver that reversibly adsorbs
//! and desorbs information molecules.
//!
//! * [`geometry`], [`params`] and [`rng`] hold the shared domain types.
//! * [`analytic`] evaluates the expected spatial distribution, the surface
//!   reaction rate and the expected net adsorption per sampling window by
//!   inverting their transforms along the imaginary axis, with a Talbot
//!   inversion of the same Laplace-domain expressions as an independent check.
//! * [`simulator`] runs the particle-based Brownian simulation.

pub mod analytic;
pub mod geometry;
pub mod params;
pub mod rng;
pub mod simulator;

pub use geometry::Vec3;
pub use params::{ChannelParams, SampleSeries, SimConfig, ValidationError};
