//! Fractional risk probabilities for jump-diffusions driven by asymmetric
//! alpha-stable noise with inverse-subordinator time changes.
//!
//! The crate provides two independent routes to the same quantities and the
//! scaffolding to cross-validate them:
//! - Monte Carlo: exact-distribution samplers for stable increments and
//!   subordinators, Euler-Maruyama first-exit simulation, and a
//!   subordination-based estimator of safety / recovery probabilities.
//! - PDE: a sub-Markovian generator discretization of the space-fractional
//!   operator and an L1 Caputo time-stepper for the time-fractional backward
//!   equation, yielding whole risk fields on a grid.

pub mod dataset;
pub mod error;
pub mod family;
pub mod generator;
pub mod grid;
pub mod linsolve;
pub mod mc;
pub mod rng;
pub mod sim;
pub mod solver;
pub mod special;
pub mod stable;
pub mod stats;
pub mod system;

pub use error::{FriskError, Result};
pub use rng::RngStream;
