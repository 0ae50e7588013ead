//! Supersymmetric quantum mechanics on complex coordinate contours.

pub mod band;
pub mod cli;
pub mod contours;
pub mod error;
pub mod exec;
pub mod grid;
pub mod operators;
pub mod riemann;
pub mod spectral;
pub mod susy;

pub use error::{Error, Result};
