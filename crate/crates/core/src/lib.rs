//! Quantum speed limit and non-Markovianity of a driven qubit moving inside
//! a leaky cavity bounded by a perfect mirror.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod metrics;
pub mod model;
pub mod presets;
pub mod quadrature;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
