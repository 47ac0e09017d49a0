//! Exact dynamics, emission spectra, trapped-field loss rates and detuning
//! Fisher information for two emitters coupled to a one-dimensional
//! waveguide with propagation delay.

pub mod dynamics;
pub mod error;
pub mod fieldspace;
pub mod mathkit;
pub mod parallel;
pub mod qfi;
pub mod spectrum;

pub use error::{Error, Result};
