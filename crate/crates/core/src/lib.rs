//! Density-matrix simulation of the quantum Fourier transform in the digital,
//! stepwise digital-analog and banged digital-analog paradigms, with Kraus
//! noise, Monte Carlo control errors and two-stage zero-noise extrapolation.

pub mod channels;
pub mod circuit;
pub mod compiler;
pub mod engine;
pub mod error;
pub mod mitigation;
pub mod state;
pub mod tensor;

pub use error::{Error, Result};
