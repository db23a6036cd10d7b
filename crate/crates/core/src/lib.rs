//! Power spectral densities of finite-state continuous-time Markov chains.
//!
//! The analytic pipeline goes generator -> stationary distribution ->
//! eigenstructure -> sum-of-Lorentzians PSD; the `scaling` module turns
//! power laws in that eigenstructure into predicted 1/f-type exponents, and
//! `simulate` checks both against Gillespie sample paths.

pub mod error;
pub mod markov;
pub mod models;
pub mod oracle;
pub mod scaling;
pub mod simulate;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use markov::{Generator, StateWeights, StationaryDistribution, Structure};
pub use spectral::{EigenStructure, LorentzianSpectrum, Normalization};
