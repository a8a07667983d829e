//! Quantum illumination with hyperentangled probes: exact Chernoff bounds in
//! the low-noise regime, receiver performance analytics in the high-noise
//! regime, and Monte Carlo photocounting experiments that check them.

pub mod chernoff;
pub mod correlations;
pub mod error;
pub mod fock;
pub mod montecarlo;
pub mod params;
pub mod probe;
pub mod receivers;

pub use error::{Error, Result};
pub use params::{ChannelParams, FfSfgParams, OpaParams, ProbeParams, Regime, RegimeReport};
