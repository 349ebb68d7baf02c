//! Link-budget simulation and parameter tuning for visible-light-communication
//! receivers that use a liquid-crystal reconfigurable intelligent surface
//! (LC-RIS) as a low-light amplifier.
//!
//! The crate is organised bottom-up:
//!
//! - [`quantities`]: unit-tagged scalars (mW, V/µm, dB, transmittance, ...)
//! - [`rte`]: one-dimensional radiative transfer (Beer-Lambert, emission,
//!   gain media) with a closed form and an RK4 integrator
//! - [`ris_device`]: tabulated transmittance curves, switching state and the
//!   Klein-Cook diffraction figure of merit
//! - [`link_budget`]: air channel, DC gain, range extension, operating modes
//! - [`tuning`]: attenuation fitting, field tuning, peak search, table audit
//! - [`datasets`]: embedded measurement table, curve CSV ingestion and JSON
//!   reports
//! - [`cli`]: the `ris-vlc` command-line front end

pub mod cli;
pub mod datasets;
mod error;
mod interp;
pub mod link_budget;
pub mod quantities;
pub mod ris_device;
pub mod rte;
pub mod tuning;

pub use error::{Error, ErrorKind, Result};
