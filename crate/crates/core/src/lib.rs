//! Few-photon Fock-space simulation of nonlinear-router photonic protocols.
//!
//! The crate has two independent routes to every success probability:
//!
//! * [`protocols`] builds each optical circuit from the elements in [`fock`]
//!   and enumerates detector outcomes exactly;
//! * [`analytics`] evaluates the closed-form expressions directly.
//!
//! [`rydberg`] maps the blockaded optical depth `OD_b` onto the phase/loss
//! parameters of the nonlinear media, and [`sweep`] drives parameter grids
//! for the command-line front end.

pub mod analytics;
pub mod error;
pub mod fock;
pub mod protocols;
pub mod rydberg;
pub mod sweep;

pub use error::{Error, Result};
pub use fock::{FockState, ModeId, Polarization};
pub use protocols::WorkingPoint;
