//! Exact few-photon states and the optical elements acting on them.

mod channel;
mod linear;
mod measure;
mod mode;
mod state;

pub use channel::{detector_sink, line_sink, medium_sink, InteractionBasis, NonlinearMediumSpec, PairCoupling};
pub use linear::{ElementSpec, LinearMap};
pub use measure::{count_distribution, OutcomeClass, OutcomeRecord};
pub use mode::{ModeId, Polarization};
pub use state::{FockState, Occupation, PRUNE_THRESHOLD};
