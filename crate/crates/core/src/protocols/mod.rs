//! Optical circuits for the router, Bell measurements and GHZ generation,
//! simulated exactly and classified by heralding outcome.

mod bell;
mod ghz;
mod router;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    FockState, InteractionBasis, ModeId, NonlinearMediumSpec, OutcomeClass, OutcomeRecord, PairCoupling, Polarization,
};
use crate::rydberg::{detuned_params, DetunedParams};

pub use bell::{
    bell_detectors, bell_success_patterns, evl_detectors, run_bell_measurement, run_bell_measurement_average,
    run_evl_bell_measurement, run_evl_bell_measurement_average, BellState, TwoQubitInput,
};
pub use ghz::{ghz_detectors, ghz_fidelity, run_ghz, run_ghz_with, GhzOptions};
pub use router::{router_outcomes, run_router, RouterOutcome};

/// One point of parameter space shared by every protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingPoint {
    /// Conditional two-photon phase (radians).
    pub phi: f64,
    /// Blockaded optical depth; `f64::INFINITY` for a lossless medium.
    pub od_b: f64,
    /// Per-photon detection efficiency.
    pub p_de: f64,
    /// Single-photon phase from detuning; 0 on resonance.
    pub phi1: f64,
}

impl WorkingPoint {
    pub fn new(phi: f64, od_b: f64, p_de: f64) -> Self {
        WorkingPoint { phi, od_b, p_de, phi1: 0.0 }
    }

    pub fn lossless(phi: f64) -> Self {
        Self::new(phi, f64::INFINITY, 1.0)
    }

    pub fn with_phi1(self, phi1: f64) -> Self {
        WorkingPoint { phi1, ..self }
    }

    pub fn medium(&self) -> Result<DetunedParams> {
        if !(0.0..=1.0).contains(&self.p_de) {
            return Err(Error::invalid(format!("p_de = {} is not a probability", self.p_de)));
        }
        detuned_params(self.phi, self.phi1, self.od_b)
    }
}

/// Posterior state of one successful detection pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub counts: Vec<u8>,
    pub probability: f64,
    pub state: FockState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub detectors: Vec<ModeId>,
    pub outcomes: Vec<OutcomeRecord>,
    pub p_success: f64,
    pub p_heralded_failure: f64,
    pub p_silent_loss: f64,
    pub p_false_positive: f64,
    pub posteriors: Vec<Posterior>,
}

impl ProtocolResult {
    pub(crate) fn from_outcomes(detectors: Vec<ModeId>, mut outcomes: Vec<OutcomeRecord>) -> Self {
        outcomes.retain(|o| o.probability > 0.0);
        outcomes.sort_by(|a, b| a.counts.cmp(&b.counts).then(a.class.cmp(&b.class)));
        let sum = |c: OutcomeClass| outcomes.iter().filter(|o| o.class == c).map(|o| o.probability).sum();
        ProtocolResult {
            detectors,
            p_success: sum(OutcomeClass::Success),
            p_heralded_failure: sum(OutcomeClass::HeraldedFailure),
            p_silent_loss: sum(OutcomeClass::SilentLoss),
            p_false_positive: sum(OutcomeClass::FalsePositive),
            outcomes,
            posteriors: Vec::new(),
        }
    }

    /// Sum of the four classification buckets.
    pub fn total(&self) -> f64 {
        self.p_success + self.p_heralded_failure + self.p_silent_loss + self.p_false_positive
    }

    /// Probability-weighted mixture of results over the same detectors.
    pub(crate) fn mixture(parts: &[(f64, ProtocolResult)]) -> ProtocolResult {
        let detectors = parts.first().map(|(_, r)| r.detectors.clone()).unwrap_or_default();
        let mut merged: BTreeMap<(Vec<u8>, OutcomeClass), f64> = BTreeMap::new();
        for (w, r) in parts {
            for o in &r.outcomes {
                *merged.entry((o.counts.clone(), o.class)).or_default() += w * o.probability;
            }
        }
        let outcomes = merged
            .into_iter()
            .map(|((counts, class), probability)| OutcomeRecord { counts, class, probability })
            .collect();
        Self::from_outcomes(detectors, outcomes)
    }
}

/// Nonlinear router: a Mach-Zehnder interferometer with media of opposite
/// phase sign in its arms.
///
/// `input` enters the first beam splitter (the other port is vacuum), arms
/// `f` (+) and `g` (−) carry the media, and the second beam splitter sends
/// a lone photon to `out_u`. Photons in the listed polarizations are routed.
pub(crate) struct Router<'a> {
    pub tag: &'a str,
    pub input: &'a str,
    pub out_u: &'a str,
    pub out_w: &'a str,
    pub polarizations: &'a [Polarization],
    pub basis: InteractionBasis,
    pub coupling: PairCoupling,
}

impl Router<'_> {
    pub fn apply(&self, state: &FockState, medium: &DetunedParams) -> Result<FockState> {
        let vac = format!("{}.vac", self.tag);
        let f = format!("{}.f", self.tag);
        let g = format!("{}.g", self.tag);
        let pols = self.polarizations;
        let mode = |s: &str, p: Polarization| ModeId::new(s, p);
        let mut st = state.with_modes(
            pols.iter()
                .flat_map(|&p| [mode(&vac, p), mode(&f, p), mode(&g, p), mode(self.out_u, p), mode(self.out_w, p)]),
        );
        for &p in pols {
            st = st.apply_beamsplitter(&mode(self.input, p), &mode(&vac, p), &mode(&f, p), &mode(&g, p))?;
        }
        for (arm, sign) in [(&f, 1.0), (&g, -1.0)] {
            let spec = NonlinearMediumSpec {
                arm_phase_sign: sign,
                phi1: medium.phi1,
                tau1: medium.tau1,
                phi2: medium.phi2,
                tau2: medium.tau2,
                interaction_basis: self.basis,
                coupling: self.coupling,
            };
            let modes: Vec<ModeId> = pols.iter().map(|&p| mode(arm, p)).collect();
            st = st.apply_nonlinear_medium(&modes, &spec)?;
        }
        if medium.delta != 0.0 {
            for &p in pols {
                st = st.apply_phase_shift(&mode(&f, p), medium.delta)?;
            }
        }
        for &p in pols {
            st = st.apply_beamsplitter(&mode(&f, p), &mode(&g, p), &mode(self.out_w, p), &mode(self.out_u, p))?;
        }
        Ok(st)
    }
}

/// Registers every `spatial × polarization` combination.
pub(crate) fn register(state: &FockState, spatials: &[&str], pols: &[Polarization]) -> FockState {
    state.with_modes(spatials.iter().flat_map(|&s| pols.iter().map(move |&p| ModeId::new(s, p))))
}

pub(crate) const HV: [Polarization; 2] = [Polarization::H, Polarization::V];
pub(crate) const PM: [Polarization; 2] = [Polarization::Plus, Polarization::Minus];
