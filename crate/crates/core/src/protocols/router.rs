use num_complex::Complex64;

use super::{ProtocolResult, Router, WorkingPoint};
use crate::error::{Error, Result};
use crate::fock::{FockState, InteractionBasis, ModeId, OutcomeClass, OutcomeRecord, PairCoupling, Polarization};

/// Detected routing probabilities for a photon pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouterOutcome {
    pub uu: f64,
    pub uw: f64,
    pub ww: f64,
    /// Mass with fewer than two photons registered.
    pub lost: f64,
}

fn detectors() -> Vec<ModeId> {
    vec![ModeId::scalar("u"), ModeId::scalar("w")]
}

fn routed_state(photons: u8, wp: &WorkingPoint) -> Result<FockState> {
    if !(1..=2).contains(&photons) {
        return Err(Error::invalid(format!("router input must hold 1 or 2 photons, got {photons}")));
    }
    let medium = wp.medium()?;
    let a = ModeId::scalar("a");
    let input = FockState::from_monomials([a.clone()], &[(Complex64::new(1.0, 0.0), vec![(a, photons)])])?.normalized();
    let router = Router {
        tag: "mzi",
        input: "a",
        out_u: "u",
        out_w: "w",
        polarizations: &[Polarization::None],
        basis: InteractionBasis::Scalar,
        coupling: PairCoupling::SelfPhase,
    };
    router.apply(&input, &medium)?.apply_detector_efficiency(&detectors(), wp.p_de)
}

/// Sends `photons` (1 or 2) into port `a` of the nonlinear router.
///
/// Success means every photon is registered in the intended port: `u` for a
/// lone photon, `w` for a pair. Patterns with fewer clicks than photons are
/// counted as silent loss since the bare router has no herald.
pub fn run_router(photons: u8, wp: &WorkingPoint) -> Result<ProtocolResult> {
    let state = routed_state(photons, wp)?;
    let records = state
        .measure_all(&detectors())?
        .into_iter()
        .map(|mut r| {
            r.class = if r.clicks() < photons as u32 {
                OutcomeClass::SilentLoss
            } else if (photons == 1 && r.counts == [1, 0]) || (photons == 2 && r.counts == [0, 2]) {
                OutcomeClass::Success
            } else {
                OutcomeClass::HeraldedFailure
            };
            r
        })
        .collect::<Vec<OutcomeRecord>>();
    Ok(ProtocolResult::from_outcomes(detectors(), records))
}

/// Pair routing probabilities (both in `u`, split, both in `w`).
pub fn router_outcomes(wp: &WorkingPoint) -> Result<RouterOutcome> {
    let r = run_router(2, wp)?;
    let get = |c: [u8; 2]| r.outcomes.iter().filter(|o| o.counts == c).map(|o| o.probability).sum::<f64>();
    let (uu, uw, ww) = (get([2, 0]), get([1, 1]), get([0, 2]));
    Ok(RouterOutcome { uu, uw, ww, lost: r.total() - uu - uw - ww })
}
