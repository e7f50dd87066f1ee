use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mode::{ModeId, Polarization};
use super::state::{binomial, FockState, Occupation};
use crate::error::{Error, Result};

/// Polarization basis in which a medium's photon-photon interaction is diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InteractionBasis {
    Rectilinear,
    Diagonal,
    Scalar,
}

impl InteractionBasis {
    fn admits(self, pol: Polarization) -> bool {
        match self {
            InteractionBasis::Rectilinear => pol.is_rectilinear(),
            InteractionBasis::Diagonal => pol.is_diagonal(),
            InteractionBasis::Scalar => pol == Polarization::None,
        }
    }
}

/// Which photon pairs inside one arm pick up the conditional phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairCoupling {
    /// Only two photons in the same polarization mode interact; orthogonal
    /// photons each see the single-photon response.
    SelfPhase,
    /// Any two photons in the arm interact (polarization-blind blockade).
    AnyPair,
}

/// Phase/loss response of the nonlinear medium in one interferometer arm.
///
/// A lone photon picks up `sign·phi1` and is absorbed with probability
/// `tau1`; a second photon inside the blockade picks up `sign·phi2` and is
/// absorbed with probability `tau2`. The conditional phase is `phi2 − phi1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearMediumSpec {
    pub arm_phase_sign: f64,
    pub phi1: f64,
    pub tau1: f64,
    pub phi2: f64,
    pub tau2: f64,
    pub interaction_basis: InteractionBasis,
    pub coupling: PairCoupling,
}

impl NonlinearMediumSpec {
    /// On-resonance medium: no single-photon phase or loss.
    pub fn resonant(sign: f64, phi: f64, tau: f64, basis: InteractionBasis, coupling: PairCoupling) -> Self {
        NonlinearMediumSpec {
            arm_phase_sign: sign,
            phi1: 0.0,
            tau1: 0.0,
            phi2: phi,
            tau2: tau,
            interaction_basis: basis,
            coupling,
        }
    }

    pub fn conditional_phase(&self) -> f64 {
        self.phi2 - self.phi1
    }

    fn validate(&self) -> Result<()> {
        if self.arm_phase_sign != 1.0 && self.arm_phase_sign != -1.0 {
            return Err(Error::invalid(format!("arm phase sign must be ±1, got {}", self.arm_phase_sign)));
        }
        for (name, t) in [("tau1", self.tau1), ("tau2", self.tau2)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!("{name} = {t} is not a probability")));
            }
        }
        if !self.phi1.is_finite() || !self.phi2.is_finite() {
            return Err(Error::invalid("non-finite medium phase"));
        }
        Ok(())
    }
}

/// Sink that collects photons absorbed in `mode`'s medium.
pub fn medium_sink(mode: &ModeId) -> ModeId {
    ModeId::sink(format!("{}.loss", mode.spatial), mode.polarization)
}

/// Sink that collects photons a detector on `mode` fails to register.
pub fn detector_sink(mode: &ModeId) -> ModeId {
    ModeId::sink(format!("{}.miss", mode.spatial), mode.polarization)
}

/// Sink for attenuation along `mode` (delay lines, switches).
pub fn line_sink(mode: &ModeId) -> ModeId {
    ModeId::sink(format!("{}.line", mode.spatial), mode.polarization)
}

fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

impl FockState {
    /// Nonlinear medium acting on one arm, written as a Kraus decomposition on
    /// normalized kets with explicit loss sinks (so the map is an isometry).
    ///
    /// Single photon: `√(1−τ₁)e^{iσφ₁}` stays, `√τ₁` goes to the sink.
    /// Two photons in one mode: `√((1−τ₁)(1−τ₂))e^{iσ(φ₁+φ₂)}` stays; one
    /// survivor (second photon absorbed, or first absorbed and the second
    /// transmitted as a lone photon) carries `e^{iσφ₁}`; both absorbed `τ₁`.
    pub fn apply_nonlinear_medium(&self, arm: &[ModeId], spec: &NonlinearMediumSpec) -> Result<FockState> {
        spec.validate()?;
        let arm_label = arm.first().map(|m| m.spatial.clone()).unwrap_or_default();
        for m in arm {
            if !spec.interaction_basis.admits(m.polarization) {
                return Err(Error::Basis { mode: m.to_string(), element: "nonlinear medium" });
            }
        }
        let sinks: Vec<ModeId> = arm.iter().map(medium_sink).collect();
        let state = self.with_modes(sinks.iter().cloned());
        let arm_idx: Vec<usize> = arm.iter().map(|m| state.optical_index(m)).collect::<Result<_>>()?;
        let sink_idx: Vec<usize> = sinks.iter().map(|m| state.index_of(m)).collect::<Result<_>>()?;
        // photons of this arm sitting in a basis the medium does not act on
        let foreign: Vec<(usize, String)> = state
            .modes()
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.sink && arm.iter().any(|a| a.spatial == m.spatial) && !arm.contains(m))
            .map(|(i, m)| (i, m.to_string()))
            .collect();

        let s = spec.arm_phase_sign;
        let keep1 = (1.0 - spec.tau1).sqrt() * cis(s * spec.phi1);
        let lose1 = Complex64::new(spec.tau1.sqrt(), 0.0);
        let keep2 = ((1.0 - spec.tau1) * (1.0 - spec.tau2)).sqrt() * cis(s * (spec.phi1 + spec.phi2));
        let one_left = ((1.0 - spec.tau1) * (spec.tau1 + spec.tau2)).sqrt() * cis(s * spec.phi1);
        let both_lost = Complex64::new(spec.tau1, 0.0);

        state.map_terms(|occ, amp, emit| {
            for (i, name) in &foreign {
                if occ[*i] > 0 {
                    return Err(Error::Basis { mode: name.clone(), element: "nonlinear medium" });
                }
            }
            let occupied: Vec<usize> = (0..arm.len()).filter(|&k| occ[arm_idx[k]] > 0).collect();
            let total: u32 = arm_idx.iter().map(|&i| occ[i] as u32).sum();
            if total > 2 {
                return Err(Error::TooManyPhotons { arm: arm_label.clone(), photons: total });
            }
            for &k in &occupied {
                if occ[sink_idx[k]] > 0 {
                    return Err(Error::SinkOccupied(sinks[k].to_string()));
                }
            }
            let moved = |moves: &[(usize, u8)]| -> Occupation {
                let mut o = occ.clone();
                for &(k, n) in moves {
                    o[arm_idx[k]] -= n;
                    o[sink_idx[k]] += n;
                }
                o
            };
            match (total, occupied.as_slice()) {
                (0, _) => emit(occ.clone(), amp),
                (1, &[k]) => {
                    emit(occ.clone(), amp * keep1);
                    emit(moved(&[(k, 1)]), amp * lose1);
                }
                (2, &[k]) => {
                    emit(occ.clone(), amp * keep2);
                    emit(moved(&[(k, 1)]), amp * one_left);
                    emit(moved(&[(k, 2)]), amp * both_lost);
                }
                (2, &[k, l]) => match spec.coupling {
                    PairCoupling::SelfPhase => {
                        emit(occ.clone(), amp * keep1 * keep1);
                        emit(moved(&[(k, 1)]), amp * lose1 * keep1);
                        emit(moved(&[(l, 1)]), amp * keep1 * lose1);
                        emit(moved(&[(k, 1), (l, 1)]), amp * lose1 * lose1);
                    }
                    PairCoupling::AnyPair => {
                        let half = amp * one_left * std::f64::consts::FRAC_1_SQRT_2;
                        emit(occ.clone(), amp * keep2);
                        emit(moved(&[(k, 1)]), half);
                        emit(moved(&[(l, 1)]), half);
                        emit(moved(&[(k, 1), (l, 1)]), amp * both_lost);
                    }
                },
                _ => unreachable!("occupancy pattern inconsistent with photon total"),
            }
            Ok(())
        })
    }

    /// Independent per-photon transmission `eta` into the listed modes'
    /// sinks (binomial splitting of each Fock component).
    pub fn attenuate(&self, modes: &[ModeId], eta: f64, sink_of: fn(&ModeId) -> ModeId) -> Result<FockState> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::invalid(format!("transmission {eta} is not a probability")));
        }
        if eta == 1.0 {
            return Ok(self.clone());
        }
        let sinks: Vec<ModeId> = modes.iter().map(sink_of).collect();
        let state = self.with_modes(sinks.iter().cloned());
        let idx: Vec<usize> = modes.iter().map(|m| state.optical_index(m)).collect::<Result<_>>()?;
        let sidx: Vec<usize> = sinks.iter().map(|m| state.index_of(m)).collect::<Result<_>>()?;
        state.map_terms(|occ, amp, emit| {
            let mut branches: Vec<(Occupation, Complex64)> = vec![(occ.clone(), amp)];
            for (&i, &si) in idx.iter().zip(&sidx) {
                let n = occ[i];
                if n == 0 {
                    continue;
                }
                if occ[si] > 0 {
                    return Err(Error::SinkOccupied(state.modes()[si].to_string()));
                }
                let mut next = Vec::with_capacity(branches.len() * (n as usize + 1));
                for (o, a) in branches {
                    for kept in 0..=n {
                        let lost = n - kept;
                        let w = binomial(n, kept) * eta.powi(kept as i32) * (1.0 - eta).powi(lost as i32);
                        if w == 0.0 {
                            continue;
                        }
                        let mut o2 = o.clone();
                        o2[i] = kept;
                        o2[si] = lost;
                        next.push((o2, a * w.sqrt()));
                    }
                }
                branches = next;
            }
            for (o, a) in branches {
                emit(o, a);
            }
            Ok(())
        })
    }

    /// Finite detection efficiency on the listed detector modes.
    pub fn apply_detector_efficiency(&self, detected: &[ModeId], p_de: f64) -> Result<FockState> {
        self.attenuate(detected, p_de, detector_sink)
    }
}
