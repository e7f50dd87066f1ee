use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{register, ProtocolResult, Router, WorkingPoint, HV, PM};
use crate::error::{Error, Result};
use crate::fock::{count_distribution, FockState, InteractionBasis, ModeId, OutcomeClass, OutcomeRecord, PairCoupling};
use crate::rydberg::DetunedParams;

type Monomial = (Complex64, Vec<(ModeId, u8)>);
type Distribution = BTreeMap<Vec<u8>, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus];

    /// Amplitudes on `a_H b_H, a_H b_V, a_V b_H, a_V b_V`.
    pub fn coefficients(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::default();
        match self {
            BellState::PhiPlus => [h, z, z, h],
            BellState::PhiMinus => [h, z, z, -h],
            BellState::PsiPlus => [z, h, h, z],
            BellState::PsiMinus => [z, h, -h, z],
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Polarization state of the two photons entering ports `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoQubitInput {
    Bell(BellState),
    /// Amplitudes on `a_H b_H, a_H b_V, a_V b_H, a_V b_V`; normalized on use.
    Arbitrary([Complex64; 4]),
}

impl TwoQubitInput {
    fn coefficients(&self) -> Result<[Complex64; 4]> {
        match self {
            TwoQubitInput::Bell(b) => Ok(b.coefficients()),
            TwoQubitInput::Arbitrary(c) => {
                let n: f64 = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                if n == 0.0 || !n.is_finite() {
                    return Err(Error::invalid("two-qubit input has zero or non-finite norm"));
                }
                Ok(c.map(|x| x / n))
            }
        }
    }
}

fn input_monomials(c: &[Complex64; 4]) -> Vec<Monomial> {
    let mut out = Vec::new();
    for (k, (pa, pb)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
        if c[k].norm() > 0.0 {
            out.push((c[k], vec![(ModeId::new("a", HV[pa]), 1), (ModeId::new("b", HV[pb]), 1)]));
        }
    }
    out
}

fn product(x: &[Monomial], y: &[Monomial]) -> Vec<Monomial> {
    x.iter()
        .flat_map(|(cx, ox)| y.iter().map(move |(cy, oy)| (cx * cy, ox.iter().chain(oy).cloned().collect())))
        .collect()
}

/// Detectors 1–8 of the router-assisted Bell measurement.
pub fn bell_detectors() -> Vec<ModeId> {
    ["u1", "w1", "w2", "u2"]
        .iter()
        .flat_map(|s| [ModeId::h(*s), ModeId::v(*s)])
        .collect()
}

/// Detectors of the ancilla-assisted variant: `w1`, `w2` and the four
/// outputs of the ancilla beam splitters.
pub fn evl_detectors() -> Vec<ModeId> {
    ["w1", "w2", "x1", "x2", "y1", "y2"]
        .iter()
        .flat_map(|s| [ModeId::h(*s), ModeId::v(*s)])
        .collect()
}

/// Balanced beam splitter on `a`, `b`, a router on each output in the
/// diagonal basis, and every router output rotated back to H/V.
fn front_end(monomials: &[Monomial], extra: &[&str], medium: &DetunedParams) -> Result<FockState> {
    let mut spatials = vec!["a", "b"];
    spatials.extend_from_slice(extra);
    let modes: Vec<ModeId> = spatials.iter().flat_map(|s| HV.map(|p| ModeId::new(*s, p))).collect();
    let mut st = FockState::from_monomials(modes, monomials)?.normalized();
    st = register(&st, &["c", "d"], &HV);
    for p in HV {
        st = st.apply_beamsplitter(&ModeId::new("a", p), &ModeId::new("b", p), &ModeId::new("d", p), &ModeId::new("c", p))?;
    }
    st = register(&st, &["c", "d"], &PM);
    st = st.apply_rotation_45("c", true)?.apply_rotation_45("d", true)?;
    for (tag, input, u, w) in [("r1", "c", "u1", "w1"), ("r2", "d", "u2", "w2")] {
        let router = Router {
            tag,
            input,
            out_u: u,
            out_w: w,
            polarizations: &PM,
            basis: InteractionBasis::Diagonal,
            coupling: PairCoupling::SelfPhase,
        };
        st = router.apply(&st, medium)?;
    }
    let outs = ["u1", "w1", "u2", "w2"];
    st = register(&st, &outs, &HV);
    for s in outs {
        st = st.apply_rotation_45(s, false)?;
    }
    Ok(st)
}

fn bm_state(c: &[Complex64; 4], wp: &WorkingPoint) -> Result<FockState> {
    let medium = wp.medium()?;
    front_end(&input_monomials(c), &[], &medium)?.apply_detector_efficiency(&bell_detectors(), wp.p_de)
}

/// `(|A_e⟩ − |A_h⟩)/√2` with `|A_x⟩ = ½(x_H†² + x_V†²)|vac⟩`.
fn ancilla() -> Vec<Monomial> {
    let c = 0.5 * FRAC_1_SQRT_2;
    [("e", c), ("h", -c)]
        .into_iter()
        .flat_map(|(s, k)| HV.map(|p| (Complex64::new(k, 0.0), vec![(ModeId::new(s, p), 2)])))
        .collect()
}

fn evl_state(c: &[Complex64; 4], wp: &WorkingPoint) -> Result<FockState> {
    let medium = wp.medium()?;
    let mut st = front_end(&product(&input_monomials(c), &ancilla()), &["e", "h"], &medium)?;
    st = register(&st, &["x1", "x2", "y1", "y2"], &HV);
    for p in HV {
        let m = |s: &str| ModeId::new(s, p);
        st = st.apply_beamsplitter(&m("u1"), &m("e"), &m("x1"), &m("x2"))?;
        st = st.apply_beamsplitter(&m("u2"), &m("h"), &m("y1"), &m("y2"))?;
    }
    st.apply_detector_efficiency(&evl_detectors(), wp.p_de)
}

/// One flavour of Bell measurement: its circuit, detectors and the photon
/// number a complete detection pattern carries.
struct Scheme {
    state: fn(&[Complex64; 4], &WorkingPoint) -> Result<FockState>,
    detectors: fn() -> Vec<ModeId>,
    photons: u32,
}

const BM: Scheme = Scheme { state: bm_state, detectors: bell_detectors, photons: 2 };
const EVL: Scheme = Scheme { state: evl_state, detectors: evl_detectors, photons: 4 };

impl Scheme {
    fn distribution(&self, c: &[Complex64; 4], wp: &WorkingPoint) -> Result<Distribution> {
        count_distribution(&(self.state)(c, wp)?, &(self.detectors)())
    }

    fn table(&self, wp: &WorkingPoint) -> Result<[Distribution; 4]> {
        let mut out: [Distribution; 4] = Default::default();
        for b in BellState::ALL {
            out[b.index()] = self.distribution(&b.coefficients(), wp)?;
        }
        Ok(out)
    }

    fn is_complete(&self, counts: &[u8]) -> bool {
        counts.iter().map(|&n| n as u32).sum::<u32>() == self.photons
    }

    /// Records for one Bell input. A complete pattern `x` identifies input
    /// `j` with probability `max(0, p_j(x) − Σ_{i≠j} p_i(x))`; the remainder
    /// of that pattern, and every incomplete pattern, is a heralded failure.
    fn classify_bell(&self, j: usize, table: &[Distribution; 4]) -> Vec<OutcomeRecord> {
        let mut out = Vec::new();
        for (counts, &p) in &table[j] {
            let success = if self.is_complete(counts) { excess(j, counts, table) } else { 0.0 };
            push_split(&mut out, counts, p, success);
        }
        out
    }

    fn run(&self, input: &TwoQubitInput, wp: &WorkingPoint) -> Result<ProtocolResult> {
        let table = self.table(wp)?;
        let records = match input {
            TwoQubitInput::Bell(b) => self.classify_bell(b.index(), &table),
            TwoQubitInput::Arbitrary(_) => {
                let dist = self.distribution(&input.coefficients()?, wp)?;
                let mut out = Vec::new();
                for (counts, &p) in &dist {
                    let mut success = 0.0;
                    if self.is_complete(counts) {
                        let probs = pattern_probs(counts, &table);
                        let winner = (0..4).max_by(|&x, &y| probs[x].total_cmp(&probs[y])).unwrap_or(0);
                        if probs[winner] > 0.0 {
                            success = p * excess(winner, counts, &table) / probs[winner];
                        }
                    }
                    push_split(&mut out, counts, p, success);
                }
                out
            }
        };
        Ok(ProtocolResult::from_outcomes((self.detectors)(), records))
    }

    fn average(&self, wp: &WorkingPoint) -> Result<ProtocolResult> {
        let table = self.table(wp)?;
        let parts: Vec<(f64, ProtocolResult)> = (0..4)
            .map(|j| (0.25, ProtocolResult::from_outcomes((self.detectors)(), self.classify_bell(j, &table))))
            .collect();
        Ok(ProtocolResult::mixture(&parts))
    }
}

fn pattern_probs(counts: &[u8], table: &[Distribution; 4]) -> [f64; 4] {
    std::array::from_fn(|i| table[i].get(counts).copied().unwrap_or(0.0))
}

fn excess(j: usize, counts: &[u8], table: &[Distribution; 4]) -> f64 {
    let p = pattern_probs(counts, table);
    let others: f64 = (0..4).filter(|&i| i != j).map(|i| p[i]).sum();
    (p[j] - others).max(0.0)
}

fn push_split(out: &mut Vec<OutcomeRecord>, counts: &[u8], p: f64, success: f64) {
    let success = success.min(p);
    if success > 0.0 {
        out.push(OutcomeRecord { counts: counts.to_vec(), class: OutcomeClass::Success, probability: success });
    }
    if p - success > 0.0 {
        out.push(OutcomeRecord {
            counts: counts.to_vec(),
            class: OutcomeClass::HeraldedFailure,
            probability: p - success,
        });
    }
}

/// Router-assisted Bell measurement on detectors [`bell_detectors`].
pub fn run_bell_measurement(input: &TwoQubitInput, wp: &WorkingPoint) -> Result<ProtocolResult> {
    BM.run(input, wp)
}

/// Success averaged over the four Bell states.
pub fn run_bell_measurement_average(wp: &WorkingPoint) -> Result<ProtocolResult> {
    BM.average(wp)
}

/// Bell measurement with the two-photon ancilla on the `u` outputs.
pub fn run_evl_bell_measurement(input: &TwoQubitInput, wp: &WorkingPoint) -> Result<ProtocolResult> {
    EVL.run(input, wp)
}

pub fn run_evl_bell_measurement_average(wp: &WorkingPoint) -> Result<ProtocolResult> {
    EVL.average(wp)
}

/// Complete patterns of the router-assisted measurement that identify each
/// Bell state with nonzero probability.
pub fn bell_success_patterns(wp: &WorkingPoint) -> Result<BTreeMap<BellState, BTreeSet<Vec<u8>>>> {
    let table = BM.table(wp)?;
    let mut out = BTreeMap::new();
    for b in BellState::ALL {
        let set = table[b.index()]
            .keys()
            .filter(|c| BM.is_complete(c) && excess(b.index(), c, &table) > 1e-14)
            .cloned()
            .collect();
        out.insert(b, set);
    }
    Ok(out)
}
