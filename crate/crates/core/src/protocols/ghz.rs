use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{register, Posterior, ProtocolResult, Router, WorkingPoint, HV, PM};
use crate::error::{Error, Result};
use crate::fock::{line_sink, FockState, InteractionBasis, ModeId, OutcomeClass, OutcomeRecord, PairCoupling, Polarization};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzOptions {
    /// Transmission of the delay lines holding the output photon.
    pub delay_transmission: f64,
}

impl Default for GhzOptions {
    fn default() -> Self {
        GhzOptions { delay_transmission: 1.0 }
    }
}

/// Herald detectors 1–4 (`u±`, `f±`) followed by a nominal entry for the
/// monitor detector 5, which watches whichever of `p`/`g` is not the output.
pub fn ghz_detectors() -> Vec<ModeId> {
    let mut d: Vec<ModeId> = ["u", "f"]
        .iter()
        .flat_map(|s| PM.map(|p| ModeId::new(*s, p)))
        .collect();
    d.push(ModeId::scalar("monitor"));
    d
}

fn ghz_state(wp: &WorkingPoint, opts: &GhzOptions) -> Result<FockState> {
    let medium = wp.medium()?;
    let half = Complex64::new(0.5, 0.0);
    let monomials: Vec<(Complex64, Vec<(ModeId, u8)>)> = HV
        .iter()
        .flat_map(|&x| HV.map(move |y| (x, y)))
        .map(|(x, y)| {
            (half, vec![(ModeId::new("r", x), 1), (ModeId::new("a", x), 1), (ModeId::new("s", y), 1), (ModeId::new("b", y), 1)])
        })
        .collect();
    let modes = ["r", "s", "a", "b"].iter().flat_map(|s| HV.map(|p| ModeId::new(*s, p)));
    let mut st = FockState::from_monomials(modes, &monomials)?;
    st = register(&st, &["c", "d"], &HV);
    st = st.apply_pbs("a", "b", "d", "c")?;
    for (tag, input, u, w) in [("rc", "c", "u", "w"), ("rd", "d", "p", "q")] {
        let router = Router {
            tag,
            input,
            out_u: u,
            out_w: w,
            polarizations: &HV,
            basis: InteractionBasis::Rectilinear,
            coupling: PairCoupling::AnyPair,
        };
        st = router.apply(&st, &medium)?;
    }
    st = register(&st, &["u"], &PM).apply_rotation_45("u", true)?;
    st = register(&st, &["g", "f"], &HV).apply_pbs("w", "q", "g", "f")?;
    st = register(&st, &["f"], &PM).apply_rotation_45("f", true)?;
    let delayed: Vec<ModeId> = ["p", "g"].iter().flat_map(|s| HV.map(|p| ModeId::new(*s, p))).collect();
    st = st.attenuate(&delayed, opts.delay_transmission, line_sink)?;
    let herald = &ghz_detectors()[..4];
    st.apply_detector_efficiency(herald, wp.p_de)
}

pub fn run_ghz(wp: &WorkingPoint) -> Result<ProtocolResult> {
    run_ghz_with(wp, &GhzOptions::default())
}

/// Fuses two Bell pairs (`r`–`a`, `s`–`b`) into a three-photon GHZ state on
/// `r`, `s` and the output.
///
/// One click among detectors 1–4 heralds; a `u` click selects `p` as output
/// (and `g` as monitor), an `f` click selects `g`. Detector 5 has efficiency
/// `p_de` and a click there is a heralded failure. An apparent success with
/// an empty output is a false positive; any other defect is silent.
pub fn run_ghz_with(wp: &WorkingPoint, opts: &GhzOptions) -> Result<ProtocolResult> {
    let st = ghz_state(wp, opts)?;
    let idx = |s: &str, p: Polarization| st.index_of(&ModeId::new(s, p));
    let herald: Vec<usize> = ghz_detectors()[..4].iter().map(|m| st.index_of(m)).collect::<Result<_>>()?;
    let pair = |s: &str| -> Result<[usize; 2]> { Ok([idx(s, Polarization::H)?, idx(s, Polarization::V)?]) };
    let (p, g, r, s) = (pair("p")?, pair("g")?, pair("r")?, pair("s")?);
    let n = |occ: &[u8], m: [usize; 2]| occ[m[0]] + occ[m[1]];

    let mut records: BTreeMap<(Vec<u8>, OutcomeClass), f64> = BTreeMap::new();
    let mut posteriors: BTreeMap<Vec<u8>, BTreeMap<Vec<u8>, Complex64>> = BTreeMap::new();
    for (occ, amp) in st.terms() {
        let prob = amp.norm_sqr();
        let mut counts: Vec<u8> = herald.iter().map(|&i| occ[i]).collect();
        let clicks: u32 = counts.iter().map(|&c| c as u32).sum();
        if clicks != 1 {
            counts.push(0);
            *records.entry((counts, OutcomeClass::HeraldedFailure)).or_default() += prob;
            continue;
        }
        let u_click = counts[0] + counts[1] == 1;
        let (out, mon) = if u_click { (p, g) } else { (g, p) };
        let m = n(occ, mon);
        let dark = (1.0 - wp.p_de).powi(m as i32);
        if dark < 1.0 {
            let mut c = counts.clone();
            c.push(1);
            *records.entry((c, OutcomeClass::HeraldedFailure)).or_default() += prob * (1.0 - dark);
        }
        let class = if n(occ, out) == 1 && m == 0 && n(occ, r) == 1 && n(occ, s) == 1 {
            OutcomeClass::Success
        } else if n(occ, out) == 0 {
            OutcomeClass::FalsePositive
        } else {
            OutcomeClass::SilentLoss
        };
        if class == OutcomeClass::Success {
            let key = vec![occ[r[0]], occ[r[1]], occ[s[0]], occ[s[1]], occ[out[0]], occ[out[1]]];
            *posteriors.entry(counts.clone()).or_default().entry(key).or_default() += amp;
        }
        counts.push(0);
        *records.entry((counts, class)).or_default() += prob * dark;
    }
    let outcomes = records
        .into_iter()
        .map(|((counts, class), probability)| OutcomeRecord { counts, class, probability })
        .collect();
    let mut result = ProtocolResult::from_outcomes(ghz_detectors(), outcomes);
    result.posteriors = posteriors
        .into_iter()
        .map(|(counts, amps)| reduced(amps).map(|state| (counts, state)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .map(|(counts, state)| {
            let probability = state.norm_sqr();
            Posterior { counts, probability, state: state.normalized() }
        })
        .collect();
    Ok(result)
}

fn output_modes() -> Vec<ModeId> {
    ["r", "s", "o"].iter().flat_map(|s| HV.map(|p| ModeId::new(*s, p))).collect()
}

/// State over `r`, `s` and the selected output, relabelled `o`.
fn reduced(amps: BTreeMap<Vec<u8>, Complex64>) -> Result<FockState> {
    let modes = output_modes();
    let monomials: Vec<(Complex64, Vec<(ModeId, u8)>)> = amps
        .into_iter()
        .map(|(occ, a)| (a, modes.iter().cloned().zip(occ).filter(|(_, n)| *n > 0).collect()))
        .collect();
    FockState::from_monomials(modes, &monomials)
}

/// Overlap with the nearest GHZ state `(|b⟩ + e^{iθ}|b̄⟩)/√2` on the
/// `r`, `s`, `o` polarizations, maximised over `b` and `θ`.
pub fn ghz_fidelity(state: &FockState) -> Result<f64> {
    let modes = output_modes();
    for m in &modes {
        state.index_of(m)?;
    }
    let alpha: Vec<f64> = (0..8u8)
        .map(|bits| {
            let occ: Vec<(ModeId, u8)> = (0..3)
                .map(|k| {
                    let v = (bits >> (2 - k)) & 1;
                    (modes[2 * k + v as usize].clone(), 1)
                })
                .collect();
            state.amplitude(&occ).norm()
        })
        .collect();
    let total: f64 = alpha.iter().map(|a| a * a).sum();
    if total == 0.0 {
        return Err(Error::invalid("state has no weight on the three-photon subspace"));
    }
    let best = (0..4).map(|b| (alpha[b] + alpha[7 - b]).powi(2) / 2.0).fold(0.0, f64::max);
    Ok(best / total)
}
