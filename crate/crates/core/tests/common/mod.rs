//! Random small states and the channel invariants shared by the property
//! tests and the acceptance runner.

#![allow(dead_code)]

use std::f64::consts::PI;

use nlrouter_core::fock::{
    count_distribution, detector_sink, ElementSpec, FockState, InteractionBasis, ModeId, NonlinearMediumSpec,
    PairCoupling, Polarization,
};
use num_complex::Complex64;
use proptest::prelude::*;

pub const TOL: f64 = 1e-12;

pub fn optical_modes() -> Vec<ModeId> {
    vec![ModeId::h("a"), ModeId::v("a"), ModeId::h("b"), ModeId::v("b")]
}

/// Up to four terms over `a_H, a_V, b_H, b_V`, at most two photons in `a`
/// and three overall, normalized.
pub fn small_state() -> impl Strategy<Value = FockState> {
    let occupation = (0u8..=2, 0u8..=2, 0u8..=2, 0u8..=2)
        .prop_filter("photon budget", |(ah, av, bh, bv)| ah + av <= 2 && ah + av + bh + bv <= 3);
    let term = (-1.0f64..1.0, -1.0f64..1.0, occupation);
    prop::collection::vec(term, 1..=4).prop_filter_map("nonzero", |terms| {
        let modes = optical_modes();
        let monomials: Vec<(Complex64, Vec<(ModeId, u8)>)> = terms
            .into_iter()
            .map(|(re, im, (ah, av, bh, bv))| {
                let ops = modes.iter().cloned().zip([ah, av, bh, bv]).filter(|(_, n)| *n > 0).collect();
                (Complex64::new(re, im), ops)
            })
            .collect();
        let st = FockState::from_monomials(modes, &monomials).ok()?;
        (st.norm_sqr() > 1e-6).then(|| st.normalized())
    })
}

/// A passive element acting in place on the registered modes.
pub fn linear_element() -> impl Strategy<Value = ElementSpec> {
    prop_oneof![
        (0usize..2).prop_map(|p| {
            let pol = [Polarization::H, Polarization::V][p];
            ElementSpec::BeamSplitter {
                in1: ModeId::new("a", pol),
                in2: ModeId::new("b", pol),
                out1: ModeId::new("a", pol),
                out2: ModeId::new("b", pol),
            }
        }),
        Just(ElementSpec::PolarizingBs { in1: "a".into(), in2: "b".into(), out1: "b".into(), out2: "a".into() }),
        (0usize..4, -PI..PI).prop_map(|(m, phase)| ElementSpec::PhaseShifter { mode: optical_modes()[m].clone(), phase }),
    ]
}

/// Lower-branch-like medium parameters with arbitrary losses.
pub fn medium() -> impl Strategy<Value = NonlinearMediumSpec> {
    (-PI..PI, 0.0f64..1.0, -PI..PI, 0.0f64..1.0, prop::bool::ANY, prop::bool::ANY).prop_map(
        |(phi1, tau1, phi2, tau2, sign, any_pair)| NonlinearMediumSpec {
            arm_phase_sign: if sign { 1.0 } else { -1.0 },
            phi1,
            tau1,
            phi2,
            tau2,
            interaction_basis: InteractionBasis::Rectilinear,
            coupling: if any_pair { PairCoupling::AnyPair } else { PairCoupling::SelfPhase },
        },
    )
}

pub fn total_photons(st: &FockState) -> Vec<u32> {
    st.photon_numbers().into_iter().collect()
}

pub fn distribution_sum(st: &FockState) -> f64 {
    count_distribution(st, &optical_modes()).unwrap().values().sum()
}

/// Checks every invariant on one state; returns a description of the first
/// violation.
pub fn check_state(st: &FockState, el: &ElementSpec, med: &NonlinearMediumSpec, eta: f64) -> Result<(), String> {
    let map = el.linear_map();
    if map.unitarity_defect() > TOL {
        return Err(format!("non-unitary {el:?}"));
    }
    let out = el.apply(st).map_err(|e| e.to_string())?;
    if (out.norm_sqr() - 1.0).abs() > TOL {
        return Err(format!("norm {} after {el:?}", out.norm_sqr()));
    }
    if total_photons(&out) != total_photons(st) {
        return Err(format!("photon number changed by {el:?}"));
    }
    let back = map.adjoint().apply(&out).map_err(|e| e.to_string())?;
    if back.max_amplitude_diff(st).map_err(|e| e.to_string())? > 1e-12 {
        return Err(format!("adjoint does not invert {el:?}"));
    }
    let arm = [ModeId::h("a"), ModeId::v("a")];
    let lossy = st.apply_nonlinear_medium(&arm, med).map_err(|e| e.to_string())?;
    if (lossy.norm_sqr() - 1.0).abs() > TOL {
        return Err(format!("medium not trace preserving: {}", lossy.norm_sqr()));
    }
    if total_photons(&lossy) != total_photons(st) {
        return Err("medium lost track of absorbed photons".into());
    }
    let detected = lossy.apply_detector_efficiency(&optical_modes(), eta).map_err(|e| e.to_string())?;
    if (detected.norm_sqr() - 1.0).abs() > TOL || total_photons(&detected) != total_photons(st) {
        return Err("detector efficiency not trace preserving".into());
    }
    let sinks: Vec<ModeId> = optical_modes().iter().map(detector_sink).collect();
    let p: f64 = count_distribution(&detected, &sinks).unwrap().values().sum();
    if (p - 1.0).abs() > TOL || (distribution_sum(&detected) - 1.0).abs() > TOL {
        return Err("outcome probabilities do not partition unity".into());
    }
    Ok(())
}

/// Coincidence probability of two photons with polarizations `pa`, `pb`
/// (as H/V amplitudes) meeting on a balanced beam splitter.
pub fn hom_coincidence(pa: [Complex64; 2], pb: [Complex64; 2]) -> f64 {
    let modes = optical_modes();
    let mut monomials = Vec::new();
    for (i, ca) in pa.iter().enumerate() {
        for (j, cb) in pb.iter().enumerate() {
            monomials.push((ca * cb, vec![(modes[i].clone(), 1), (modes[2 + j].clone(), 1)]));
        }
    }
    let mut st = FockState::from_monomials(modes.clone(), &monomials).unwrap().normalized();
    for k in 0..2 {
        st = st.apply_beamsplitter(&modes[k], &modes[2 + k], &modes[k], &modes[2 + k]).unwrap();
    }
    count_distribution(&st, &modes)
        .unwrap()
        .into_iter()
        .filter(|(c, _)| c[0] + c[1] == 1 && c[2] + c[3] == 1)
        .map(|(_, p)| p)
        .sum()
}

pub fn polarization() -> impl Strategy<Value = [Complex64; 2]> {
    (0.0..PI, -PI..PI).prop_map(|(theta, chi)| {
        [Complex64::new((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), chi)]
    })
}
