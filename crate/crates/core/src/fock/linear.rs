use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::mode::{ModeId, Polarization};
use super::state::{factorial, FockState, Occupation};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A passive linear transformation of creation operators:
/// `inputs[i]† → Σ_j matrix[i][j] · outputs[j]†`.
///
/// Input modes are emptied before the outputs are filled, so inputs and
/// outputs may overlap (in-place elements such as phase shifters).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    pub inputs: Vec<ModeId>,
    pub outputs: Vec<ModeId>,
    pub matrix: Vec<Vec<Complex64>>,
}

impl LinearMap {
    /// The inverse map for a unitary matrix (conjugate transpose, ports swapped).
    pub fn adjoint(&self) -> LinearMap {
        let rows = self.outputs.len();
        let cols = self.inputs.len();
        let matrix = (0..rows)
            .map(|j| (0..cols).map(|i| self.matrix[i][j].conj()).collect())
            .collect();
        LinearMap { inputs: self.outputs.clone(), outputs: self.inputs.clone(), matrix }
    }

    /// Max deviation of `M M†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.inputs.len();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let dot: Complex64 = self.matrix[a]
                    .iter()
                    .zip(&self.matrix[b])
                    .map(|(x, y)| x * y.conj())
                    .sum();
                let target = if a == b { ONE } else { Complex64::default() };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        let ins: Vec<usize> = self.inputs.iter().map(|m| state.optical_index(m)).collect::<Result<_>>()?;
        let outs: Vec<usize> = self.outputs.iter().map(|m| state.optical_index(m)).collect::<Result<_>>()?;
        state.map_terms(|occ, amp, emit| {
            let counts: Vec<u8> = ins.iter().map(|&i| occ[i]).collect();
            let mut base = occ.clone();
            for &i in &ins {
                base[i] = 0;
            }
            // (Σ_j M_ij b_j†)^n_i expanded into a polynomial over output counts
            let mut poly: HashMap<Vec<u8>, Complex64> = HashMap::from([(vec![0u8; outs.len()], ONE)]);
            for (row, &n) in counts.iter().enumerate() {
                for _ in 0..n {
                    let mut next: HashMap<Vec<u8>, Complex64> = HashMap::new();
                    for (mono, c) in &poly {
                        for (j, m) in self.matrix[row].iter().enumerate() {
                            if m.norm() == 0.0 {
                                continue;
                            }
                            let mut k = mono.clone();
                            k[j] += 1;
                            *next.entry(k).or_default() += c * m;
                        }
                    }
                    poly = next;
                }
            }
            let in_norm: f64 = counts.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
            for (mono, c) in poly {
                let mut o: Occupation = base.clone();
                let mut ket_norm = 1.0;
                for (j, &k) in mono.iter().enumerate() {
                    let before = o[outs[j]];
                    o[outs[j]] = before + k;
                    ket_norm *= (factorial(before + k) / factorial(before)).sqrt();
                }
                emit(o, amp * c * ket_norm / in_norm);
            }
            Ok(())
        })
    }
}

/// Optical element descriptions. The passive kinds expose their mode map
/// through [`ElementSpec::linear_map`].
#[derive(Debug, Clone, PartialEq)]
pub enum ElementSpec {
    /// `in1† → (out1† + i out2†)/√2`, `in2† → (out2† + i out1†)/√2`.
    BeamSplitter { in1: ModeId, in2: ModeId, out1: ModeId, out2: ModeId },
    /// Transmits H (`in1_H → out1_H`), reflects V with a factor `i`
    /// (`in1_V → i out2_V`, `in2_V → i out1_V`).
    PolarizingBs { in1: String, in2: String, out1: String, out2: String },
    /// `x_H† → (y_+† + y_−†)/√2`, `x_V† → (y_+† − y_−†)/√2`, or the same
    /// matrix from the diagonal basis back to H/V when `to_diagonal` is false.
    WavePlateRotation { input: String, output: String, to_diagonal: bool },
    PhaseShifter { mode: ModeId, phase: f64 },
}

impl ElementSpec {
    pub fn linear_map(&self) -> LinearMap {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let ih = I * FRAC_1_SQRT_2;
        let zero = Complex64::default();
        match self {
            ElementSpec::BeamSplitter { in1, in2, out1, out2 } => LinearMap {
                inputs: vec![in1.clone(), in2.clone()],
                outputs: vec![out1.clone(), out2.clone()],
                matrix: vec![vec![h, ih], vec![ih, h]],
            },
            ElementSpec::PolarizingBs { in1, in2, out1, out2 } => LinearMap {
                inputs: vec![ModeId::h(in1), ModeId::v(in1), ModeId::h(in2), ModeId::v(in2)],
                outputs: vec![ModeId::h(out1), ModeId::v(out1), ModeId::h(out2), ModeId::v(out2)],
                matrix: vec![
                    vec![ONE, zero, zero, zero],
                    vec![zero, zero, zero, I],
                    vec![zero, zero, ONE, zero],
                    vec![zero, I, zero, zero],
                ],
            },
            ElementSpec::WavePlateRotation { input, output, to_diagonal } => {
                let (from, to) = if *to_diagonal {
                    ((Polarization::H, Polarization::V), (Polarization::Plus, Polarization::Minus))
                } else {
                    ((Polarization::Plus, Polarization::Minus), (Polarization::H, Polarization::V))
                };
                LinearMap {
                    inputs: vec![ModeId::new(input, from.0), ModeId::new(input, from.1)],
                    outputs: vec![ModeId::new(output, to.0), ModeId::new(output, to.1)],
                    matrix: vec![vec![h, h], vec![h, -h]],
                }
            }
            ElementSpec::PhaseShifter { mode, phase } => LinearMap {
                inputs: vec![mode.clone()],
                outputs: vec![mode.clone()],
                matrix: vec![vec![Complex64::from_polar(1.0, *phase)]],
            },
        }
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        if let ElementSpec::PolarizingBs { in1, in2, .. } = self {
            for label in [in1, in2] {
                for pol in [Polarization::Plus, Polarization::Minus, Polarization::None] {
                    let m = ModeId::new(label.as_str(), pol);
                    if let Ok(i) = state.index_of(&m) {
                        if state.terms().any(|(occ, _)| occ[i] > 0) {
                            return Err(Error::Basis { mode: m.to_string(), element: "polarizing beam splitter" });
                        }
                    }
                }
            }
        }
        self.linear_map().apply(state)
    }
}

impl FockState {
    pub fn apply_beamsplitter(&self, in1: &ModeId, in2: &ModeId, out1: &ModeId, out2: &ModeId) -> Result<FockState> {
        ElementSpec::BeamSplitter {
            in1: in1.clone(),
            in2: in2.clone(),
            out1: out1.clone(),
            out2: out2.clone(),
        }
        .apply(self)
    }

    /// Polarizing beam splitter on the H/V modes of four spatial labels.
    pub fn apply_pbs(&self, in1: &str, in2: &str, out1: &str, out2: &str) -> Result<FockState> {
        ElementSpec::PolarizingBs {
            in1: in1.into(),
            in2: in2.into(),
            out1: out1.into(),
            out2: out2.into(),
        }
        .apply(self)
    }

    /// 45° rotation of spatial mode `spatial` into (or out of) the diagonal basis.
    pub fn apply_rotation_45(&self, spatial: &str, to_diagonal: bool) -> Result<FockState> {
        ElementSpec::WavePlateRotation { input: spatial.into(), output: spatial.into(), to_diagonal }.apply(self)
    }

    pub fn apply_phase_shift(&self, mode: &ModeId, phase: f64) -> Result<FockState> {
        ElementSpec::PhaseShifter { mode: mode.clone(), phase }.apply(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn bs_modes() -> Vec<ModeId> {
        ["a", "b", "c", "d"].iter().map(|s| ModeId::scalar(*s)).collect()
    }

    #[test]
    fn single_photon_splits_evenly() {
        let s = FockState::from_monomials(bs_modes(), &[(ONE, vec![(ModeId::scalar("a"), 1)])]).unwrap();
        let out = s
            .apply_beamsplitter(&ModeId::scalar("a"), &ModeId::scalar("b"), &ModeId::scalar("d"), &ModeId::scalar("c"))
            .unwrap();
        assert!(close(out.amplitude(&[(ModeId::scalar("d"), 1)]), c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(out.amplitude(&[(ModeId::scalar("c"), 1)]), c(0.0, FRAC_1_SQRT_2)));
    }

    #[test]
    fn hong_ou_mandel() {
        let (a, b, cc, d) = (ModeId::scalar("a"), ModeId::scalar("b"), ModeId::scalar("c"), ModeId::scalar("d"));
        let s = FockState::from_monomials(bs_modes(), &[(ONE, vec![(a.clone(), 1), (b.clone(), 1)])]).unwrap();
        let out = s.apply_beamsplitter(&a, &b, &d, &cc).unwrap();
        // (d + ic)(c + id)/2 = i(d² + c²)/2 -> i/√2 on each |2⟩
        assert!(out.amplitude(&[(cc.clone(), 1), (d.clone(), 1)]).norm() < 1e-14);
        assert!(close(out.amplitude(&[(d.clone(), 2)]), c(0.0, FRAC_1_SQRT_2)));
        assert!(close(out.amplitude(&[(cc, 2)]), c(0.0, FRAC_1_SQRT_2)));
    }

    #[test]
    fn pbs_transmits_h_and_reflects_v() {
        let modes: Vec<ModeId> = ["a", "b", "c", "d"].iter().flat_map(|s| [ModeId::h(*s), ModeId::v(*s)]).collect();
        let s = FockState::from_monomials(modes.clone(), &[(ONE, vec![(ModeId::h("a"), 1), (ModeId::h("b"), 1)])]).unwrap();
        let out = s.apply_pbs("a", "b", "d", "c").unwrap();
        assert!(close(out.amplitude(&[(ModeId::h("d"), 1), (ModeId::h("c"), 1)]), ONE));
        let s = FockState::from_monomials(modes, &[(ONE, vec![(ModeId::v("a"), 1)])]).unwrap();
        let out = s.apply_pbs("a", "b", "d", "c").unwrap();
        assert!(close(out.amplitude(&[(ModeId::v("c"), 1)]), I));
    }

    #[test]
    fn pbs_rejects_diagonal_photons() {
        let s = FockState::from_monomials(
            vec![ModeId::h("a"), ModeId::v("a"), ModeId::new("a", Polarization::Plus), ModeId::h("b"), ModeId::v("b")]
                .into_iter()
                .chain(["c", "d"].iter().flat_map(|s| [ModeId::h(*s), ModeId::v(*s)])),
            &[(ONE, vec![(ModeId::new("a", Polarization::Plus), 1)])],
        )
        .unwrap();
        assert!(matches!(s.apply_pbs("a", "b", "d", "c"), Err(Error::Basis { .. })));
    }

    #[test]
    fn rotation_is_an_involution() {
        let modes = [ModeId::h("u"), ModeId::v("u"), ModeId::new("u", Polarization::Plus), ModeId::new("u", Polarization::Minus)];
        let s = FockState::from_monomials(modes, &[(ONE, vec![(ModeId::h("u"), 1), (ModeId::v("u"), 1)])]).unwrap();
        let there = s.apply_rotation_45("u", true).unwrap();
        assert!(close(there.amplitude(&[(ModeId::new("u", Polarization::Plus), 2)]), c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(there.amplitude(&[(ModeId::new("u", Polarization::Minus), 2)]), c(-FRAC_1_SQRT_2, 0.0)));
        let back = there.apply_rotation_45("u", false).unwrap();
        assert!(back.max_amplitude_diff(&s).unwrap() < 1e-12);
    }

    #[test]
    fn element_maps_are_unitary() {
        let specs = [
            ElementSpec::BeamSplitter { in1: ModeId::scalar("a"), in2: ModeId::scalar("b"), out1: ModeId::scalar("c"), out2: ModeId::scalar("d") },
            ElementSpec::PolarizingBs { in1: "a".into(), in2: "b".into(), out1: "c".into(), out2: "d".into() },
            ElementSpec::WavePlateRotation { input: "a".into(), output: "a".into(), to_diagonal: true },
            ElementSpec::PhaseShifter { mode: ModeId::scalar("a"), phase: 0.3 },
        ];
        for s in specs {
            assert!(s.linear_map().unitarity_defect() < 1e-15, "{s:?}");
        }
    }

    #[test]
    fn unknown_and_sink_modes_are_rejected() {
        let s = FockState::vacuum(bs_modes()).unwrap();
        let e = s.apply_beamsplitter(&ModeId::scalar("a"), &ModeId::scalar("zz"), &ModeId::scalar("c"), &ModeId::scalar("d"));
        assert!(matches!(e, Err(Error::UnknownMode(_))));
        let s = s.with_modes([ModeId::sink("l", Polarization::None)]);
        let e = s.apply_phase_shift(&ModeId::sink("l", Polarization::None), 1.0);
        assert!(matches!(e, Err(Error::SinkInput(_))));
    }
}
