use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_complex::Complex64;

use super::mode::ModeId;
use crate::error::{Error, Result};

/// Amplitudes below this magnitude are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Photon counts per registered mode, in registration order.
pub type Occupation = Vec<u8>;

/// Sparse superposition of Fock basis states over a fixed mode registry.
///
/// Values are never mutated in place: every element or channel returns a
/// new state. Occupation vectors follow registration order, so two states
/// over the same registry compare term by term.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    modes: Vec<ModeId>,
    index: HashMap<ModeId, usize>,
    terms: BTreeMap<Occupation, Complex64>,
}

impl FockState {
    /// The vacuum over the given registry.
    pub fn vacuum<I>(modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = ModeId>,
    {
        let mut state = FockState {
            modes: Vec::new(),
            index: HashMap::new(),
            terms: BTreeMap::new(),
        };
        for mode in modes {
            if state.index.contains_key(&mode) {
                return Err(Error::DuplicateMode(mode.to_string()));
            }
            state.index.insert(mode.clone(), state.modes.len());
            state.modes.push(mode);
        }
        state.terms.insert(vec![0; state.modes.len()], Complex64::new(1.0, 0.0));
        Ok(state)
    }

    /// Builds `Σ c · Π (a†)^n |vac⟩` from creation-operator monomials.
    ///
    /// The result is not normalized; call [`FockState::normalized`] when the
    /// monomials are written with unnormalized prefactors.
    pub fn from_monomials<I>(modes: I, monomials: &[(Complex64, Vec<(ModeId, u8)>)]) -> Result<Self>
    where
        I: IntoIterator<Item = ModeId>,
    {
        let mut state = Self::vacuum(modes)?;
        state.terms.clear();
        for (coef, ops) in monomials {
            let mut occ = vec![0u8; state.modes.len()];
            for (mode, n) in ops {
                let i = state.index_of(mode)?;
                occ[i] += n;
            }
            let norm: f64 = occ.iter().map(|&n| factorial(n)).product::<f64>().sqrt();
            *state.terms.entry(occ).or_default() += coef * norm;
        }
        state.prune();
        Ok(state)
    }

    /// Appends any modes not yet registered. Existing terms get zero photons
    /// in the new modes.
    pub fn with_modes<I>(&self, modes: I) -> Self
    where
        I: IntoIterator<Item = ModeId>,
    {
        let mut out = self.clone();
        let before = out.modes.len();
        for mode in modes {
            if !out.index.contains_key(&mode) {
                out.index.insert(mode.clone(), out.modes.len());
                out.modes.push(mode);
            }
        }
        let added = out.modes.len() - before;
        if added > 0 {
            out.terms = std::mem::take(&mut out.terms)
                .into_iter()
                .map(|(mut occ, amp)| {
                    occ.extend(std::iter::repeat_n(0, added));
                    (occ, amp)
                })
                .collect();
        }
        out
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn contains_mode(&self, mode: &ModeId) -> bool {
        self.index.contains_key(mode)
    }

    pub fn index_of(&self, mode: &ModeId) -> Result<usize> {
        self.index
            .get(mode)
            .copied()
            .ok_or_else(|| Error::UnknownMode(mode.to_string()))
    }

    /// Index of a mode that may feed an optical element (registered, not a sink).
    pub(crate) fn optical_index(&self, mode: &ModeId) -> Result<usize> {
        if mode.sink {
            return Err(Error::SinkInput(mode.to_string()));
        }
        self.index_of(mode)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, Complex64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Amplitude of the basis ket with the listed occupations (all other
    /// modes empty). Unknown modes give zero.
    pub fn amplitude(&self, occupations: &[(ModeId, u8)]) -> Complex64 {
        let mut occ = vec![0u8; self.modes.len()];
        for (mode, n) in occupations {
            match self.index.get(mode) {
                Some(&i) => occ[i] += n,
                None => return Complex64::default(),
            }
        }
        self.terms.get(&occ).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        let mut out = self.clone();
        if n > 0.0 {
            for a in out.terms.values_mut() {
                *a /= n;
            }
        }
        out
    }

    /// Distinct total photon numbers (sinks included) across all terms.
    pub fn photon_numbers(&self) -> BTreeSet<u32> {
        self.terms
            .keys()
            .map(|occ| occ.iter().map(|&n| n as u32).sum())
            .collect()
    }

    /// Photons in `mode` for the given occupation vector.
    pub fn count(&self, occ: &[u8], mode: &ModeId) -> Result<u8> {
        Ok(occ[self.index_of(mode)?])
    }

    /// ⟨self|other⟩ over a shared registry order.
    pub fn inner(&self, other: &FockState) -> Result<Complex64> {
        if self.modes != other.modes {
            return Err(Error::invalid("inner product needs identical mode registries"));
        }
        Ok(self
            .terms
            .iter()
            .filter_map(|(k, a)| other.terms.get(k).map(|b| a.conj() * b))
            .sum())
    }

    /// Largest per-ket amplitude difference; registries must match.
    pub fn max_amplitude_diff(&self, other: &FockState) -> Result<f64> {
        if self.modes != other.modes {
            return Err(Error::invalid("comparison needs identical mode registries"));
        }
        let keys: BTreeSet<&Occupation> = self.terms.keys().chain(other.terms.keys()).collect();
        Ok(keys
            .into_iter()
            .map(|k| {
                let a = self.terms.get(k).copied().unwrap_or_default();
                let b = other.terms.get(k).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max))
    }

    /// Terms whose detected-mode counts equal `counts` (unnormalized).
    pub fn project(&self, detected: &[ModeId], counts: &[u8]) -> Result<FockState> {
        let idx: Vec<usize> = detected.iter().map(|m| self.index_of(m)).collect::<Result<_>>()?;
        let mut out = self.clone();
        out.terms.retain(|occ, _| idx.iter().zip(counts).all(|(&i, &c)| occ[i] == c));
        Ok(out)
    }

    /// Applies `f` to every term; each term may expand into several. Results
    /// are accumulated coherently and pruned.
    pub(crate) fn map_terms<F>(&self, mut f: F) -> Result<FockState>
    where
        F: FnMut(&Occupation, Complex64, &mut dyn FnMut(Occupation, Complex64)) -> Result<()>,
    {
        let mut terms: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.terms {
            f(occ, *amp, &mut |o, a| *terms.entry(o).or_default() += a)?;
        }
        let mut out = FockState { modes: self.modes.clone(), index: self.index.clone(), terms };
        out.prune();
        Ok(out)
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (occ, amp) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)|", amp.re, amp.im)?;
            let mut any = false;
            for (mode, &n) in self.modes.iter().zip(occ) {
                if n > 0 {
                    if any {
                        f.write_str(",")?;
                    }
                    write!(f, "{n}{mode}")?;
                    any = true;
                }
            }
            if !any {
                f.write_str("vac")?;
            }
            f.write_str("⟩")?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

pub(crate) fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

pub(crate) fn binomial(n: u8, k: u8) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}
