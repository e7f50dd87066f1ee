use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mode::ModeId;
use super::state::FockState;
use crate::error::Result;

/// Heralding classification of a detection pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeClass {
    Success,
    HeraldedFailure,
    SilentLoss,
    FalsePositive,
    Unclassified,
}

/// Photon counts on an ordered detector list, with its probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub counts: Vec<u8>,
    pub class: OutcomeClass,
    pub probability: f64,
}

impl OutcomeRecord {
    pub fn clicks(&self) -> u32 {
        self.counts.iter().map(|&n| n as u32).sum()
    }
}

/// Marginal distribution of photon counts on the detected modes.
pub fn count_distribution(state: &FockState, detected: &[ModeId]) -> Result<BTreeMap<Vec<u8>, f64>> {
    let idx: Vec<usize> = detected.iter().map(|m| state.index_of(m)).collect::<Result<_>>()?;
    let mut dist: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let key: Vec<u8> = idx.iter().map(|&i| occ[i]).collect();
        *dist.entry(key).or_default() += amp.norm_sqr();
    }
    Ok(dist)
}

impl FockState {
    /// Every occupation pattern over `detected`, summed over undetected and
    /// sink modes, in canonical (lexicographic) order.
    pub fn measure_all(&self, detected: &[ModeId]) -> Result<Vec<OutcomeRecord>> {
        Ok(count_distribution(self, detected)?
            .into_iter()
            .map(|(counts, probability)| OutcomeRecord { counts, class: OutcomeClass::Unclassified, probability })
            .collect())
    }
}
