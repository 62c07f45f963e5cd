//! Binary "click" detectors: no-click POVM element `Σ_n (1-η)^n |n><n|`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::fock::FockState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub efficiency: f64,
}

impl DetectorSpec {
    pub fn new(efficiency: f64) -> Result<Self> {
        check_unit_interval("detector efficiency", efficiency)?;
        Ok(Self { efficiency })
    }

    pub fn ideal() -> Self {
        Self { efficiency: 1.0 }
    }

    /// Probability that `n` photons produce no click.
    pub fn no_click(&self, n: usize) -> f64 {
        (1.0 - self.efficiency).powi(n as i32)
    }
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self::ideal()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickRecord {
    pub pattern: Vec<bool>,
    pub trial_index: u64,
}

/// Exact probabilities of all `2^M` click patterns. Pattern masks set bit
/// `m` when mode `m` clicked.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickDistribution {
    num_modes: usize,
    probabilities: Vec<f64>,
}

impl ClickDistribution {
    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn mask_of(pattern: &[bool]) -> usize {
        pattern.iter().enumerate().filter(|(_, &c)| c).map(|(m, _)| 1 << m).sum()
    }

    pub fn pattern_of(&self, mask: usize) -> Vec<bool> {
        (0..self.num_modes).map(|m| mask & (1 << m) != 0).collect()
    }

    pub fn probability(&self, pattern: &[bool]) -> f64 {
        self.probabilities[Self::mask_of(pattern)]
    }

    /// Probability that `mode` clicks regardless of the others.
    pub fn marginal(&self, mode: usize) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(mask, _)| mask & (1 << mode) != 0)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn sample_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (mask, &p) in self.probabilities.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = mask;
            if u < acc {
                return mask;
            }
        }
        last
    }

    /// Pattern counts from `n` independent draws.
    pub fn sample_counts<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<u64> {
        let mut counts = vec![0u64; self.probabilities.len()];
        for _ in 0..n {
            counts[self.sample_mask(rng)] += 1;
        }
        counts
    }
}

/// Born-rule click-pattern probabilities for one detector per mode.
pub fn click_probabilities<S: FockState>(state: &S, specs: &[DetectorSpec]) -> Result<ClickDistribution> {
    let basis = state.basis();
    if specs.len() != basis.num_modes {
        return Err(Error::SpecCountMismatch { expected: basis.num_modes, found: specs.len() });
    }
    for s in specs {
        check_unit_interval("detector efficiency", s.efficiency)?;
    }
    let n_patterns = 1usize << basis.num_modes;
    let mut probabilities = vec![0.0; n_patterns];
    let mut no_click = vec![0.0; basis.num_modes];
    for (idx, pop) in state.populations().into_iter().enumerate() {
        if pop == 0.0 {
            continue;
        }
        for (m, slot) in no_click.iter_mut().enumerate() {
            *slot = specs[m].no_click(basis.occupation(idx, m));
        }
        for (mask, p) in probabilities.iter_mut().enumerate() {
            let w: f64 = no_click
                .iter()
                .enumerate()
                .map(|(m, &f)| if mask & (1 << m) != 0 { 1.0 - f } else { f })
                .product();
            *p += pop * w;
        }
    }
    Ok(ClickDistribution { num_modes: basis.num_modes, probabilities })
}

/// Independent click trials; deterministic for a given `rng` state.
pub fn sample_clicks<S: FockState, R: Rng + ?Sized>(
    state: &S,
    specs: &[DetectorSpec],
    n_trials: usize,
    rng: &mut R,
) -> Result<Vec<ClickRecord>> {
    let dist = click_probabilities(state, specs)?;
    Ok((0..n_trials)
        .map(|i| ClickRecord { pattern: dist.pattern_of(dist.sample_mask(rng)), trial_index: i as u64 })
        .collect())
}
