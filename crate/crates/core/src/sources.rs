//! Photon sources: ideal Fock states come from [`crate::fock::make_fock_state`];
//! this module adds pair generation and heralding.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{DensityMatrix, FockBasis, FockState, PureState};

const MIN_HERALD_PROBABILITY: f64 = 1e-15;

/// Parameters of a heralded down-conversion source.
///
/// `lambda` is the pair amplitude (n pairs occur with probability ∝ λ^{2n});
/// the idler (mode 1) is watched by a click detector of efficiency
/// `herald_efficiency` and the signal (mode 0) is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldedSourceSpec {
    pub lambda: f64,
    pub herald_efficiency: f64,
    pub cutoff: usize,
}

impl HeraldedSourceSpec {
    pub fn new(lambda: f64, herald_efficiency: f64, cutoff: usize) -> Result<Self> {
        let spec = Self { lambda, herald_efficiency, cutoff };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::Domain(format!("pair amplitude lambda = {} outside [0, 1)", self.lambda)));
        }
        check_unit_interval("herald efficiency", self.herald_efficiency)?;
        FockBasis::new(2, self.cutoff)?;
        Ok(())
    }
}

impl Default for HeraldedSourceSpec {
    fn default() -> Self {
        Self { lambda: 0.1, herald_efficiency: 1.0, cutoff: crate::fock::DEFAULT_CUTOFF }
    }
}

/// Normalized truncation of `Σ_n λ^n |n, n>`.
pub fn two_mode_squeezed(spec: &HeraldedSourceSpec) -> Result<PureState> {
    spec.validate()?;
    let basis = FockBasis::new(2, spec.cutoff)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
    let mut weight = 1.0;
    for n in 0..=spec.cutoff {
        amps[basis.index_of(&[n, n])?] = Complex64::new(weight, 0.0);
        weight *= spec.lambda;
    }
    PureState::normalized(basis, amps)
}

/// Conditions mode 0 on a click of a binary detector with efficiency
/// `herald_efficiency` on mode 1.
///
/// Returns the normalized signal state and the click probability.
pub fn herald(state: &PureState, herald_efficiency: f64) -> Result<(DensityMatrix, f64)> {
    check_unit_interval("herald efficiency", herald_efficiency)?;
    let basis = state.basis();
    if basis.num_modes != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: basis.num_modes });
    }
    let d = basis.levels();
    let amps = state.amplitudes();
    let mut cond = DMatrix::<Complex64>::zeros(d, d);
    for idler in 0..d {
        let click = 1.0 - (1.0 - herald_efficiency).powi(idler as i32);
        if click == 0.0 {
            continue;
        }
        for r in 0..d {
            for c in 0..d {
                cond[(r, c)] += amps[r * d + idler] * amps[c * d + idler].conj() * click;
            }
        }
    }
    let probability = cond.trace().re;
    if probability < MIN_HERALD_PROBABILITY {
        return Err(Error::NeverClicks { probability });
    }
    let rho = DensityMatrix::from_rounded(FockBasis::new(1, basis.cutoff)?, cond)?;
    Ok((rho, probability.min(1.0)))
}

/// Heralded signal state of the source described by `spec`.
pub fn heralded_photon(spec: &HeraldedSourceSpec) -> Result<(DensityMatrix, f64)> {
    herald(&two_mode_squeezed(spec)?, spec.herald_efficiency)
}
