//! Scripted protocols: each prepares a state, simulates detection with
//! seeded parallel streams and summarizes the outcome in an [`ExperimentReport`].

mod heralded;
mod homodyne;
mod interferometry;
pub mod report;
pub mod stats;
mod tomography;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{make_fock_state, DensityMatrix, FockState};
use crate::sources::{heralded_photon, HeraldedSourceSpec};

pub use heralded::{run_heralded_source, HeraldedParams};
pub use homodyne::{
    run_dual_homodyne, run_qrng, run_snr_wavepacket, von_neumann, DualHomodyneParams, Extractor, QrngParams,
    SnrParams, MIN_QRNG_BITS, MIN_SNR_SAMPLES,
};
pub use interferometry::{run_anticoincidence, run_mach_zehnder, AnticoincidenceParams, MachZehnderParams};
pub use report::{Estimate, ExperimentReport, Table};
pub use tomography::{generate_tomography_dataset, run_tomography, run_tomography_dataset, TomographyParams};

/// What is fed into the first input mode of a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputState {
    Photon,
    Vacuum,
    TwoPhoton,
    /// Equal mixture of vacuum and one photon.
    Mixture,
    /// Conditional output of the heralded pair source.
    Heralded,
}

impl InputState {
    pub const ALL: [InputState; 5] =
        [InputState::Photon, InputState::Vacuum, InputState::TwoPhoton, InputState::Mixture, InputState::Heralded];

    pub fn name(self) -> &'static str {
        match self {
            InputState::Photon => "photon",
            InputState::Vacuum => "vacuum",
            InputState::TwoPhoton => "two_photon",
            InputState::Mixture => "mixture",
            InputState::Heralded => "heralded",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|i| i.name() == s)
    }

    /// Photon number of a Fock input, `None` for mixed inputs.
    pub fn fock_number(self) -> Option<usize> {
        match self {
            InputState::Photon => Some(1),
            InputState::Vacuum => Some(0),
            InputState::TwoPhoton => Some(2),
            _ => None,
        }
    }

    pub(crate) fn require_fock(self, experiment: &str) -> Result<usize> {
        self.fock_number()
            .ok_or_else(|| Error::Domain(format!("input `{}` is not supported by {experiment}", self.name())))
    }

    /// Single-mode density matrix for this input.
    pub fn density(self, cutoff: usize, source: &HeraldedSourceSpec) -> Result<DensityMatrix> {
        match self {
            InputState::Mixture => {
                let mut pops = vec![0.0; cutoff + 1];
                if cutoff < 1 {
                    return Err(Error::CutoffExceeded { n: 1, cutoff });
                }
                pops[0] = 0.5;
                pops[1] = 0.5;
                DensityMatrix::diagonal(cutoff, &pops)
            }
            InputState::Heralded => {
                let spec = HeraldedSourceSpec { cutoff, ..*source };
                Ok(heralded_photon(&spec)?.0)
            }
            fock => Ok(make_fock_state(&[fock.fock_number().unwrap_or(0)], cutoff)?.to_density()),
        }
    }
}
