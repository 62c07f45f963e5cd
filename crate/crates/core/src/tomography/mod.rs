//! Homodyne tomography: binning, maximum-likelihood reconstruction, and
//! Wigner functions.

pub mod data;
pub mod mle;
pub mod wigner;

pub use data::{bin_samples, BinnedData, PhaseSamples, SampleSet};
pub use mle::{bin_povm, mle_reconstruct, MleDiagnostics, MleOptions};
pub use wigner::{analytic_fock_wigner, uniform_axis, wigner_from_density, wigner_point, WignerGrid};

use serde::Serialize;

use crate::fock::DensityMatrix;

#[derive(Serialize)]
struct DensityJson<'a> {
    cutoff: usize,
    real: Vec<Vec<f64>>,
    imag: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<&'a MleDiagnostics>,
}

/// `{"cutoff", "real", "imag"}` with row-major nested arrays.
pub fn density_to_json(rho: &DensityMatrix, diagnostics: Option<&MleDiagnostics>) -> String {
    let d = rho.dim();
    let rows = |f: fn(num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..d).map(|r| (0..d).map(|c| f(rho.get(r, c))).collect()).collect()
    };
    let doc = DensityJson { cutoff: rho.cutoff(), real: rows(|z| z.re), imag: rows(|z| z.im), diagnostics };
    let mut s = serde_json::to_string_pretty(&doc).expect("density matrix serializes");
    s.push('\n');
    s
}
