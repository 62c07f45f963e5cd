//! Heralded single photons from a pair source.

use serde::{Deserialize, Serialize};

use super::interferometry::sample_pattern_counts;
use super::report::{echo, Estimate, ExperimentReport, Table};
use super::stats::binomial_se;
use crate::error::Result;
use crate::fock::{fidelity, make_fock_state, DEFAULT_CUTOFF};
use crate::measurement::{click_probabilities, DetectorSpec};
use crate::rng::SeedTree;
use crate::sources::{heralded_photon, two_mode_squeezed, HeraldedSourceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeraldedParams {
    pub lambda: f64,
    pub eta_h: f64,
    pub n_trials: usize,
    pub cutoff: usize,
}

impl Default for HeraldedParams {
    fn default() -> Self {
        Self { lambda: 0.1, eta_h: 1.0, n_trials: 100_000, cutoff: DEFAULT_CUTOFF }
    }
}

/// Exact conditional photon-number distribution plus a sampled herald rate.
pub fn run_heralded_source(params: &HeraldedParams, seed: u64) -> Result<ExperimentReport> {
    let spec = HeraldedSourceSpec::new(params.lambda, params.eta_h, params.cutoff)?;
    let (rho, p_herald) = heralded_photon(&spec)?;
    let pairs = two_mode_squeezed(&spec)?;
    // herald detector on the idler, signal left unobserved
    let dist = click_probabilities(&pairs, &[DetectorSpec::new(0.0)?, DetectorSpec::new(params.eta_h)?])?;
    let counts = sample_pattern_counts(&dist, params.n_trials, &SeedTree::new(seed).named("heralded_source"));
    let n = params.n_trials as u64;
    let clicks = counts[0b10] + counts[0b11];
    let rate = if n == 0 { 0.0 } else { clicks as f64 / n as f64 };

    let mut report = ExperimentReport::new("heralded_source", seed, echo(params));
    report.set("herald_rate", Estimate::new(rate, binomial_se(rate, n)));
    report.set_exact("herald_probability", p_herald);
    let mut table = Table::new(&["n", "probability"]);
    let mut mean_n = 0.0;
    for k in 0..=params.cutoff {
        let p = rho.get(k, k).re;
        mean_n += k as f64 * p;
        table.push(vec![k as f64, p]);
    }
    report.set_exact("p_n0", rho.get(0, 0).re);
    report.set_exact("p_n1", rho.get(1, 1).re);
    report.set_exact("mean_photon_number", mean_n);
    report.set_exact("fidelity_single_photon", fidelity(&rho, &make_fock_state(&[1], params.cutoff)?)?);
    report.tables.insert("photon_number".into(), table);
    Ok(report)
}
