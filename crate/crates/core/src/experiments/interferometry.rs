//! Click-detector protocols: one beam splitter, and a Mach-Zehnder interferometer.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::report::{echo, Estimate, ExperimentReport, Table};
use super::stats::{binomial_se, fit_cosine, uniform_phases};
use super::InputState;
use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{apply_two_mode, beam_splitter, make_fock_state, phase_shift, PureState, DEFAULT_CUTOFF};
use crate::measurement::{click_probabilities, ClickDistribution, DetectorSpec};
use crate::rng::{chunked, SeedTree};

/// Pattern counts (indexed by click mask) from `n_trials` draws.
pub(crate) fn sample_pattern_counts(dist: &ClickDistribution, n_trials: usize, tree: &SeedTree) -> Vec<u64> {
    let parts = chunked(tree, n_trials, |_, len, rng| dist.sample_counts(len, rng));
    let mut total = vec![0u64; dist.probabilities().len()];
    for part in parts {
        for (t, c) in total.iter_mut().zip(part) {
            *t += c;
        }
    }
    total
}

fn split_input(input: InputState, cutoff: usize, experiment: &str) -> Result<PureState> {
    let n = input.require_fock(experiment)?;
    let bs = beam_splitter(0.5, FRAC_PI_2, cutoff)?;
    apply_two_mode(&bs, &make_fock_state(&[n, 0], cutoff)?, (0, 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnticoincidenceParams {
    pub eta_c: f64,
    pub eta_d: f64,
    pub n_trials: usize,
    pub input: InputState,
    pub cutoff: usize,
}

impl Default for AnticoincidenceParams {
    fn default() -> Self {
        Self { eta_c: 1.0, eta_d: 1.0, n_trials: 100_000, input: InputState::Photon, cutoff: DEFAULT_CUTOFF }
    }
}

/// `|n, 0>` on a 50:50 beam splitter with click detectors `c` (mode 0) and
/// `d` (mode 1).
pub fn run_anticoincidence(params: &AnticoincidenceParams, seed: u64) -> Result<ExperimentReport> {
    check_unit_interval("eta_c", params.eta_c)?;
    check_unit_interval("eta_d", params.eta_d)?;
    let state = split_input(params.input, params.cutoff, "anticoincidence")?;
    let specs = [DetectorSpec::new(params.eta_c)?, DetectorSpec::new(params.eta_d)?];
    let dist = click_probabilities(&state, &specs)?;
    let tree = SeedTree::new(seed).named("anticoincidence");
    let counts = sample_pattern_counts(&dist, params.n_trials, &tree);

    let n = params.n_trials as u64;
    let rate = |c: u64| if n == 0 { 0.0 } else { c as f64 / n as f64 };
    let mut report = ExperimentReport::new("anticoincidence", seed, echo(params));
    let mut table = Table::new(&["click_c", "click_d", "count", "rate", "std_error", "exact"]);
    // masks: bit 0 = c, bit 1 = d
    let labels = [(0b00, "none"), (0b01, "c_only"), (0b10, "d_only"), (0b11, "both")];
    for &(mask, label) in &labels {
        let p = rate(counts[mask]);
        let se = binomial_se(p, n);
        table.push(vec![
            (mask & 1) as f64,
            (mask >> 1) as f64,
            counts[mask] as f64,
            p,
            se,
            dist.probabilities()[mask],
        ]);
        report.set(&format!("counts_{label}"), Estimate::new(counts[mask] as f64, se * n as f64));
        report.set(&format!("rate_{label}"), Estimate::new(p, se));
        report.set_exact(&format!("exact_{label}"), dist.probabilities()[mask]);
    }
    report.tables.insert("patterns".into(), table);

    let p_both = rate(counts[0b11]);
    let p_c = rate(counts[0b01] + counts[0b11]);
    let p_d = rate(counts[0b10] + counts[0b11]);
    let (se_c, se_d, se_both) = (binomial_se(p_c, n), binomial_se(p_d, n), binomial_se(p_both, n));
    report.set("p_click_c", Estimate::new(p_c, se_c));
    report.set("p_click_d", Estimate::new(p_d, se_d));
    let denom = p_c * p_d;
    let alpha = if denom > 0.0 {
        let a = p_both / denom;
        // first-order error propagation treating the three rates as independent
        let rel = |p: f64, se: f64| if p > 0.0 { (se / p).powi(2) } else { 0.0 };
        let se = if p_both > 0.0 { a * (rel(p_both, se_both) + rel(p_c, se_c) + rel(p_d, se_d)).sqrt() } else { 0.0 };
        Estimate::new(a, se)
    } else {
        Estimate::exact(0.0)
    };
    report.set("alpha", alpha);
    let exact_denom = dist.marginal(0) * dist.marginal(1);
    report.set_exact("exact_alpha", if exact_denom > 0.0 { dist.probabilities()[0b11] / exact_denom } else { 0.0 });
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachZehnderParams {
    pub phases: Vec<f64>,
    pub n_trials_per_phase: usize,
    pub eta: f64,
    pub input: InputState,
    pub cutoff: usize,
}

impl Default for MachZehnderParams {
    fn default() -> Self {
        Self {
            phases: uniform_phases(16, 2.0 * PI),
            n_trials_per_phase: 10_000,
            eta: 1.0,
            input: InputState::Photon,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

/// Exact output state of the interferometer for relative arm phase `dphi`.
fn mach_zehnder_state(input: &PureState, dphi: f64, cutoff: usize) -> Result<PureState> {
    let bs = beam_splitter(0.5, FRAC_PI_2, cutoff)?;
    let first = apply_two_mode(&bs, input, (0, 1))?;
    apply_two_mode(&bs, &phase_shift(&first, 1, dphi)?, (0, 1))
}

/// The symmetric port is the output that receives the photon with certainty
/// when the arms are balanced, i.e. where the two paths add constructively.
fn symmetric_port(cutoff: usize) -> Result<usize> {
    let out = mach_zehnder_state(&make_fock_state(&[1, 0], cutoff)?, 0.0, cutoff)?;
    let dist = click_probabilities(&out, &[DetectorSpec::ideal(), DetectorSpec::ideal()])?;
    Ok(if dist.marginal(1) > dist.marginal(0) { 1 } else { 0 })
}

pub fn run_mach_zehnder(params: &MachZehnderParams, seed: u64) -> Result<ExperimentReport> {
    if params.phases.is_empty() {
        return Err(Error::Domain("phase list is empty".into()));
    }
    check_unit_interval("eta", params.eta)?;
    let n = params.input.require_fock("mach_zehnder")?;
    let input = make_fock_state(&[n, 0], params.cutoff)?;
    let sym = symmetric_port(params.cutoff)?;
    let anti = 1 - sym;
    let specs = [DetectorSpec::new(params.eta)?, DetectorSpec::new(params.eta)?];
    let tree = SeedTree::new(seed).named("mach_zehnder");
    let trials = params.n_trials_per_phase as u64;

    let mut table = Table::new(&[
        "phase",
        "count_symmetric",
        "count_antisymmetric",
        "count_both",
        "count_none",
        "p_symmetric",
        "std_error",
        "p_symmetric_exact",
    ]);
    let mut sym_rates = Vec::with_capacity(params.phases.len());
    let mut sym_se = Vec::with_capacity(params.phases.len());
    let mut worst_z: f64 = 0.0;
    for (j, &dphi) in params.phases.iter().enumerate() {
        let out = mach_zehnder_state(&input, dphi, params.cutoff)?;
        let dist = click_probabilities(&out, &specs)?;
        let counts = sample_pattern_counts(&dist, params.n_trials_per_phase, &tree.child(j as u64));
        let only = |m: usize| counts[1 << m];
        let p = if trials == 0 { 0.0 } else { only(sym) as f64 / trials as f64 };
        let se = binomial_se(p, trials);
        let exact = dist.probabilities()[1 << sym];
        let exact_se = binomial_se(exact, trials);
        if exact_se > 0.0 {
            worst_z = worst_z.max((p - exact).abs() / exact_se);
        } else if p != exact {
            worst_z = f64::INFINITY;
        }
        table.push(vec![
            dphi,
            only(sym) as f64,
            only(anti) as f64,
            counts[0b11] as f64,
            counts[0b00] as f64,
            p,
            se,
            exact,
        ]);
        sym_rates.push(p);
        sym_se.push(se);
    }

    let mut report = ExperimentReport::new("mach_zehnder", seed, echo(params));
    report.set_exact("symmetric_port", sym as f64);
    let (max, min) = sym_rates.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(a, b), &p| (a.max(p), b.min(p)));
    let raw = if max + min > 0.0 { (max - min) / (max + min) } else { 0.0 };
    report.set_exact("visibility_raw", raw);
    // fitted fringe c + A cos(Δφ + δ): V = A / c
    let visibility = match fit_cosine(&params.phases, &sym_rates, &sym_se, true) {
        Some(fit) if fit.offset > 0.0 => {
            let v = fit.amplitude / fit.offset;
            Estimate::new(v, fit.amplitude_se / fit.offset)
        }
        _ => Estimate::exact(raw),
    };
    report.set("visibility", visibility);
    report.set_exact("max_z_score", if worst_z.is_finite() { worst_z } else { f64::MAX });
    report.tables.insert("fringe".into(), table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_interferometer_uses_mode_one() {
        assert_eq!(symmetric_port(DEFAULT_CUTOFF).unwrap(), 1);
    }

    #[test]
    fn vacuum_never_clicks() {
        let p = AnticoincidenceParams { input: InputState::Vacuum, n_trials: 5000, ..Default::default() };
        let r = run_anticoincidence(&p, 3).unwrap();
        assert_eq!(r.value("counts_none"), Some(5000.0));
        assert_eq!(r.value("alpha"), Some(0.0));
    }

    #[test]
    fn mixed_inputs_are_refused() {
        let p = AnticoincidenceParams { input: InputState::Mixture, ..Default::default() };
        assert!(matches!(run_anticoincidence(&p, 1), Err(Error::Domain(_))));
        let p = MachZehnderParams { phases: vec![], ..Default::default() };
        assert!(run_mach_zehnder(&p, 1).is_err());
    }
}
