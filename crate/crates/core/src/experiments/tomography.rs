//! Homodyne tomography datasets and their reconstruction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::homodyne::sample_quadratures;
use super::report::{echo, Estimate, ExperimentReport, Table};
use super::stats::{mean, uniform_phases, variance, variance_se};
use super::InputState;
use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{
    attenuate, expectation_quadrature, expectation_quadrature_squared, fidelity, make_fock_state, DensityMatrix,
    DEFAULT_CUTOFF,
};
use crate::rng::SeedTree;
use crate::sources::HeraldedSourceSpec;
use crate::tomography::data::MIN_PHASES;
use crate::tomography::{
    bin_samples, density_to_json, mle_reconstruct, uniform_axis, wigner_from_density, wigner_point, MleOptions,
    PhaseSamples, SampleSet,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyParams {
    pub input: InputState,
    pub phases: Vec<f64>,
    pub n_per_phase: usize,
    pub n_bins: usize,
    pub cutoff: usize,
    pub max_iters: usize,
    pub tol: f64,
    /// Pair amplitude and herald efficiency for `input = heralded`.
    pub lambda: f64,
    pub eta_h: f64,
    /// Detection efficiency, applied as loss before sampling.
    pub efficiency: f64,
    pub wigner_points: usize,
    pub wigner_extent: f64,
}

impl Default for TomographyParams {
    fn default() -> Self {
        Self {
            input: InputState::Photon,
            phases: uniform_phases(12, PI),
            n_per_phase: 10_000,
            n_bins: 50,
            cutoff: DEFAULT_CUTOFF,
            max_iters: 2000,
            tol: 1e-7,
            lambda: 0.1,
            eta_h: 1.0,
            efficiency: 1.0,
            wigner_points: 101,
            wigner_extent: 5.0,
        }
    }
}

impl TomographyParams {
    /// The state the simulated detector actually sees.
    pub fn true_state(&self) -> Result<DensityMatrix> {
        check_unit_interval("efficiency", self.efficiency)?;
        let source = HeraldedSourceSpec::new(self.lambda, self.eta_h, self.cutoff)?;
        attenuate(&self.input.density(self.cutoff, &source)?, self.efficiency)
    }
}

/// Homodyne samples of `rho` at each phase; phase `j` draws from its own
/// branch of the seed tree, so adding phases never changes earlier ones.
pub fn generate_tomography_dataset(rho: &DensityMatrix, phases: &[f64], n_per_phase: usize, seed: u64) -> Result<SampleSet> {
    if let Some(&bad) = phases.iter().find(|p| !(0.0..PI).contains(*p)) {
        return Err(Error::Domain(format!("phase {bad} outside [0, π)")));
    }
    let mut distinct: Vec<u64> = phases.iter().map(|p| p.to_bits()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < MIN_PHASES {
        return Err(Error::TooFewPhases { found: distinct.len() });
    }
    if n_per_phase == 0 {
        return Err(Error::Domain("n_per_phase must be at least 1".into()));
    }
    let tree = SeedTree::new(seed).named("tomography_dataset");
    let mut set = SampleSet::default();
    for (j, &theta) in phases.iter().enumerate() {
        let xs = sample_quadratures(rho, theta, n_per_phase, &tree.child(j as u64))?;
        match set.phases.iter_mut().find(|p| p.theta.to_bits() == theta.to_bits()) {
            Some(p) => p.xs.extend(xs),
            None => set.phases.push(PhaseSamples { theta, xs }),
        }
    }
    Ok(set)
}

/// Dataset plus per-phase variance checks; the samples go to `samples.csv`.
pub fn run_tomography_dataset(params: &TomographyParams, seed: u64) -> Result<ExperimentReport> {
    let rho = params.true_state()?;
    let set = generate_tomography_dataset(&rho, &params.phases, params.n_per_phase, seed)?;
    let mut table = Table::new(&["theta", "samples", "mean", "variance", "std_error", "variance_exact"]);
    let mut worst: f64 = 0.0;
    for p in &set.phases {
        let m = expectation_quadrature(&rho, p.theta)?;
        let exact = expectation_quadrature_squared(&rho, p.theta)? - m * m;
        let (v, se) = (variance(&p.xs), variance_se(&p.xs));
        if se > 0.0 {
            worst = worst.max((v - exact).abs() / se);
        }
        table.push(vec![p.theta, p.xs.len() as f64, mean(&p.xs), v, se, exact]);
    }
    let mut report = ExperimentReport::new("tomography_dataset", seed, echo(params));
    report.set_exact("phases", set.phases.len() as f64);
    report.set_exact("samples", set.len() as f64);
    report.set_exact("max_variance_z", worst);
    report.tables.insert("phase_variance".into(), table);
    report.artifacts.insert("samples.csv".into(), set.to_csv().into_bytes());
    Ok(report)
}

/// Maximum-likelihood reconstruction and Wigner function. With `samples`
/// the dataset is taken as given; otherwise it is simulated from
/// `params.input` and the report also compares against the true state.
pub fn run_tomography(params: &TomographyParams, samples: Option<&SampleSet>, seed: u64) -> Result<ExperimentReport> {
    if params.wigner_points < 2 || !(params.wigner_extent > 0.0) {
        return Err(Error::Domain("wigner grid needs at least 2 points and a positive extent".into()));
    }
    let (set, truth) = match samples {
        Some(s) => (s.clone(), None),
        None => {
            let rho = params.true_state()?;
            (generate_tomography_dataset(&rho, &params.phases, params.n_per_phase, seed)?, Some(rho))
        }
    };
    let data = bin_samples(&set, params.n_bins)?;
    let options = MleOptions { cutoff: params.cutoff, max_iters: params.max_iters, tol: params.tol };
    let (rho, diag) = mle_reconstruct(&data, &options)?;
    let axis = uniform_axis(-params.wigner_extent, params.wigner_extent, params.wigner_points);
    let grid = wigner_from_density(&rho, &axis, &axis)?;

    let mut report = ExperimentReport::new("tomography", seed, echo(params));
    report.set_exact("samples", set.len() as f64);
    report.set_exact("rho_00", rho.get(0, 0).re);
    report.set_exact("rho_11", rho.get(1, 1).re);
    report.set_exact("rho_01_abs", rho.get(0, 1).norm());
    report.set_exact("wigner_origin", wigner_point(&rho, 0.0, 0.0)?);
    report.set_exact("wigner_min", grid.min());
    report.set_exact("wigner_integral", grid.integral());
    report.set_exact("iterations", diag.iterations as f64);
    report.set_exact("converged", if diag.converged { 1.0 } else { 0.0 });
    report.set_exact("diluted_steps", diag.diluted_steps as f64);
    report.set_exact("log_likelihood", *diag.log_likelihood.last().unwrap_or(&0.0));
    report.set_exact("min_eigenvalue", rho.min_eigenvalue());

    let mut pops = Table::new(if truth.is_some() { &["n", "population", "exact"] } else { &["n", "population"] });
    for n in 0..=params.cutoff {
        let mut row = vec![n as f64, rho.get(n, n).re];
        if let Some(t) = &truth {
            row.push(t.get(n, n).re);
        }
        pops.push(row);
    }
    if let Some(t) = &truth {
        let dev = (rho.elements() - t.elements()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        report.set_exact("max_element_deviation", dev);
        report.set_exact("wigner_origin_exact", wigner_point(t, 0.0, 0.0)?);
        if let Some(n) = params.input.fock_number() {
            if params.efficiency == 1.0 && n <= params.cutoff {
                report.set("fidelity", Estimate::exact(fidelity(&rho, &make_fock_state(&[n], params.cutoff)?)?));
            }
        }
    }
    report.tables.insert("populations".into(), pops);

    let mut ll = Table::new(&["iteration", "log_likelihood"]);
    for (i, v) in diag.log_likelihood.iter().enumerate() {
        ll.push(vec![i as f64, *v]);
    }
    report.tables.insert("likelihood".into(), ll);

    let mut w = Table::new(&["x", "p", "W"]);
    for (ix, &x) in grid.xs.iter().enumerate() {
        for (ip, &p) in grid.ps.iter().enumerate() {
            w.push(vec![x, p, grid.at(ix, ip)]);
        }
    }
    report.tables.insert("wigner".into(), w);
    report.artifacts.insert("density_matrix.json".into(), density_to_json(&rho, Some(&diag)).into_bytes());
    Ok(report)
}
