//! Homodyne protocols: dual-output correlations, wave-packet SNR and the QRNG.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{echo, Estimate, ExperimentReport, Table};
use super::stats::{fit_cosine, uniform_phases, variance, variance_se, PairMoments};
use super::InputState;
use crate::error::{check_unit_interval, Error, Result};
use crate::fock::{
    apply_two_mode, attenuate, beam_splitter, expectation_quadrature_squared, expectation_xx, make_fock_state,
    DensityMatrix, FockState, QuadratureGrid, DEFAULT_CUTOFF,
};
use crate::measurement::{homodyne_sampler, wrap_phase, JointHomodyneSampler};
use crate::rng::{chunked, SeedTree};
use crate::sources::HeraldedSourceSpec;

fn wrap_signed(phi: f64) -> f64 {
    let w = wrap_phase(phi);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// `n` homodyne samples of `rho` at phase `theta`, chunked over `tree`'s streams.
pub(crate) fn sample_quadratures(rho: &DensityMatrix, theta: f64, n: usize, tree: &SeedTree) -> Result<Vec<f64>> {
    let sampler = homodyne_sampler(rho, theta, &QuadratureGrid::default())?;
    Ok(chunked(tree, n, |_, len, rng| (0..len).map(|_| sampler.sample(rng)).collect::<Vec<f64>>()).concat())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualHomodyneParams {
    pub relative_phases: Vec<f64>,
    pub phi_bs: f64,
    pub n_pairs_per_point: usize,
    pub input: InputState,
    pub cutoff: usize,
}

impl Default for DualHomodyneParams {
    fn default() -> Self {
        Self {
            relative_phases: uniform_phases(12, 2.0 * PI),
            phi_bs: FRAC_PI_2,
            n_pairs_per_point: 100_000,
            input: InputState::Photon,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

/// `|n, 0>` through a 50:50 splitter of phase `phi_bs`, then homodyne on both
/// outputs with `θ1 = Δθ`, `θ2 = 0`.
pub fn run_dual_homodyne(params: &DualHomodyneParams, seed: u64) -> Result<ExperimentReport> {
    if params.relative_phases.is_empty() {
        return Err(Error::Domain("relative phase list is empty".into()));
    }
    if params.n_pairs_per_point < 2 {
        return Err(Error::Domain("need at least 2 pairs per point".into()));
    }
    let n = params.input.require_fock("dual_homodyne")?;
    let bs = beam_splitter(0.5, params.phi_bs, params.cutoff)?;
    let state = apply_two_mode(&bs, &make_fock_state(&[n, 0], params.cutoff)?, (0, 1))?;
    let rho = state.to_density();
    let (mode1, mode2) = (rho.partial_trace(&[0])?, rho.partial_trace(&[1])?);
    let grid = QuadratureGrid::default();
    let tree = SeedTree::new(seed).named("dual_homodyne");

    let mut table = Table::new(&[
        "delta_theta",
        "theta1",
        "theta2",
        "pairs",
        "pearson",
        "std_error",
        "pearson_exact",
        "covariance",
        "covariance_se",
        "covariance_exact",
    ]);
    let mut rs = Vec::new();
    let mut ses = Vec::new();
    for (j, &dtheta) in params.relative_phases.iter().enumerate() {
        let (theta1, theta2) = (wrap_phase(dtheta), 0.0);
        let sampler = JointHomodyneSampler::new(&state, theta1, theta2, &grid)?;
        let parts = chunked(&tree.child(j as u64), params.n_pairs_per_point, |start, len, rng| {
            let mut m = PairMoments::default();
            for (a, b) in sampler.sample_many(len, start as u64, rng) {
                m.push(a.x, b.x);
            }
            m
        });
        let mut m = PairMoments::default();
        parts.iter().for_each(|p| m.merge(p));
        let cov_exact = expectation_xx(&state, theta1, theta2)?;
        let v1 = expectation_quadrature_squared(&mode1, theta1)?;
        let v2 = expectation_quadrature_squared(&mode2, theta2)?;
        let (_, cov_se) = m.raw_product();
        table.push(vec![
            dtheta,
            theta1,
            theta2,
            m.n as f64,
            m.pearson(),
            m.pearson_se(),
            cov_exact / (v1 * v2).sqrt(),
            m.covariance(),
            cov_se,
            cov_exact,
        ]);
        rs.push(m.pearson());
        ses.push(m.pearson_se());
    }

    let mut report = ExperimentReport::new("dual_homodyne", seed, echo(params));
    let max_abs = rs.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    report.set_exact("max_abs_correlation", max_abs);
    if let Some(fit) = fit_cosine(&params.relative_phases, &rs, &ses, false) {
        report.set("fit_amplitude", Estimate::new(fit.amplitude, fit.amplitude_se));
        report.set("fit_phase", Estimate::new(wrap_signed(fit.phase), fit.phase_se));
    }
    let exact = table.column("pearson_exact").unwrap_or_default();
    report.set_exact("fit_amplitude_exact", exact.iter().fold(0.0f64, |a, r| a.max(r.abs())));
    report.tables.insert("correlations".into(), table);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrParams {
    pub n_samples: usize,
    pub collection_efficiency: f64,
    pub input: InputState,
    pub bootstrap: usize,
    pub cutoff: usize,
}

impl Default for SnrParams {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            collection_efficiency: 1.0,
            input: InputState::Photon,
            bootstrap: 200,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

pub const MIN_SNR_SAMPLES: usize = 10_000;

fn snr(signal: f64, vacuum: f64) -> f64 {
    (signal - vacuum) / vacuum
}

/// Quadrature variance of the (lossy) input against the vacuum in the same
/// matched mode.
pub fn run_snr_wavepacket(params: &SnrParams, seed: u64) -> Result<ExperimentReport> {
    if params.n_samples < MIN_SNR_SAMPLES {
        return Err(Error::Domain(format!("n_samples must be at least {MIN_SNR_SAMPLES}")));
    }
    if params.bootstrap < 2 {
        return Err(Error::Domain("bootstrap needs at least 2 resamples".into()));
    }
    check_unit_interval("collection_efficiency", params.collection_efficiency)?;
    let source = HeraldedSourceSpec::default();
    let signal_rho = attenuate(&params.input.density(params.cutoff, &source)?, params.collection_efficiency)?;
    let vacuum_rho = make_fock_state(&[0], params.cutoff)?.to_density();
    let tree = SeedTree::new(seed).named("snr_wavepacket");
    let signal = sample_quadratures(&signal_rho, 0.0, params.n_samples, &tree.named("signal"))?;
    let vacuum = sample_quadratures(&vacuum_rho, 0.0, params.n_samples, &tree.named("vacuum"))?;

    let (v1, v0) = (variance(&signal), variance(&vacuum));
    let boot_tree = tree.named("bootstrap");
    let resampled: Vec<f64> = (0..params.bootstrap as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = boot_tree.stream(b);
            let mut pick = |xs: &[f64]| -> f64 {
                let n = xs.len();
                let draws: Vec<f64> = (0..n).map(|_| xs[rng.gen_range(0..n)]).collect();
                variance(&draws)
            };
            let s = pick(&signal);
            let v = pick(&vacuum);
            snr(s, v)
        })
        .collect();

    let exact1 = expectation_quadrature_squared(&signal_rho, 0.0)?;
    let exact0 = expectation_quadrature_squared(&vacuum_rho, 0.0)?;
    let mut report = ExperimentReport::new("snr_wavepacket", seed, echo(params));
    report.set("var_signal", Estimate::new(v1, variance_se(&signal)));
    report.set("var_vacuum", Estimate::new(v0, variance_se(&vacuum)));
    report.set("snr", Estimate::new(snr(v1, v0), variance(&resampled).sqrt()));
    report.set_exact("var_signal_exact", exact1);
    report.set_exact("var_vacuum_exact", exact0);
    report.set_exact("snr_exact", snr(exact1, exact0));

    let mut table = Table::new(&["signal", "samples", "variance", "std_error", "exact"]);
    table.push(vec![1.0, signal.len() as f64, v1, variance_se(&signal), exact1]);
    table.push(vec![0.0, vacuum.len() as f64, v0, variance_se(&vacuum), exact0]);
    report.tables.insert("variances".into(), table);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extractor {
    None,
    VonNeumann,
}

impl Extractor {
    pub fn name(self) -> &'static str {
        match self {
            Extractor::None => "none",
            Extractor::VonNeumann => "von_neumann",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Extractor::None, Extractor::VonNeumann].into_iter().find(|e| e.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QrngParams {
    pub n_bits: usize,
    pub extractor: Extractor,
}

impl Default for QrngParams {
    fn default() -> Self {
        Self { n_bits: 1_000_000, extractor: Extractor::None }
    }
}

pub const MIN_QRNG_BITS: usize = 10_000;

/// Non-overlapping pairs: `01 -> 0`, `10 -> 1`, equal pairs dropped.
pub fn von_neumann(bits: &[bool]) -> Vec<bool> {
    bits.chunks_exact(2).filter(|p| p[0] != p[1]).map(|p| p[0]).collect()
}

struct BitStats {
    ones_fraction: f64,
    runs_z: f64,
    serial_correlation: f64,
}

fn bit_stats(bits: &[bool]) -> BitStats {
    let n = bits.len() as f64;
    let ones = bits.iter().filter(|&&b| b).count() as f64;
    let zeros = n - ones;
    let runs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let mu = 2.0 * ones * zeros / n + 1.0;
    let var = 2.0 * ones * zeros * (2.0 * ones * zeros - n) / (n * n * (n - 1.0));
    let runs_z = if var > 0.0 { (runs as f64 - mu) / var.sqrt() } else { 0.0 };
    let mut m = PairMoments::default();
    for w in bits.windows(2) {
        m.push(w[0] as u8 as f64, w[1] as u8 as f64);
    }
    BitStats { ones_fraction: if n > 0.0 { ones / n } else { 0.0 }, runs_z, serial_correlation: m.pearson() }
}

/// Packs bits most-significant first; the last byte is zero-padded.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |byte, (i, &b)| byte | ((b as u8) << (7 - i))))
        .collect()
}

/// Sign bits of vacuum quadrature samples.
pub fn run_qrng(params: &QrngParams, seed: u64) -> Result<ExperimentReport> {
    if params.n_bits < MIN_QRNG_BITS {
        return Err(Error::Domain(format!("n_bits must be at least {MIN_QRNG_BITS}")));
    }
    let vacuum = make_fock_state(&[0], 1)?.to_density();
    let tree = SeedTree::new(seed).named("qrng");
    let xs = sample_quadratures(&vacuum, 0.0, params.n_bits, &tree)?;
    let raw: Vec<bool> = xs.iter().map(|&x| x > 0.0).collect();
    let output = match params.extractor {
        Extractor::None => raw.clone(),
        Extractor::VonNeumann => von_neumann(&raw),
    };

    let mut report = ExperimentReport::new("qrng", seed, echo(params));
    let mut table = Table::new(&["stage", "bits", "ones_fraction", "std_error", "runs_z", "serial_correlation"]);
    for (stage, bits) in [("raw", &raw), ("output", &output)] {
        let s = bit_stats(bits);
        let n = bits.len();
        let se = if n > 0 { 0.5 / (n as f64).sqrt() } else { 0.0 };
        let corr_se = if n > 1 { 1.0 / ((n - 1) as f64).sqrt() } else { 0.0 };
        table.push(vec![
            if stage == "raw" { 0.0 } else { 1.0 },
            n as f64,
            s.ones_fraction,
            se,
            s.runs_z,
            s.serial_correlation,
        ]);
        report.set_exact(&format!("{stage}_bits"), n as f64);
        report.set(&format!("{stage}_ones_fraction"), Estimate::new(s.ones_fraction, se));
        report.set(&format!("{stage}_monobit_bias"), Estimate::new(s.ones_fraction - 0.5, se));
        report.set(&format!("{stage}_runs_z"), Estimate::new(s.runs_z, 1.0));
        report.set(&format!("{stage}_serial_correlation"), Estimate::new(s.serial_correlation, corr_se));
    }
    // each raw pair survives with probability 2 p (1 - p) = 1/2 for unbiased bits
    let expected = match params.extractor {
        Extractor::None => raw.len() as f64,
        Extractor::VonNeumann => (raw.len() / 2) as f64 / 2.0,
    };
    report.set_exact("expected_output_bits", expected);
    report.tables.insert("bit_statistics".into(), table);
    report.artifacts.insert("bitstream.bin".into(), pack_bits(&output));
    Ok(report)
}
