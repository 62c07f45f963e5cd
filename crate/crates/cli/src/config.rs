//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Lists are comma-separated. Every key except `experiment` has a default,
//! and only keys that apply to the chosen experiment are accepted.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use photon_splitter::experiments::stats::uniform_phases;
use photon_splitter::experiments::{
    AnticoincidenceParams, DualHomodyneParams, Extractor, HeraldedParams, InputState, MachZehnderParams, QrngParams,
    SnrParams, MIN_QRNG_BITS, MIN_SNR_SAMPLES, TomographyParams,
};
use photon_splitter::tomography::data::MIN_BINS;
use photon_splitter::tomography::wigner::MAX_WIGNER_CUTOFF;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },

    #[error("unknown experiment `{name}`")]
    UnknownExperiment { name: String },

    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Parse { .. } => "parse_error",
            ConfigError::UnknownKey { .. } => "unknown_key",
            ConfigError::UnknownExperiment { .. } => "unknown_experiment",
            ConfigError::Validation { .. } => "validation_error",
        }
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { key: key.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    Anticoincidence,
    MachZehnder,
    DualHomodyne,
    SnrWavepacket,
    Qrng,
    TomographyDataset,
    Tomography,
    HeraldedSource,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::Anticoincidence,
        ExperimentKind::MachZehnder,
        ExperimentKind::DualHomodyne,
        ExperimentKind::SnrWavepacket,
        ExperimentKind::Qrng,
        ExperimentKind::TomographyDataset,
        ExperimentKind::Tomography,
        ExperimentKind::HeraldedSource,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Anticoincidence => "anticoincidence",
            ExperimentKind::MachZehnder => "mach_zehnder",
            ExperimentKind::DualHomodyne => "dual_homodyne",
            ExperimentKind::SnrWavepacket => "snr_wavepacket",
            ExperimentKind::Qrng => "qrng",
            ExperimentKind::TomographyDataset => "tomography_dataset",
            ExperimentKind::Tomography => "tomography",
            ExperimentKind::HeraldedSource => "heralded_source",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::Anticoincidence => "one photon on a 50:50 splitter, click detectors on both outputs",
            ExperimentKind::MachZehnder => "single-photon Mach-Zehnder fringes versus arm phase",
            ExperimentKind::DualHomodyne => "homodyne correlations between both splitter outputs",
            ExperimentKind::SnrWavepacket => "quadrature variance of one photon against vacuum",
            ExperimentKind::Qrng => "random bits from the sign of vacuum quadrature samples",
            ExperimentKind::TomographyDataset => "phase-tagged homodyne samples for tomography",
            ExperimentKind::Tomography => "maximum-likelihood state reconstruction and Wigner function",
            ExperimentKind::HeraldedSource => "heralded single photons from a pair source",
        }
    }

    /// Parameter keys this experiment accepts besides `experiment`, `seed` and `out`.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Anticoincidence => &["eta_c", "eta_d", "n_trials", "input", "cutoff"],
            ExperimentKind::MachZehnder => &["phases", "n_trials_per_phase", "eta", "input", "cutoff"],
            ExperimentKind::DualHomodyne => &["relative_phases", "phi_bs", "n_pairs_per_point", "input", "cutoff"],
            ExperimentKind::SnrWavepacket => &["n_samples", "collection_efficiency", "input", "bootstrap", "cutoff"],
            ExperimentKind::Qrng => &["n_bits", "extractor"],
            ExperimentKind::TomographyDataset => {
                &["input", "phases", "n_per_phase", "cutoff", "lambda", "eta_h", "efficiency"]
            }
            ExperimentKind::Tomography => &[
                "input",
                "phases",
                "n_per_phase",
                "n_bins",
                "cutoff",
                "max_iters",
                "tol",
                "lambda",
                "eta_h",
                "efficiency",
                "wigner_points",
                "wigner_extent",
                "samples_file",
            ],
            ExperimentKind::HeraldedSource => &["lambda", "eta_h", "n_trials", "cutoff"],
        }
    }

    /// Inputs that make sense for this experiment.
    pub fn inputs(self) -> &'static [InputState] {
        use InputState::*;
        match self {
            ExperimentKind::Anticoincidence | ExperimentKind::MachZehnder | ExperimentKind::DualHomodyne => {
                &[Photon, Vacuum, TwoPhoton]
            }
            ExperimentKind::SnrWavepacket | ExperimentKind::TomographyDataset | ExperimentKind::Tomography => {
                &[Photon, Vacuum, TwoPhoton, Mixture, Heralded]
            }
            ExperimentKind::Qrng | ExperimentKind::HeraldedSource => &[],
        }
    }

    fn default_phases(self) -> Vec<f64> {
        match self {
            ExperimentKind::TomographyDataset | ExperimentKind::Tomography => uniform_phases(12, PI),
            _ => uniform_phases(16, 2.0 * PI),
        }
    }
}

pub const COMMON_KEYS: [&str; 3] = ["experiment", "seed", "out"];
pub const DEFAULT_OUT: &str = "out";
pub const MAX_CUTOFF: usize = MAX_WIGNER_CUTOFF;

/// Every parameter any experiment can take; only the keys of the selected
/// experiment are read or written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub out: String,
    pub cutoff: usize,
    pub input: InputState,
    pub eta_c: f64,
    pub eta_d: f64,
    pub n_trials: usize,
    pub eta: f64,
    pub phases: Vec<f64>,
    pub n_trials_per_phase: usize,
    pub relative_phases: Vec<f64>,
    pub phi_bs: f64,
    pub n_pairs_per_point: usize,
    pub n_samples: usize,
    pub collection_efficiency: f64,
    pub bootstrap: usize,
    pub n_bits: usize,
    pub extractor: Extractor,
    pub n_per_phase: usize,
    pub n_bins: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub lambda: f64,
    pub eta_h: f64,
    pub efficiency: f64,
    pub wigner_points: usize,
    pub wigner_extent: f64,
    pub samples_file: Option<String>,
}

impl RunConfig {
    /// All defaults for `experiment`.
    pub fn new(experiment: ExperimentKind) -> Self {
        let ac = AnticoincidenceParams::default();
        let mz = MachZehnderParams::default();
        let dh = DualHomodyneParams::default();
        let snr = SnrParams::default();
        let q = QrngParams::default();
        let t = TomographyParams::default();
        Self {
            experiment,
            seed: 0,
            out: DEFAULT_OUT.to_string(),
            cutoff: ac.cutoff,
            input: InputState::Photon,
            eta_c: ac.eta_c,
            eta_d: ac.eta_d,
            n_trials: ac.n_trials,
            eta: mz.eta,
            phases: experiment.default_phases(),
            n_trials_per_phase: mz.n_trials_per_phase,
            relative_phases: dh.relative_phases,
            phi_bs: FRAC_PI_2,
            n_pairs_per_point: dh.n_pairs_per_point,
            n_samples: snr.n_samples,
            collection_efficiency: snr.collection_efficiency,
            bootstrap: snr.bootstrap,
            n_bits: q.n_bits,
            extractor: q.extractor,
            n_per_phase: t.n_per_phase,
            n_bins: t.n_bins,
            max_iters: t.max_iters,
            tol: t.tol,
            lambda: t.lambda,
            eta_h: t.eta_h,
            efficiency: t.efficiency,
            wigner_points: t.wigner_points,
            wigner_extent: t.wigner_extent,
            samples_file: None,
        }
    }

    /// Current value of `key` in config syntax; `None` for unknown keys and
    /// for an unset `samples_file`.
    pub fn get(&self, key: &str) -> Option<String> {
        fn list(v: &[f64]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
        }
        Some(match key {
            "experiment" => self.experiment.name().to_string(),
            "seed" => self.seed.to_string(),
            "out" => self.out.clone(),
            "cutoff" => self.cutoff.to_string(),
            "input" => self.input.name().to_string(),
            "eta_c" => self.eta_c.to_string(),
            "eta_d" => self.eta_d.to_string(),
            "n_trials" => self.n_trials.to_string(),
            "eta" => self.eta.to_string(),
            "phases" => list(&self.phases),
            "n_trials_per_phase" => self.n_trials_per_phase.to_string(),
            "relative_phases" => list(&self.relative_phases),
            "phi_bs" => self.phi_bs.to_string(),
            "n_pairs_per_point" => self.n_pairs_per_point.to_string(),
            "n_samples" => self.n_samples.to_string(),
            "collection_efficiency" => self.collection_efficiency.to_string(),
            "bootstrap" => self.bootstrap.to_string(),
            "n_bits" => self.n_bits.to_string(),
            "extractor" => self.extractor.name().to_string(),
            "n_per_phase" => self.n_per_phase.to_string(),
            "n_bins" => self.n_bins.to_string(),
            "max_iters" => self.max_iters.to_string(),
            "tol" => self.tol.to_string(),
            "lambda" => self.lambda.to_string(),
            "eta_h" => self.eta_h.to_string(),
            "efficiency" => self.efficiency.to_string(),
            "wigner_points" => self.wigner_points.to_string(),
            "wigner_extent" => self.wigner_extent.to_string(),
            "samples_file" => self.samples_file.clone()?,
            _ => return None,
        })
    }

    /// Assigns one key from its textual value, checking the value's range.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "experiment" => {
                self.experiment =
                    ExperimentKind::parse(v).ok_or_else(|| ConfigError::UnknownExperiment { name: v.to_string() })?
            }
            "seed" => self.seed = v.parse().map_err(|_| invalid(key, "expected an unsigned 64-bit integer"))?,
            "out" => {
                if v.is_empty() {
                    return Err(invalid(key, "must not be empty"));
                }
                self.out = v.to_string()
            }
            "cutoff" => {
                let c = count(key, v)?;
                if c > MAX_CUTOFF {
                    return Err(invalid(key, format!("must be between 1 and {MAX_CUTOFF}")));
                }
                self.cutoff = c
            }
            "input" => {
                self.input = InputState::parse(v).ok_or_else(|| {
                    let names: Vec<&str> = InputState::ALL.iter().map(|i| i.name()).collect();
                    invalid(key, format!("expected one of {}", names.join(", ")))
                })?
            }
            "eta_c" => self.eta_c = unit(key, v)?,
            "eta_d" => self.eta_d = unit(key, v)?,
            "n_trials" => self.n_trials = count(key, v)?,
            "eta" => self.eta = unit(key, v)?,
            "phases" => self.phases = phase_list(key, v)?,
            "n_trials_per_phase" => self.n_trials_per_phase = count(key, v)?,
            "relative_phases" => self.relative_phases = phase_list(key, v)?,
            "phi_bs" => self.phi_bs = finite(key, v)?,
            "n_pairs_per_point" => self.n_pairs_per_point = at_least(key, v, 2)?,
            "n_samples" => self.n_samples = at_least(key, v, MIN_SNR_SAMPLES)?,
            "collection_efficiency" => self.collection_efficiency = unit(key, v)?,
            "bootstrap" => self.bootstrap = at_least(key, v, 2)?,
            "n_bits" => self.n_bits = at_least(key, v, MIN_QRNG_BITS)?,
            "extractor" => {
                self.extractor =
                    Extractor::parse(v).ok_or_else(|| invalid(key, "expected `none` or `von_neumann`"))?
            }
            "n_per_phase" => self.n_per_phase = count(key, v)?,
            "n_bins" => self.n_bins = at_least(key, v, MIN_BINS)?,
            "max_iters" => self.max_iters = count(key, v)?,
            "tol" => {
                let t = finite(key, v)?;
                if t <= 0.0 {
                    return Err(invalid(key, "must be positive"));
                }
                self.tol = t
            }
            "lambda" => {
                let l = finite(key, v)?;
                if !(0.0..1.0).contains(&l) {
                    return Err(invalid(key, "must lie in [0, 1)"));
                }
                self.lambda = l
            }
            "eta_h" => self.eta_h = unit(key, v)?,
            "efficiency" => self.efficiency = unit(key, v)?,
            "wigner_points" => self.wigner_points = at_least(key, v, 2)?,
            "wigner_extent" => {
                let e = finite(key, v)?;
                if e <= 0.0 {
                    return Err(invalid(key, "must be positive"));
                }
                self.wigner_extent = e
            }
            "samples_file" => {
                if v.is_empty() {
                    return Err(invalid(key, "must not be empty"));
                }
                self.samples_file = Some(v.to_string())
            }
            _ => return Err(invalid(key, "unknown key")),
        }
        Ok(())
    }

    /// Keys written by [`RunConfig::serialize`], in order.
    pub fn active_keys(&self) -> Vec<&'static str> {
        let mut keys: Vec<&'static str> = COMMON_KEYS.to_vec();
        keys.extend(self.experiment.keys().iter().filter(|k| **k != "samples_file" || self.samples_file.is_some()));
        keys
    }

    /// Parameter echo for reports: every active key except the output path.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.active_keys()
            .into_iter()
            .filter(|k| *k != "out")
            .filter_map(|k| Some((k.to_string(), self.get(k)?)))
            .collect()
    }

    /// Text that [`parse_config`] turns back into an equal config.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for key in self.active_keys() {
            if let Some(v) = self.get(key) {
                let _ = writeln!(out, "{key} = {v}");
            }
        }
        out
    }

    fn check_consistency(&self) -> Result<(), ConfigError> {
        let allowed = self.experiment.inputs();
        if !allowed.is_empty() && !allowed.contains(&self.input) {
            let names: Vec<&str> = allowed.iter().map(|i| i.name()).collect();
            return Err(invalid(
                "input",
                format!("`{}` does not apply to {}; expected one of {}", self.input.name(), self.experiment.name(), names.join(", ")),
            ));
        }
        if self.input == InputState::TwoPhoton && self.cutoff < 2 {
            return Err(invalid("cutoff", "two-photon input needs cutoff >= 2"));
        }
        Ok(())
    }

    pub fn anticoincidence(&self) -> AnticoincidenceParams {
        AnticoincidenceParams {
            eta_c: self.eta_c,
            eta_d: self.eta_d,
            n_trials: self.n_trials,
            input: self.input,
            cutoff: self.cutoff,
        }
    }

    pub fn mach_zehnder(&self) -> MachZehnderParams {
        MachZehnderParams {
            phases: self.phases.clone(),
            n_trials_per_phase: self.n_trials_per_phase,
            eta: self.eta,
            input: self.input,
            cutoff: self.cutoff,
        }
    }

    pub fn dual_homodyne(&self) -> DualHomodyneParams {
        DualHomodyneParams {
            relative_phases: self.relative_phases.clone(),
            phi_bs: self.phi_bs,
            n_pairs_per_point: self.n_pairs_per_point,
            input: self.input,
            cutoff: self.cutoff,
        }
    }

    pub fn snr(&self) -> SnrParams {
        SnrParams {
            n_samples: self.n_samples,
            collection_efficiency: self.collection_efficiency,
            input: self.input,
            bootstrap: self.bootstrap,
            cutoff: self.cutoff,
        }
    }

    pub fn qrng(&self) -> QrngParams {
        QrngParams { n_bits: self.n_bits, extractor: self.extractor }
    }

    pub fn tomography(&self) -> TomographyParams {
        TomographyParams {
            input: self.input,
            phases: self.phases.clone(),
            n_per_phase: self.n_per_phase,
            n_bins: self.n_bins,
            cutoff: self.cutoff,
            max_iters: self.max_iters,
            tol: self.tol,
            lambda: self.lambda,
            eta_h: self.eta_h,
            efficiency: self.efficiency,
            wigner_points: self.wigner_points,
            wigner_extent: self.wigner_extent,
        }
    }

    pub fn heralded(&self) -> HeraldedParams {
        HeraldedParams { lambda: self.lambda, eta_h: self.eta_h, n_trials: self.n_trials, cutoff: self.cutoff }
    }
}

fn finite(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| invalid(key, format!("`{v}` is not a finite number")))
}

fn unit(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = finite(key, v)?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(invalid(key, format!("{x} outside [0, 1]")))
    }
}

fn at_least(key: &str, v: &str, min: usize) -> Result<usize, ConfigError> {
    let n: usize = v.parse().map_err(|_| invalid(key, format!("`{v}` is not a non-negative integer")))?;
    if n < min {
        return Err(invalid(key, format!("must be at least {min}")));
    }
    Ok(n)
}

fn count(key: &str, v: &str) -> Result<usize, ConfigError> {
    at_least(key, v, 1)
}

fn phase_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let phases = v.split(',').map(|p| finite(key, p.trim())).collect::<Result<Vec<_>, _>>()?;
    if phases.is_empty() {
        return Err(invalid(key, "list is empty"));
    }
    Ok(phases)
}

/// `(line number, key, value)` for every assignment, in file order.
pub fn assignments(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse { line, message: format!("expected `key = value`, found `{content}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::Parse { line, message: format!("invalid key `{key}`") });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse { line, message: format!("missing value for `{key}`") });
        }
        if let Some((first, ..)) = out.iter().find(|(_, k, _)| k == key) {
            return Err(ConfigError::Parse { line, message: format!("duplicate key `{key}` (first set on line {first})") });
        }
        out.push((line, key.to_string(), value.to_string()));
    }
    Ok(out)
}

fn is_known_key(key: &str) -> bool {
    COMMON_KEYS.contains(&key) || ExperimentKind::ALL.iter().any(|k| k.keys().contains(&key))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let pairs = assignments(text)?;
    for (line, key, _) in &pairs {
        if !is_known_key(key) {
            return Err(ConfigError::UnknownKey { key: key.clone(), line: *line });
        }
    }
    let name = pairs
        .iter()
        .find(|(_, k, _)| k == "experiment")
        .map(|(_, _, v)| v.as_str())
        .ok_or_else(|| invalid("experiment", "required"))?;
    let kind = ExperimentKind::parse(name).ok_or_else(|| ConfigError::UnknownExperiment { name: name.to_string() })?;
    let mut config = RunConfig::new(kind);
    for (_, key, value) in &pairs {
        if !COMMON_KEYS.contains(&key.as_str()) && !kind.keys().contains(&key.as_str()) {
            return Err(invalid(key, format!("does not apply to experiment `{}`", kind.name())));
        }
        config.set(key, value)?;
    }
    config.check_consistency()?;
    Ok(config)
}
