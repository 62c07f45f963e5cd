//! Config-driven runner: parse a run file, execute one experiment and write
//! its report, tables and artifacts to an output directory.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use photon_splitter::experiments::{self, ExperimentReport};
use photon_splitter::rng::label;
use photon_splitter::tomography::SampleSet;
use serde::Serialize;
use thiserror::Error;

pub use config::{assignments, parse_config, ConfigError, ExperimentKind, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Experiment(#[from] photon_splitter::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("thread pool: {0}")]
    Threads(String),
}

impl RunError {
    pub fn code(&self) -> &'static str {
        match self {
            RunError::Config(e) => e.code(),
            RunError::Experiment(e) => e.code(),
            RunError::Io { .. } => "io_error",
            RunError::Threads(_) => "thread_pool",
        }
    }

    /// Process exit status: 2 for bad input, 1 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.display().to_string(), source }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Stable 64-bit fingerprint of the effective configuration (output path
/// excluded), as 16 hex digits.
pub fn config_hash(config: &RunConfig) -> String {
    let text: String = config.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    format!("{:016x}", label(&text))
}

/// Runs the experiment described by `config` on the current rayon pool.
/// Relative `samples_file` paths resolve against `base`.
pub fn execute(config: &RunConfig, base: &Path) -> Result<ExperimentReport, RunError> {
    let seed = config.seed;
    let mut report = match config.experiment {
        ExperimentKind::Anticoincidence => experiments::run_anticoincidence(&config.anticoincidence(), seed)?,
        ExperimentKind::MachZehnder => experiments::run_mach_zehnder(&config.mach_zehnder(), seed)?,
        ExperimentKind::DualHomodyne => experiments::run_dual_homodyne(&config.dual_homodyne(), seed)?,
        ExperimentKind::SnrWavepacket => experiments::run_snr_wavepacket(&config.snr(), seed)?,
        ExperimentKind::Qrng => experiments::run_qrng(&config.qrng(), seed)?,
        ExperimentKind::TomographyDataset => experiments::run_tomography_dataset(&config.tomography(), seed)?,
        ExperimentKind::Tomography => {
            let samples = match &config.samples_file {
                Some(file) => {
                    let path = base.join(file);
                    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
                    Some(SampleSet::from_csv(&text)?)
                }
                None => None,
            };
            experiments::run_tomography(&config.tomography(), samples.as_ref(), seed)?
        }
        ExperimentKind::HeraldedSource => experiments::run_heralded_source(&config.heralded(), seed)?,
    };
    report.config_echo = config.echo();
    report.validate()?;
    Ok(report)
}

/// `report.json` with the configuration fingerprint added.
pub fn report_json(report: &ExperimentReport, config: &RunConfig) -> String {
    let mut doc: serde_json::Value = serde_json::from_str(&report.to_json()).expect("report json parses");
    doc["config_hash"] = serde_json::Value::String(config_hash(config));
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// Writes `report.json`, one CSV per table and every artifact into `dir`.
pub fn write_outputs(report: &ExperimentReport, config: &RunConfig, dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let write = |name: &str, bytes: &[u8]| {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))
    };
    write("report.json", report_json(report, config).as_bytes())?;
    for (name, table) in &report.tables {
        write(&format!("{name}.csv"), table.to_csv().as_bytes())?;
    }
    for (name, bytes) in &report.artifacts {
        write(name, bytes)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    code: &'a str,
    message: String,
}

pub fn write_error(dir: &Path, err: &RunError) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let record = ErrorRecord { code: err.code(), message: err.to_string() };
    let mut s = serde_json::to_string_pretty(&record).expect("error serializes");
    s.push('\n');
    fs::write(dir.join("error.json"), s)
}

/// Output directory for a run whose config may not parse: the override,
/// else a raw `out = ...` line, else the default.
fn fallback_out(text: &str, overrides: &Overrides) -> PathBuf {
    if let Some(out) = &overrides.out {
        return out.clone();
    }
    let raw = text.lines().filter_map(|l| l.split('#').next()?.split_once('=')).find(|(k, _)| k.trim() == "out");
    match raw {
        Some((_, v)) if !v.trim().is_empty() => PathBuf::from(v.trim()),
        _ => PathBuf::from(config::DEFAULT_OUT),
    }
}

/// Parses, runs and writes a whole run. Returns the output directory.
pub fn run_text(text: &str, base: &Path, overrides: &Overrides) -> Result<PathBuf, (PathBuf, RunError)> {
    let mut config = parse_config(text).map_err(|e| (fallback_out(text, overrides), e.into()))?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(out) = &overrides.out {
        config.out = out.display().to_string();
    }
    let dir = PathBuf::from(&config.out);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = overrides.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| (dir.clone(), RunError::Threads(e.to_string())))?;
    let report = pool.install(|| execute(&config, base)).map_err(|e| (dir.clone(), e))?;
    write_outputs(&report, &config, &dir).map_err(|e| (dir.clone(), e))?;
    Ok(dir)
}

/// Like [`run_text`] but also records failures as `error.json`. Returns the
/// process exit status.
pub fn run_file(path: &Path, overrides: &Overrides) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(source) => {
            let err = RunError::Io { path: path.display().to_string(), source };
            return report_failure(&fallback_out("", overrides), &err);
        }
    };
    let base = path.parent().unwrap_or(Path::new("."));
    match run_text(&text, base, overrides) {
        Ok(dir) => {
            println!("wrote {}", dir.display());
            0
        }
        Err((dir, err)) => report_failure(&dir, &err),
    }
}

fn report_failure(dir: &Path, err: &RunError) -> i32 {
    eprintln!("error [{}]: {err}", err.code());
    if let Err(e) = write_error(dir, err) {
        eprintln!("could not write {}: {e}", dir.join("error.json").display());
    }
    err.exit_code()
}

/// Text for `photon-splitter list`: every experiment with its keys and defaults.
pub fn list_experiments() -> String {
    let mut out = String::new();
    for kind in ExperimentKind::ALL {
        let c = RunConfig::new(kind);
        out.push_str(&format!("{}\n    {}\n", kind.name(), kind.description()));
        for key in config::COMMON_KEYS.iter().skip(1).chain(kind.keys()) {
            let value = c.get(key).unwrap_or_else(|| "(unset)".to_string());
            out.push_str(&format!("    {key:<22} {value}\n"));
        }
        if !kind.inputs().is_empty() {
            let names: Vec<&str> = kind.inputs().iter().map(|i| i.name()).collect();
            out.push_str(&format!("    {:<22} {}\n", "inputs:", names.join(", ")));
        }
    }
    out
}
