use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use photon_splitter_cli::{parse_config, ExperimentKind, RunConfig};
use proptest::prelude::*;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_photon-splitter"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.conf");
    fs::write(&path, text).unwrap();
    path
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Every file in `dir` with its bytes, sorted by name.
fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn default_anticoincidence_writes_report() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "experiment = anticoincidence\nseed = 42\n");
    let out = tmp.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("report.json"));
    for key in ["counts_c_only", "counts_d_only", "counts_both", "counts_none", "alpha"] {
        assert!(report["summary"][key]["value"].is_number(), "{key}");
    }
    assert_eq!(report["seed"], 42);
    assert_eq!(report["config"]["eta_c"], "1");
    assert!(report["config"].get("out").is_none());
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 16);
    assert!(out.join("patterns.csv").exists());
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "experiment = mach_zehnder\nseed = 7\nn_trials_per_phase = 3000\neta = 0.8\n");
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert!(run(&cfg, &a, &[]).status.success());
    assert!(run(&cfg, &b, &[]).status.success());
    assert!(run(&cfg, &c, &["--seed", "8"]).status.success());
    assert_eq!(files(&a), files(&b));
    assert_ne!(files(&a), files(&c));
}

#[test]
fn thread_count_does_not_change_output() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "experiment = qrng\nseed = 3\nn_bits = 50000\nextractor = von_neumann\n");
    let outputs: Vec<_> = ["1", "2", "8"]
        .iter()
        .map(|t| {
            let out = tmp.path().join(format!("t{t}"));
            assert!(run(&cfg, &out, &["--threads", t]).status.success());
            files(&out)
        })
        .collect();
    assert!(outputs[0].iter().any(|(n, _)| n == "bitstream.bin"));
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn unknown_experiment_records_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "experiment = teleportation\n");
    let out = tmp.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(!o.status.success());
    assert_eq!(json(&out.join("error.json"))["code"], "unknown_experiment");
    assert!(!out.join("report.json").exists());
}

#[test]
fn error_json_goes_to_configured_out_when_config_is_invalid() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("from_file");
    let cfg = write_config(tmp.path(), &format!("experiment = anticoincidence\nout = {}\neta_c = 1.5\n", out.display()));
    let o = bin().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = json(&out.join("error.json"));
    assert_eq!(err["code"], "validation_error");
    assert!(err["message"].as_str().unwrap().contains("eta_c"));
}

#[test]
fn duplicate_key_reports_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "experiment = qrng\nn_bits = 20000\n\nn_bits = 30000\n");
    let out = tmp.path().join("out");
    assert!(!run(&cfg, &out, &[]).status.success());
    let err = json(&out.join("error.json"));
    assert_eq!(err["code"], "parse_error");
    assert!(err["message"].as_str().unwrap().starts_with("line 4:"));
}

#[test]
fn tomography_reads_samples_file_next_to_config() {
    let tmp = TempDir::new().unwrap();
    let data_cfg = write_config(tmp.path(), "experiment = tomography_dataset\nseed = 5\nn_per_phase = 2000\n");
    let data = tmp.path().join("data");
    assert!(run(&data_cfg, &data, &[]).status.success());
    let cfg = write_config(
        tmp.path(),
        "experiment = tomography\nseed = 5\nn_per_phase = 2000\nwigner_points = 5\nsamples_file = data/samples.csv\n",
    );
    let out = tmp.path().join("rec");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("report.json"));
    assert_eq!(report["summary"]["samples"]["value"], 24000.0);
    assert!(out.join("density_matrix.json").exists());
    assert!(out.join("wigner.csv").exists());

    let missing = write_config(tmp.path(), "experiment = tomography\nsamples_file = nowhere.csv\n");
    let out = tmp.path().join("missing");
    assert_eq!(run(&missing, &out, &[]).status.code(), Some(1));
    assert_eq!(json(&out.join("error.json"))["code"], "io_error");
}

#[test]
fn list_names_every_experiment() {
    let o = bin().arg("list").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for kind in ExperimentKind::ALL {
        assert!(text.lines().any(|l| l == kind.name()), "{}", kind.name());
    }
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        0usize..ExperimentKind::ALL.len(),
        any::<u64>(),
        0.0f64..=1.0,
        1usize..1_000_000,
        prop::collection::vec(-10.0f64..10.0, 3..8),
        0.0f64..0.99,
        20usize..200,
        1e-12f64..1e-2,
    )
        .prop_map(|(k, seed, eff, n, phases, lambda, bins, tol)| {
            let kind = ExperimentKind::ALL[k];
            let mut c = RunConfig::new(kind);
            c.seed = seed;
            c.eta_c = eff;
            c.eta = eff;
            c.efficiency = eff;
            c.collection_efficiency = eff;
            c.n_trials = n;
            c.n_per_phase = n;
            c.phases = phases.clone();
            c.relative_phases = phases;
            c.lambda = lambda;
            c.n_bins = bins;
            c.tol = tol;
            c.n_bits = 10_000 + n;
            if kind == ExperimentKind::Tomography && seed % 2 == 0 {
                c.samples_file = Some("data/samples.csv".into());
            }
            c
        })
}

proptest! {
    #[test]
    fn config_round_trips_through_text(c in arb_config()) {
        let back = parse_config(&c.serialize()).unwrap();
        // keys outside the experiment are not written, so compare what is
        prop_assert_eq!(back.serialize(), c.serialize());
        prop_assert_eq!(back.echo(), c.echo());
        for key in c.active_keys() {
            prop_assert_eq!(back.get(key), c.get(key));
        }
    }
}
