//! Protocol-level contracts: empirical estimates against exact oracles,
//! vacuum null controls and the documented examples.

use std::f64::consts::PI;

use photon_splitter::experiments::{
    self, von_neumann, AnticoincidenceParams, DualHomodyneParams, Extractor, HeraldedParams, InputState,
    MachZehnderParams, QrngParams, SnrParams, TomographyParams,
};
use photon_splitter::tomography::SampleSet;

fn col(r: &experiments::ExperimentReport, table: &str, name: &str) -> Vec<f64> {
    r.table(table).unwrap().column(name).unwrap()
}

#[test]
fn anticoincidence_rates_match_click_oracle() {
    for (input, seed) in [(InputState::Photon, 1), (InputState::TwoPhoton, 2)] {
        let p = AnticoincidenceParams { eta_c: 0.7, eta_d: 0.9, input, ..Default::default() };
        let r = experiments::run_anticoincidence(&p, seed).unwrap();
        let (rate, se, exact) = (col(&r, "patterns", "rate"), col(&r, "patterns", "std_error"), col(&r, "patterns", "exact"));
        for i in 0..4 {
            let sigma = (exact[i] * (1.0 - exact[i]) / p.n_trials as f64).sqrt();
            assert!((rate[i] - exact[i]).abs() <= 5.0 * sigma.max(1e-12), "{input:?} cell {i}: {} vs {}", rate[i], exact[i]);
            assert!(se[i] >= 0.0);
        }
    }
}

#[test]
fn two_photons_do_coincide() {
    // |2,0> on a 50:50 splitter leaves |1,1> with probability 1/2
    let p = AnticoincidenceParams { input: InputState::TwoPhoton, ..Default::default() };
    let r = experiments::run_anticoincidence(&p, 5).unwrap();
    assert!(r.value("counts_both").unwrap() > 0.0);
    assert!((r.value("exact_both").unwrap() - 0.5).abs() < 1e-12);
    // P(c) = P(d) = 3/4, so α = (1/2) / (9/16)
    assert!((r.value("exact_alpha").unwrap() - 8.0 / 9.0).abs() < 1e-12);
    let a = r.summary["alpha"];
    assert!((a.value - 8.0 / 9.0).abs() <= 5.0 * a.std_error);
}

#[test]
fn ideal_anticoincidence_counts_add_up() {
    let r = experiments::run_anticoincidence(&AnticoincidenceParams::default(), 9).unwrap();
    let total: f64 = ["c_only", "d_only", "both", "none"].iter().map(|k| r.value(&format!("counts_{k}")).unwrap()).sum();
    assert_eq!(total, 100_000.0);
    assert_eq!(r.value("counts_none"), Some(0.0));
    assert_eq!(r.value("alpha"), Some(0.0));
    for key in ["counts_c_only", "counts_d_only", "counts_both", "counts_none", "alpha"] {
        assert!(r.summary.contains_key(key), "{key}");
    }
}

#[test]
fn mach_zehnder_balanced_arms_exit_symmetric_port() {
    let p = MachZehnderParams { phases: vec![0.0, PI / 3.0, PI], n_trials_per_phase: 20_000, ..Default::default() };
    let r = experiments::run_mach_zehnder(&p, 3).unwrap();
    let sym = col(&r, "fringe", "count_symmetric");
    let anti = col(&r, "fringe", "count_antisymmetric");
    assert_eq!(sym[0], 20_000.0);
    assert_eq!(anti[2], 20_000.0);
    let exact = col(&r, "fringe", "p_symmetric_exact");
    assert!((exact[1] - (PI / 6.0).cos().powi(2)).abs() < 1e-12);
}

#[test]
fn mach_zehnder_lossy_detectors_stay_within_oracle() {
    let p = MachZehnderParams { eta: 0.6, ..Default::default() };
    let r = experiments::run_mach_zehnder(&p, 4).unwrap();
    assert!(r.value("max_z_score").unwrap() <= 5.0);
    let (sym, anti, none) =
        (col(&r, "fringe", "count_symmetric"), col(&r, "fringe", "count_antisymmetric"), col(&r, "fringe", "count_none"));
    for i in 0..sym.len() {
        assert_eq!(sym[i] + anti[i] + none[i], p.n_trials_per_phase as f64);
    }
}

#[test]
fn dual_homodyne_pearson_within_five_sigma_of_exact() {
    let p = DualHomodyneParams { n_pairs_per_point: 40_000, ..Default::default() };
    let r = experiments::run_dual_homodyne(&p, 11).unwrap();
    let (rho, se, exact) =
        (col(&r, "correlations", "pearson"), col(&r, "correlations", "std_error"), col(&r, "correlations", "pearson_exact"));
    for i in 0..rho.len() {
        assert!((rho[i] - exact[i]).abs() <= 5.0 * se[i], "point {i}: {} vs {}", rho[i], exact[i]);
    }
    let (cov, cov_se, cov_exact) = (
        col(&r, "correlations", "covariance"),
        col(&r, "correlations", "covariance_se"),
        col(&r, "correlations", "covariance_exact"),
    );
    for i in 0..cov.len() {
        assert!((cov[i] - cov_exact[i]).abs() <= 5.0 * cov_se[i]);
    }
    // the sweep shows correlated, anti-correlated and uncorrelated settings
    assert!(rho.iter().any(|&r| r > 0.4));
    assert!(rho.iter().any(|&r| r < -0.4));
    assert!(rho.iter().any(|&r| r.abs() < 0.05));
    let phase = r.value("fit_phase").unwrap();
    assert!((phase - p.phi_bs).abs() < 0.05, "fitted phase {phase}");
}

#[test]
fn dual_homodyne_vacuum_is_uncorrelated() {
    let p = DualHomodyneParams { input: InputState::Vacuum, n_pairs_per_point: 40_000, ..Default::default() };
    let r = experiments::run_dual_homodyne(&p, 12).unwrap();
    let (rho, se) = (col(&r, "correlations", "pearson"), col(&r, "correlations", "std_error"));
    let outside = rho.iter().zip(&se).filter(|(r, s)| r.abs() > 3.0 * *s).count();
    // 12 points at 3σ: more than one excursion would be very unlikely
    assert!(outside <= 1, "{rho:?}");
    assert!(col(&r, "correlations", "pearson_exact").iter().all(|&e| e == 0.0));
}

#[test]
fn snr_estimates_against_variance_oracles() {
    let r = experiments::run_snr_wavepacket(&SnrParams { collection_efficiency: 0.8, ..Default::default() }, 21).unwrap();
    assert!((r.value("var_signal_exact").unwrap() - 1.3).abs() < 1e-12);
    assert!((r.value("snr_exact").unwrap() - 1.6).abs() < 1e-12);
    let s = r.summary["snr"];
    assert!((s.value - 1.6).abs() <= 5.0 * s.std_error);
    let v = r.summary["var_signal"];
    assert!((v.value - 1.3).abs() <= 5.0 * v.std_error);
}

#[test]
fn snr_vacuum_null() {
    let p = SnrParams { input: InputState::Vacuum, ..Default::default() };
    let r = experiments::run_snr_wavepacket(&p, 22).unwrap();
    let s = r.summary["snr"];
    assert!(s.value.abs() < 0.02, "{}", s.value);
    assert!(s.value.abs() <= 3.0 * s.std_error);
}

#[test]
fn qrng_extractor_halves_pairs() {
    let r = experiments::run_qrng(&QrngParams { n_bits: 200_000, extractor: Extractor::VonNeumann }, 31).unwrap();
    let out = r.value("output_bits").unwrap();
    // output length is Binomial(n/2, 1/2)
    let expected = r.value("expected_output_bits").unwrap();
    assert_eq!(expected, 50_000.0);
    assert!((out - expected).abs() <= 5.0 * (100_000.0f64 * 0.25).sqrt());
    assert_eq!(r.artifacts["bitstream.bin"].len(), (out as usize).div_ceil(8));
    let bias = r.summary["output_monobit_bias"];
    assert!(bias.value.abs() <= 5.0 * bias.std_error);
    assert_eq!(von_neumann(&[true, true, false, false]), Vec::<bool>::new());
}

#[test]
fn tomography_dataset_variances() {
    for (input, target, tol) in [(InputState::Photon, 1.5, 0.05), (InputState::Vacuum, 0.5, 0.02)] {
        let p = TomographyParams { input, ..Default::default() };
        let r = experiments::run_tomography_dataset(&p, 41).unwrap();
        for v in col(&r, "phase_variance", "variance") {
            assert!((v - target).abs() <= tol, "{input:?}: {v}");
        }
        assert!(r.value("max_variance_z").unwrap() <= 5.0);
        let csv = std::str::from_utf8(&r.artifacts["samples.csv"]).unwrap();
        let set = SampleSet::from_csv(csv).unwrap();
        assert_eq!(set.len(), 120_000);
        assert_eq!(set.phases.len(), 12);
    }
}

#[test]
fn tomography_dataset_is_bit_reproducible() {
    let p = TomographyParams { n_per_phase: 2000, ..Default::default() };
    let a = experiments::run_tomography_dataset(&p, 42).unwrap();
    let b = experiments::run_tomography_dataset(&p, 42).unwrap();
    assert_eq!(a.artifacts["samples.csv"], b.artifacts["samples.csv"]);
    let c = experiments::run_tomography_dataset(&p, 43).unwrap();
    assert_ne!(a.artifacts["samples.csv"], c.artifacts["samples.csv"]);
}

#[test]
fn tomography_reconstructs_vacuum_and_mixture() {
    let vac = TomographyParams { input: InputState::Vacuum, n_per_phase: 8334, wigner_points: 11, ..Default::default() };
    let r = experiments::run_tomography(&vac, None, 51).unwrap();
    assert!(r.value("rho_00").unwrap() >= 0.99);
    assert!(r.value("wigner_origin").unwrap() > 0.3);

    let mix = TomographyParams { input: InputState::Mixture, wigner_points: 11, ..Default::default() };
    let r = experiments::run_tomography(&mix, None, 52).unwrap();
    assert!((r.value("rho_00").unwrap() - 0.5).abs() < 0.03);
    assert!((r.value("rho_11").unwrap() - 0.5).abs() < 0.03);
    assert!(r.value("rho_01_abs").unwrap() < 0.03);
    assert!(r.value("min_eigenvalue").unwrap() >= -1e-8);
}

#[test]
fn tomography_from_given_samples_matches_simulated_run() {
    let p = TomographyParams { n_per_phase: 3000, wigner_points: 5, ..Default::default() };
    let data = experiments::run_tomography_dataset(&p, 61).unwrap();
    let set = SampleSet::from_csv(std::str::from_utf8(&data.artifacts["samples.csv"]).unwrap()).unwrap();
    let from_file = experiments::run_tomography(&p, Some(&set), 61).unwrap();
    let simulated = experiments::run_tomography(&p, None, 61).unwrap();
    assert_eq!(from_file.artifacts["density_matrix.json"], simulated.artifacts["density_matrix.json"]);
    assert!(from_file.value("fidelity").is_none());
    assert!(simulated.value("fidelity").unwrap() > 0.9);
}

#[test]
fn heralded_rate_matches_click_probability() {
    let p = HeraldedParams { lambda: 0.3, eta_h: 0.5, ..Default::default() };
    let r = experiments::run_heralded_source(&p, 71).unwrap();
    let rate = r.summary["herald_rate"];
    let exact = r.value("herald_probability").unwrap();
    assert!((rate.value - exact).abs() <= 5.0 * rate.std_error);
    let probs = col(&r, "photon_number", "probability");
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(probs[0], 0.0);
}

#[test]
fn reports_are_finite_and_rectangular() {
    let reports = [
        experiments::run_anticoincidence(&AnticoincidenceParams { n_trials: 1000, ..Default::default() }, 1).unwrap(),
        experiments::run_mach_zehnder(&MachZehnderParams { n_trials_per_phase: 100, ..Default::default() }, 1).unwrap(),
        experiments::run_heralded_source(&HeraldedParams::default(), 1).unwrap(),
    ];
    for r in &reports {
        r.validate().unwrap();
        assert!(r.to_json().contains("\"seed\": 1"));
        assert!(!r.config_echo.is_empty());
    }
}
