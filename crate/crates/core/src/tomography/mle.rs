//! Binned homodyne POVMs and expectation-maximization (RρR) reconstruction.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::data::{BinnedData, MIN_PHASES};
use crate::error::{Error, Result};
use crate::fock::quadrature::{hermite_functions_into, simpson};
use crate::fock::{DensityMatrix, FockBasis};

/// Integration step for bin overlaps.
const STEP: f64 = 2.5e-3;
const MIN_DILUTION: f64 = 1e-12;
const LIKELIHOOD_SLACK: f64 = 1e-9;

fn reach(cutoff: usize) -> f64 {
    (2.0 * cutoff as f64 + 1.0).sqrt() + 15.0
}

/// Real overlaps `∫_lo^hi ψ_m ψ_n dx`; infinite limits are allowed.
fn bin_overlaps(lo: f64, hi: f64, cutoff: usize) -> DMatrix<f64> {
    let r = reach(cutoff);
    let (lo, hi) = (lo.max(-r), hi.min(r));
    let d = cutoff + 1;
    let mut out = DMatrix::<f64>::zeros(d, d);
    if hi <= lo {
        return out;
    }
    let intervals = (((hi - lo) / STEP).ceil() as usize).max(64);
    let mut psi = Vec::with_capacity(d);
    // Simpson over all pair products at once
    let n = intervals + intervals % 2;
    let h = (hi - lo) / n as f64;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        hermite_functions_into(lo + i as f64 * h, cutoff, &mut psi);
        for m in 0..d {
            for k in m..d {
                out[(m, k)] += w * psi[m] * psi[k];
            }
        }
    }
    for m in 0..d {
        for k in m..d {
            out[(m, k)] *= h / 3.0;
            out[(k, m)] = out[(m, k)];
        }
    }
    out
}

/// POVM element `∫_bin |x,θ><x,θ| dx` in the Fock basis, with
/// `<m|x,θ> = e^{imθ} ψ_m(x)`.
pub fn bin_povm(theta: f64, lo: f64, hi: f64, cutoff: usize) -> DMatrix<Complex64> {
    let s = bin_overlaps(lo, hi, cutoff);
    DMatrix::from_fn(cutoff + 1, cutoff + 1, |m, n| {
        Complex64::from_polar(s[(m, n)], (m as f64 - n as f64) * theta)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood before the first and after every accepted step.
    pub log_likelihood: Vec<f64>,
    /// Steps where the plain RρR update had to be diluted to stay monotone.
    pub diluted_steps: usize,
    pub final_change: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    pub cutoff: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { cutoff: crate::fock::DEFAULT_CUTOFF, max_iters: 2000, tol: 1e-7 }
    }
}

struct Outcome {
    povm: DMatrix<Complex64>,
    count: f64,
}

fn probability(povm: &DMatrix<Complex64>, rho: &DMatrix<Complex64>) -> f64 {
    // Tr[Π ρ] = Σ Π_mn ρ_nm = Σ Π_mn conj(ρ_mn) for Hermitian ρ
    povm.iter().zip(rho.iter()).map(|(a, b)| a * b.conj()).sum::<Complex64>().re
}

fn log_likelihood(outcomes: &[Outcome], rho: &DMatrix<Complex64>) -> f64 {
    outcomes.iter().map(|o| o.count * probability(&o.povm, rho).max(f64::MIN_POSITIVE).ln()).sum()
}

fn normalized_sandwich(left: &DMatrix<Complex64>, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let out = left * rho * left.adjoint();
    let out = (&out + out.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = out.trace().re;
    out / Complex64::new(tr, 0.0)
}

/// Maximum-likelihood density matrix from binned homodyne data.
///
/// Iterates `ρ <- RρR / Tr`, `R = Σ_j (f_j / p_j) Π_j`. When a plain step
/// would lower the likelihood it falls back to the diluted update
/// `(I + εR) ρ (I + εR)` with ε halved until the likelihood rises, so the
/// likelihood trajectory is nondecreasing. Not reaching `tol` within
/// `max_iters` is reported through `converged = false` with the last
/// iterate, not as an error.
pub fn mle_reconstruct(data: &BinnedData, options: &MleOptions) -> Result<(DensityMatrix, MleDiagnostics)> {
    let found = data.totals.iter().filter(|&&t| t > 0).count();
    if found < MIN_PHASES {
        return Err(Error::TooFewPhases { found });
    }
    if !(options.tol > 0.0) || options.max_iters == 0 {
        return Err(Error::Domain("tolerance must be positive and max_iters >= 1".into()));
    }
    let cutoff = options.cutoff;
    let basis = FockBasis::new(1, cutoff)?;
    let d = cutoff + 1;
    let n_bins = data.n_bins();

    // outer bins extend to ±∞ so each phase's POVM sums to the identity
    let mut outcomes = Vec::new();
    for (theta, counts) in data.phases.iter().zip(&data.counts) {
        for (b, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let lo = if b == 0 { f64::NEG_INFINITY } else { data.edges[b] };
            let hi = if b + 1 == n_bins { f64::INFINITY } else { data.edges[b + 1] };
            outcomes.push(Outcome { povm: bin_povm(*theta, lo, hi, cutoff), count: count as f64 });
        }
    }
    let total: f64 = outcomes.iter().map(|o| o.count).sum();
    let identity = DMatrix::<Complex64>::identity(d, d);

    let mut rho = identity.clone() / Complex64::new(d as f64, 0.0);
    let mut ll = log_likelihood(&outcomes, &rho);
    let mut diag = MleDiagnostics {
        iterations: 0,
        converged: false,
        log_likelihood: vec![ll],
        diluted_steps: 0,
        final_change: f64::INFINITY,
    };

    for _ in 0..options.max_iters {
        let mut r = DMatrix::<Complex64>::zeros(d, d);
        for o in &outcomes {
            let p = probability(&o.povm, &rho).max(f64::MIN_POSITIVE);
            r += &o.povm * Complex64::new(o.count / (total * p), 0.0);
        }
        let mut next = normalized_sandwich(&r, &rho);
        let mut next_ll = log_likelihood(&outcomes, &next);
        if next_ll < ll {
            diag.diluted_steps += 1;
            let mut eps = 1.0;
            loop {
                next = normalized_sandwich(&(&identity + &r * Complex64::new(eps, 0.0)), &rho);
                next_ll = log_likelihood(&outcomes, &next);
                if next_ll >= ll || eps < MIN_DILUTION {
                    break;
                }
                eps *= 0.5;
            }
            if next_ll < ll {
                // no ascent direction left at this precision
                next = rho.clone();
                next_ll = ll;
            }
        }
        let change = (&next - &rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
        rho = next;
        ll = next_ll;
        diag.iterations += 1;
        diag.log_likelihood.push(ll);
        diag.final_change = change;
        if change < options.tol {
            diag.converged = true;
            break;
        }
    }
    debug_assert!(diag.log_likelihood.windows(2).all(|w| w[1] >= w[0] - LIKELIHOOD_SLACK));
    Ok((DensityMatrix::from_rounded(basis, rho)?, diag))
}

/// `∫_a^b ψ_m ψ_n` by Simpson's rule on a fixed fine mesh (test oracle helper).
pub fn overlap_integral(m: usize, n: usize, a: f64, b: f64) -> f64 {
    use crate::fock::quadrature_wavefunction as psi;
    simpson(|x| psi(m, x) * psi(n, x), a, b, 20_000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_fock_state, FockState};
    use crate::measurement::sample_homodyne;
    use crate::rng::SeedTree;
    use crate::tomography::data::{bin_samples, SampleSet};
    use approx::assert_abs_diff_eq;

    fn max_dev(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn bins_spanning_the_line_sum_to_identity() {
        let cutoff = 6;
        for &theta in &[0.0, 0.7, 2.9] {
            let edges: Vec<f64> = (0..=50).map(|i| -8.0 + 16.0 * i as f64 / 50.0).collect();
            let mut sum = DMatrix::<Complex64>::zeros(7, 7);
            for w in edges.windows(2) {
                let p = bin_povm(theta, w[0], w[1], cutoff);
                assert!(max_dev(&p, &p.adjoint()) < 1e-15);
                let ev = p.symmetric_eigenvalues();
                assert!(ev.iter().all(|&l| l > -1e-8 && l < 1.0 + 1e-8));
                sum += p;
            }
            assert!(max_dev(&sum, &DMatrix::identity(7, 7)) < 1e-6);
        }
    }

    #[test]
    fn symmetric_bin_has_no_odd_coherence() {
        let p = bin_povm(0.3, -0.4, 0.4, 4);
        assert_abs_diff_eq!(p[(0, 1)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn single_photon_bin_probability() {
        let one = make_fock_state(&[1], 6).unwrap().to_density();
        let (a, b) = (0.3, 1.1);
        let p = bin_povm(1.2, a, b, 6);
        let got = (p * one.elements()).trace().re;
        assert_abs_diff_eq!(got, overlap_integral(1, 1, a, b), epsilon = 1e-10);
    }

    fn dataset(rho: &DensityMatrix, seed: u64, n: usize) -> SampleSet {
        let tree = SeedTree::new(seed);
        let mut samples = Vec::new();
        for j in 0..12 {
            let theta = std::f64::consts::PI * j as f64 / 12.0;
            samples.extend(sample_homodyne(rho, theta, n, &mut tree.stream(j)).unwrap());
        }
        SampleSet::from_samples(&samples)
    }

    #[test]
    fn reconstructs_even_mixture() {
        let rho = DensityMatrix::diagonal(6, &[0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let data = bin_samples(&dataset(&rho, 21, 10_000), 50).unwrap();
        let (est, diag) = mle_reconstruct(&data, &MleOptions::default()).unwrap();
        assert!((est.get(0, 0).re - 0.5).abs() < 0.03);
        assert!((est.get(1, 1).re - 0.5).abs() < 0.03);
        assert!(est.get(0, 1).norm() < 0.03);
        assert!(diag.log_likelihood.windows(2).all(|w| w[1] >= w[0] - LIKELIHOOD_SLACK));
        assert!(est.min_eigenvalue() > -1e-8);
    }

    #[test]
    fn reconstructs_vacuum() {
        let rho = make_fock_state(&[0], 6).unwrap().to_density();
        let data = bin_samples(&dataset(&rho, 22, 100_000 / 12 + 1), 50).unwrap();
        let (est, _) = mle_reconstruct(&data, &MleOptions::default()).unwrap();
        assert!(est.get(0, 0).re >= 0.99, "{}", est.get(0, 0).re);
    }

    #[test]
    fn rejects_bad_options() {
        let rho = make_fock_state(&[0], 6).unwrap().to_density();
        let data = bin_samples(&dataset(&rho, 23, 100), 20).unwrap();
        let bad = MleOptions { tol: 0.0, ..Default::default() };
        assert!(mle_reconstruct(&data, &bad).is_err());
    }
}
