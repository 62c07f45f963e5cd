//! Oracles and goodness-of-fit helpers shared by the integration tests. None
//! of these reuse the library's own numerics.

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erf;
use std::f64::consts::PI;

/// Physicists' Hermite polynomial from its explicit sum.
pub fn hermite_poly(n: usize, x: f64) -> f64 {
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    (0..=n / 2)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * fact(n) * (2.0 * x).powi((n - 2 * m) as i32) / (fact(m) * fact(n - 2 * m))
        })
        .sum()
}

/// Harmonic-oscillator eigenfunction with `x = (a + a†)/√2`.
pub fn psi(n: usize, x: f64) -> f64 {
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    hermite_poly(n, x) * (-x * x / 2.0).exp() / (2f64.powi(n as i32) * fact * PI.sqrt()).sqrt()
}

/// CDF of the vacuum quadrature (variance 1/2).
pub fn vacuum_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x))
}

/// CDF of the one-photon quadrature density `2x² e^{-x²}/√π`.
pub fn one_photon_cdf(x: f64) -> f64 {
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    vacuum_cdf(x) - x * (-x * x).exp() / PI.sqrt()
}

/// `∫_a^b f` by composite Simpson on `2k` panels, with infinite limits clipped at ±12.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let (a, b) = (a.max(-12.0), b.min(12.0));
    if b <= a {
        return 0.0;
    }
    let n = 2 * k;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Edges `-∞, lo, ..., hi, ∞` with `inner` equal-width cells in between.
pub fn edges_with_tails(lo: f64, hi: f64, inner: usize) -> Vec<f64> {
    let mut e = vec![f64::NEG_INFINITY];
    e.extend((0..=inner).map(|i| lo + (hi - lo) * i as f64 / inner as f64));
    e.push(f64::INFINITY);
    e
}

pub fn histogram(xs: &[f64], edges: &[f64]) -> Vec<u64> {
    let cells = edges.len() - 1;
    let mut c = vec![0u64; cells];
    for &x in xs {
        let i = edges.partition_point(|&e| e <= x) - 1;
        c[i.min(cells - 1)] += 1;
    }
    c
}

#[derive(Debug, Clone, Copy)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square of observed counts against cell probabilities. Cells
/// with expected count below 5 are pooled with their neighbour first.
pub fn chi_square(observed: &[u64], probabilities: &[f64]) -> ChiSquare {
    let n: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probabilities) {
        o_acc += o as f64;
        e_acc += p * n as f64;
        if e_acc >= 5.0 {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += o_acc;
        last.1 += e_acc;
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len().saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64).unwrap().sf(statistic);
    ChiSquare { statistic, dof, p_value }
}

/// Cell probabilities of the density `f` over `edges`.
pub fn cell_probabilities(f: impl Fn(f64) -> f64, edges: &[f64]) -> Vec<f64> {
    edges.windows(2).map(|w| integrate(&f, w[0], w[1], 400)).collect()
}
