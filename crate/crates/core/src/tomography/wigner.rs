//! Wigner functions in the `x = (a + a†)/√2` convention, where the vacuum is
//! `exp(-x² - p²) / π` and the function integrates to one over `dx dp`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::quadrature::require_single_mode;
use crate::fock::DensityMatrix;

pub const MAX_WIGNER_CUTOFF: usize = 16;
/// Largest admissible norm deficit of a truncated displaced Fock vector.
const DISPLACEMENT_TOL: f64 = 1e-13;
const MAX_DISPLACED_DIM: usize = 4096;

/// Closed form `W_n(x, p) = (-1)^n L_n(2r²) e^{-r²} / π`, `r² = x² + p²`.
pub fn analytic_fock_wigner(n: usize, x: f64, p: f64) -> f64 {
    let r2 = x * x + p * p;
    let y = 2.0 * r2;
    let (mut prev, mut cur) = (1.0, 1.0 - y);
    let laguerre = if n == 0 {
        1.0
    } else {
        for k in 1..n {
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0 - y) * cur - kf * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    };
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    sign * laguerre * (-r2).exp() / std::f64::consts::PI
}

/// Columns of `D(α)† = D(-α)` applied to `|0>, ..., |n_max>`, truncated at a
/// dimension large enough that every column keeps all but
/// [`DISPLACEMENT_TOL`] of its norm.
fn displaced_fock_vectors(alpha: Complex64, n_max: usize) -> Result<Vec<Vec<Complex64>>> {
    let a = alpha.norm();
    let mut dim = ((a + (n_max as f64 + 1.0).sqrt() + 9.0).powi(2).ceil() as usize).max(n_max + 9);
    loop {
        if dim > MAX_DISPLACED_DIM {
            return Err(Error::CutoffTooLarge(format!(
                "displacement |α| = {a} needs more than {MAX_DISPLACED_DIM} levels"
            )));
        }
        // |−α>: e^{−|α|²/2} (−α)^k / √k!
        let mut v0 = Vec::with_capacity(dim);
        let mut c = Complex64::new((-0.5 * a * a).exp(), 0.0);
        for k in 0..dim {
            if k > 0 {
                c *= -alpha / (k as f64).sqrt();
            }
            v0.push(c);
        }
        let mut vs = vec![v0];
        // D(−α)|m> = (a† + α*) D(−α)|m−1> / √m
        for m in 1..=n_max {
            let prev = &vs[m - 1];
            let scale = 1.0 / (m as f64).sqrt();
            let next: Vec<Complex64> = (0..dim)
                .map(|k| {
                    let raise = if k > 0 { prev[k - 1] * (k as f64).sqrt() } else { Complex64::new(0.0, 0.0) };
                    (raise + alpha.conj() * prev[k]) * scale
                })
                .collect();
            vs.push(next);
        }
        let deficit = vs
            .iter()
            .map(|v| 1.0 - v.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max);
        if deficit.abs() <= DISPLACEMENT_TOL {
            return Ok(vs);
        }
        dim *= 2;
    }
}

/// `W(x, p) = Tr[ρ D(α) Π D(α)†] / π` with `α = (x + ip)/√2` and parity `Π`.
pub fn wigner_point(rho: &DensityMatrix, x: f64, p: f64) -> Result<f64> {
    require_single_mode(rho)?;
    let cutoff = rho.cutoff();
    if cutoff > MAX_WIGNER_CUTOFF {
        return Err(Error::CutoffTooLarge(format!("cutoff {cutoff} exceeds {MAX_WIGNER_CUTOFF}")));
    }
    let alpha = Complex64::new(x, p) / std::f64::consts::SQRT_2;
    let vs = displaced_fock_vectors(alpha, cutoff)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..=cutoff {
        for n in 0..=cutoff {
            let r = rho.get(m, n);
            if r == Complex64::new(0.0, 0.0) {
                continue;
            }
            // <n| D Π D† |m> = Σ_k (−1)^k conj(v_n[k]) v_m[k]
            let overlap: Complex64 = vs[n]
                .iter()
                .zip(&vs[m])
                .enumerate()
                .map(|(k, (a, b))| if k % 2 == 0 { a.conj() * b } else { -(a.conj() * b) })
                .sum();
            acc += r * overlap;
        }
    }
    Ok(acc.re / std::f64::consts::PI)
}

/// Wigner values on a rectangular grid, `values[ix * ps.len() + ip]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.ps.len() + ip]
    }

    /// `Σ W Δx Δp` for uniform axes.
    pub fn integral(&self) -> f64 {
        let step = |v: &[f64]| if v.len() > 1 { (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64 } else { 1.0 };
        self.values.iter().sum::<f64>() * step(&self.xs) * step(&self.ps)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `x,p,W` CSV with header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,p,W\n");
        for (ix, x) in self.xs.iter().enumerate() {
            for (ip, p) in self.ps.iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", x, p, self.at(ix, ip));
            }
        }
        out
    }
}

pub fn uniform_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

pub fn wigner_from_density(rho: &DensityMatrix, xs: &[f64], ps: &[f64]) -> Result<WignerGrid> {
    require_single_mode(rho)?;
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| ps.iter().map(|&p| wigner_point(rho, x, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(WignerGrid { xs: xs.to_vec(), ps: ps.to_vec(), values: rows.concat() })
}
