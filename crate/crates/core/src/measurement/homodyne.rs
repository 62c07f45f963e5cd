//! Homodyne (field-quadrature) sampling by inverse-CDF lookup.
//!
//! Densities are tabulated on a [`QuadratureGrid`] and treated as piecewise
//! linear between nodes; the CDF is then piecewise quadratic and is inverted
//! exactly inside each cell. Products `ψ_k ψ_l` and their running trapezoid
//! integrals are tabulated once per (cutoff, grid), so the CDF of any
//! single-mode density follows by a weighted sum of tables.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::clicks::DetectorSpec;
use crate::error::{Error, Result};
use crate::fock::quadrature::{density_weights, hermite_functions_into, require_single_mode};
use crate::fock::{attenuate, DensityMatrix, FockState, PureState, QuadratureGrid};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const CDF_CACHE_CAPACITY: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSample {
    pub x: f64,
    /// LO phase in `[0, 2π)`.
    pub theta: f64,
    pub mode: usize,
    pub trial_index: u64,
}

impl QuadratureSample {
    pub fn new(x: f64, theta: f64, mode: usize, trial_index: u64) -> Self {
        Self { x, theta: wrap_phase(theta), mode, trial_index }
    }
}

pub fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TWO_PI);
    if t >= TWO_PI { 0.0 } else { t }
}

struct BasisTables {
    grid: QuadratureGrid,
    levels: usize,
    n_pairs: usize,
    /// `ψ_k ψ_l` at node j, index `j * n_pairs + pair`
    products: Vec<f64>,
    /// trapezoid integral of `ψ_k ψ_l` from `x_min` to node j
    cumulative: Vec<f64>,
}

impl BasisTables {
    fn build(cutoff: usize, grid: QuadratureGrid) -> Self {
        let levels = cutoff + 1;
        let n_pairs = levels * (levels + 1) / 2;
        let n = grid.n_points();
        let h = grid.spacing();
        let mut products = Vec::with_capacity(n * n_pairs);
        let mut psi = Vec::with_capacity(levels);
        for j in 0..n {
            hermite_functions_into(grid.value(j), cutoff, &mut psi);
            for k in 0..levels {
                for l in k..levels {
                    products.push(psi[k] * psi[l]);
                }
            }
        }
        let mut cumulative = vec![0.0; n * n_pairs];
        for j in 1..n {
            for p in 0..n_pairs {
                cumulative[j * n_pairs + p] = cumulative[(j - 1) * n_pairs + p]
                    + 0.5 * h * (products[(j - 1) * n_pairs + p] + products[j * n_pairs + p]);
            }
        }
        Self { grid, levels, n_pairs, products, cumulative }
    }

    fn weighted(&self, table: &[f64], weights: &[f64], j: usize) -> f64 {
        let row = &table[j * self.n_pairs..(j + 1) * self.n_pairs];
        row.iter().zip(weights).map(|(a, w)| a * w).sum()
    }
}

type TableKey = (usize, u64, u64, usize);

fn tables(cutoff: usize, grid: &QuadratureGrid) -> Arc<BasisTables> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<BasisTables>>>> = OnceLock::new();
    let key = (cutoff, grid.x_min().to_bits(), grid.x_max().to_bits(), grid.n_points());
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    cache.entry(key).or_insert_with(|| Arc::new(BasisTables::build(cutoff, *grid))).clone()
}

/// Position `s` in `[0, h]` where the linear density `d0 -> d1` has
/// accumulated mass `r`.
fn invert_cell(h: f64, d0: f64, d1: f64, r: f64) -> f64 {
    let d0 = d0.max(0.0);
    let d1 = d1.max(0.0);
    let mass = 0.5 * h * (d0 + d1);
    let r = r.clamp(0.0, mass);
    let disc = (d0 * d0 + 2.0 * (d1 - d0) * r / h).max(0.0);
    let denom = d0 + disc.sqrt();
    if denom <= 0.0 {
        return 0.5 * h;
    }
    (2.0 * r / denom).clamp(0.0, h)
}

/// Tabulated inverse CDF of one homodyne outcome distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCdf {
    grid: QuadratureGrid,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    fn from_weights(tables: &BasisTables, weights: &[f64]) -> Self {
        let n = tables.grid.n_points();
        let h = tables.grid.spacing();
        let density: Vec<f64> = (0..n).map(|j| tables.weighted(&tables.products, weights, j).max(0.0)).collect();
        let mut cdf = vec![0.0; n];
        for j in 1..n {
            cdf[j] = cdf[j - 1] + 0.5 * h * (density[j - 1] + density[j]);
        }
        let total = cdf[n - 1];
        for c in &mut cdf {
            *c /= total;
        }
        let density = density.into_iter().map(|d| d / total).collect();
        Self { grid: tables.grid, density, cdf }
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// Tabulated density, normalized on the grid.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Quadrature value at cumulative probability `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let j = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1) - 1;
        let h = self.grid.spacing();
        self.grid.value(j) + invert_cell(h, self.density[j], self.density[j + 1], u - self.cdf[j])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen())
    }
}

fn cdf_cache() -> &'static Mutex<HashMap<Vec<u64>, Arc<InverseCdf>>> {
    static CACHE: OnceLock<Mutex<HashMap<Vec<u64>, Arc<InverseCdf>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Inverse CDF for homodyning `rho` at LO phase `theta`, cached by content.
pub fn homodyne_sampler(rho: &DensityMatrix, theta: f64, grid: &QuadratureGrid) -> Result<Arc<InverseCdf>> {
    require_single_mode(rho)?;
    grid.check_covers(rho.cutoff())?;
    let mut key = vec![
        rho.cutoff() as u64,
        grid.x_min().to_bits(),
        grid.x_max().to_bits(),
        grid.n_points() as u64,
        wrap_phase(theta).to_bits(),
    ];
    key.extend(rho.elements().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]));
    let mut cache = cdf_cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(hit) = cache.get(&key) {
        return Ok(hit.clone());
    }
    let t = tables(rho.cutoff(), grid);
    let cdf = Arc::new(InverseCdf::from_weights(&t, &density_weights(rho.elements(), theta)));
    if cache.len() >= CDF_CACHE_CAPACITY {
        cache.clear();
    }
    cache.insert(key, cdf.clone());
    Ok(cdf)
}

/// `n_samples` homodyne outcomes of single-mode `rho` at LO phase `theta`
/// on the default grid.
pub fn sample_homodyne<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    theta: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<QuadratureSample>> {
    let sampler = homodyne_sampler(rho, theta, &QuadratureGrid::default())?;
    Ok((0..n_samples)
        .map(|i| QuadratureSample::new(sampler.sample(rng), theta, 0, i as u64))
        .collect())
}

/// Loss in front of a homodyne detector: vacuum admixture on a beam splitter.
pub fn apply_detector(rho: &DensityMatrix, spec: &DetectorSpec) -> Result<DensityMatrix> {
    if spec.efficiency == 1.0 {
        Ok(rho.clone())
    } else {
        attenuate(rho, spec.efficiency)
    }
}

/// Simultaneous homodyne detection of both modes of a two-mode pure state.
///
/// `x1` is drawn from its exact marginal; `x2` from the exact conditional
/// density given `x1`, which is the pure mode-2 state with amplitudes
/// `a_n = Σ_m c_{mn} e^{-imθ1} ψ_m(x1)`.
pub struct JointHomodyneSampler {
    marginal: Arc<InverseCdf>,
    tables: Arc<BasisTables>,
    /// `c_{mn} e^{-imθ1}`, row m
    rotated: DMatrix<Complex64>,
    theta1: f64,
    theta2: f64,
}

impl JointHomodyneSampler {
    pub fn new(state: &PureState, theta1: f64, theta2: f64, grid: &QuadratureGrid) -> Result<Self> {
        let basis = state.basis();
        if basis.num_modes != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: basis.num_modes });
        }
        let d = basis.levels();
        let marginal = homodyne_sampler(&state.to_density().partial_trace(&[0])?, theta1, grid)?;
        let amps = state.amplitudes();
        let rotated = DMatrix::from_fn(d, d, |m, n| amps[m * d + n] * Complex64::from_polar(1.0, -(m as f64) * theta1));
        Ok(Self { marginal, tables: tables(basis.cutoff, grid), rotated, theta1, theta2 })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let mut psi = Vec::with_capacity(self.tables.levels);
        let mut weights = Vec::with_capacity(self.tables.n_pairs);
        self.sample_with(rng, &mut psi, &mut weights)
    }

    fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, psi: &mut Vec<f64>, weights: &mut Vec<f64>) -> (f64, f64) {
        let x1 = self.marginal.sample(rng);
        let levels = self.tables.levels;
        hermite_functions_into(x1, levels - 1, psi);
        let a: Vec<Complex64> = (0..levels)
            .map(|n| (0..levels).map(|m| self.rotated[(m, n)] * psi[m]).sum())
            .collect();
        weights.clear();
        for k in 0..levels {
            for l in k..levels {
                if k == l {
                    weights.push(a[k].norm_sqr());
                } else {
                    let phase = Complex64::from_polar(1.0, (l - k) as f64 * self.theta2);
                    weights.push(2.0 * (a[k] * a[l].conj() * phase).re);
                }
            }
        }
        let x2 = self.conditional_quantile(weights, rng.gen());
        (x1, x2)
    }

    fn conditional_quantile(&self, weights: &[f64], u: f64) -> f64 {
        let t = &*self.tables;
        let n = t.grid.n_points();
        let total = t.weighted(&t.cumulative, weights, n - 1);
        if !(total > 0.0) {
            return 0.0;
        }
        let target = u * total;
        // largest j with F(j) <= target
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t.weighted(&t.cumulative, weights, mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let f_lo = t.weighted(&t.cumulative, weights, lo);
        let d0 = t.weighted(&t.products, weights, lo);
        let d1 = t.weighted(&t.products, weights, lo + 1);
        t.grid.value(lo) + invert_cell(t.grid.spacing(), d0, d1, target - f_lo)
    }

    /// `n` pairs from one stream; trial indices start at `first_index`.
    pub fn sample_many<R: Rng + ?Sized>(
        &self,
        n: usize,
        first_index: u64,
        rng: &mut R,
    ) -> Vec<(QuadratureSample, QuadratureSample)> {
        let mut psi = Vec::with_capacity(self.tables.levels);
        let mut weights = Vec::with_capacity(self.tables.n_pairs);
        (0..n)
            .map(|i| {
                let (x1, x2) = self.sample_with(rng, &mut psi, &mut weights);
                let idx = first_index + i as u64;
                (QuadratureSample::new(x1, self.theta1, 0, idx), QuadratureSample::new(x2, self.theta2, 1, idx))
            })
            .collect()
    }
}

pub fn sample_joint_homodyne<R: Rng + ?Sized>(
    state: &PureState,
    theta1: f64,
    theta2: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<(QuadratureSample, QuadratureSample)>> {
    let sampler = JointHomodyneSampler::new(state, theta1, theta2, &QuadratureGrid::default())?;
    Ok(sampler.sample_many(n_samples, 0, rng))
}
