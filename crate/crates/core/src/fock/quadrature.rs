//! Field quadratures `x_θ = (a e^{-iθ} + a† e^{iθ}) / √2` (vacuum variance 1/2)
//! and their wavefunctions in the Fock basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{DensityMatrix, FockState, PureState};
use crate::error::{Error, Result};

pub const DEFAULT_GRID_MIN: f64 = -8.0;
pub const DEFAULT_GRID_MAX: f64 = 8.0;
pub const DEFAULT_GRID_POINTS: usize = 4096;
const MAX_TAIL_MASS: f64 = 1e-6;

/// Uniform grid of quadrature values, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl QuadratureGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::Domain(format!("grid bounds [{x_min}, {x_max}] are not increasing")));
        }
        if n_points < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 points, got {n_points}")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.value(i)).collect()
    }

    /// Largest probability mass any `|n>`, `n <= cutoff`, places outside the grid.
    pub fn tail_mass(&self, cutoff: usize) -> f64 {
        (0..=cutoff)
            .map(|n| outside_mass(n, self.x_min, self.x_max))
            .fold(0.0, f64::max)
    }

    pub fn check_covers(&self, cutoff: usize) -> Result<()> {
        let tail_mass = self.tail_mass(cutoff);
        if tail_mass > MAX_TAIL_MASS {
            Err(Error::GridTooNarrow { tail_mass })
        } else {
            Ok(())
        }
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        Self { x_min: DEFAULT_GRID_MIN, x_max: DEFAULT_GRID_MAX, n_points: DEFAULT_GRID_POINTS }
    }
}

/// `ψ_0(x), ..., ψ_{n_max}(x)` by the normalized three-term recurrence
/// `ψ_{n+1} = √(2/(n+1)) x ψ_n - √(n/(n+1)) ψ_{n-1}`.
pub fn hermite_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    hermite_functions_into(x, n_max, &mut out);
    out
}

pub(crate) fn hermite_functions_into(x: f64, n_max: usize, out: &mut Vec<f64>) {
    out.clear();
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(psi0);
    if n_max == 0 {
        return;
    }
    out.push(std::f64::consts::SQRT_2 * x * psi0);
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
}

/// Position-representation wavefunction `<x|n>` of the Fock state `|n>`.
pub fn quadrature_wavefunction(n: usize, x: f64) -> f64 {
    hermite_functions(n, x)[n]
}

fn outside_mass(n: usize, lo: f64, hi: f64) -> f64 {
    // ψ_n² is negligible beyond |x| = √(2n+1) + 20
    let reach = (2.0 * n as f64 + 1.0).sqrt() + 20.0;
    let f = |x: f64| quadrature_wavefunction(n, x).powi(2);
    let mut mass = 0.0;
    if hi < reach {
        mass += simpson(f, hi, reach, 4000);
    }
    if lo > -reach {
        mass += simpson(f, -reach, lo, 4000);
    }
    mass
}

pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Packed upper-triangle weights `w_{kl}` (k <= l) such that
/// `p(x|θ) = Σ_{k<=l} w_{kl} ψ_k(x) ψ_l(x)`.
pub(crate) fn density_weights(rho: &DMatrix<Complex64>, theta: f64) -> Vec<f64> {
    let d = rho.nrows();
    let mut w = Vec::with_capacity(d * (d + 1) / 2);
    for k in 0..d {
        for l in k..d {
            if k == l {
                w.push(rho[(k, k)].re);
            } else {
                let phase = Complex64::from_polar(1.0, (l - k) as f64 * theta);
                w.push(2.0 * (rho[(k, l)] * phase).re);
            }
        }
    }
    w
}

pub(crate) fn eval_weights(weights: &[f64], psi: &[f64]) -> f64 {
    let d = psi.len();
    let mut acc = 0.0;
    let mut idx = 0;
    for k in 0..d {
        for l in k..d {
            acc += weights[idx] * psi[k] * psi[l];
            idx += 1;
        }
    }
    acc
}

pub(crate) fn require_single_mode(rho: &DensityMatrix) -> Result<()> {
    if rho.num_modes() == 1 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: 1, found: rho.num_modes() })
    }
}

/// Homodyne outcome density `p(x|θ) = Σ ρ_{mn} ψ_m(x) ψ_n(x) e^{i(n-m)θ}` on `grid`.
pub fn quadrature_density(rho: &DensityMatrix, theta: f64, grid: &QuadratureGrid) -> Result<Vec<f64>> {
    require_single_mode(rho)?;
    grid.check_covers(rho.cutoff())?;
    let weights = density_weights(rho.elements(), theta);
    let mut psi = Vec::new();
    Ok(grid
        .values()
        .into_iter()
        .map(|x| {
            hermite_functions_into(x, rho.cutoff(), &mut psi);
            eval_weights(&weights, &psi)
        })
        .collect())
}

/// Truncated matrix of `x_θ`; exact for expectation values in the truncated space.
pub fn quadrature_operator(cutoff: usize, theta: f64) -> DMatrix<Complex64> {
    let d = cutoff + 1;
    let mut x = DMatrix::<Complex64>::zeros(d, d);
    for n in 1..d {
        let s = (n as f64 / 2.0).sqrt();
        // <n-1| a |n> e^{-iθ}, <n| a† |n-1> e^{iθ}
        x[(n - 1, n)] = Complex64::from_polar(s, -theta);
        x[(n, n - 1)] = Complex64::from_polar(s, theta);
    }
    x
}

/// `x_θ² = (a² e^{-2iθ} + a†² e^{2iθ} + 2a†a + 1) / 2`, exact on the truncated space
/// (unlike squaring the truncated `x_θ`).
pub fn quadrature_squared_operator(cutoff: usize, theta: f64) -> DMatrix<Complex64> {
    let d = cutoff + 1;
    let mut x2 = DMatrix::<Complex64>::zeros(d, d);
    for n in 0..d {
        x2[(n, n)] = Complex64::new(n as f64 + 0.5, 0.0);
        if n >= 2 {
            let s = 0.5 * ((n * (n - 1)) as f64).sqrt();
            x2[(n - 2, n)] = Complex64::from_polar(s, -2.0 * theta);
            x2[(n, n - 2)] = Complex64::from_polar(s, 2.0 * theta);
        }
    }
    x2
}

pub fn expectation_quadrature(rho: &DensityMatrix, theta: f64) -> Result<f64> {
    require_single_mode(rho)?;
    Ok((rho.elements() * quadrature_operator(rho.cutoff(), theta)).trace().re)
}

pub fn expectation_quadrature_squared(rho: &DensityMatrix, theta: f64) -> Result<f64> {
    require_single_mode(rho)?;
    Ok((rho.elements() * quadrature_squared_operator(rho.cutoff(), theta)).trace().re)
}

/// Exact `<x_{θ1} ⊗ x_{θ2}>` on a two-mode pure state.
pub fn expectation_xx(state: &PureState, theta1: f64, theta2: f64) -> Result<f64> {
    let basis = state.basis();
    if basis.num_modes != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: basis.num_modes });
    }
    let cutoff = basis.cutoff;
    let amps = state.amplitudes();
    // (x_{θ1} ⊗ x_{θ2}) |n1, n2>: four ladder terms; components above the
    // cutoff have zero overlap with the state and are skipped.
    let ladder = |n: usize, theta: f64| -> [(Option<usize>, Complex64); 2] {
        let down = (n > 0).then(|| n - 1);
        let up = (n < cutoff).then(|| n + 1);
        [
            (down, Complex64::from_polar((n as f64 / 2.0).sqrt(), -theta)),
            (up, Complex64::from_polar(((n + 1) as f64 / 2.0).sqrt(), theta)),
        ]
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for n1 in 0..=cutoff {
        for n2 in 0..=cutoff {
            let amp = amps[n1 * (cutoff + 1) + n2];
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (m1, c1) in ladder(n1, theta1) {
                let Some(m1) = m1 else { continue };
                for (m2, c2) in ladder(n2, theta2) {
                    let Some(m2) = m2 else { continue };
                    acc += amps[m1 * (cutoff + 1) + m2].conj() * c1 * c2 * amp;
                }
            }
        }
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::state::{make_fock_state, FockBasis};
    use crate::fock::unitary::{apply_two_mode, beam_splitter};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Explicit physicists' Hermite polynomial via the power-series formula.
    fn hermite_explicit(n: usize, x: f64) -> f64 {
        let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
        (0..=n / 2)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * fact(n) / (fact(m) * fact(n - 2 * m)) * (2.0 * x).powi((n - 2 * m) as i32)
            })
            .sum()
    }

    fn psi_explicit(n: usize, x: f64) -> f64 {
        let fact = (1..=n).map(|v| v as f64).product::<f64>();
        hermite_explicit(n, x) * (-x * x / 2.0).exp() / (PI.powf(0.25) * (2f64.powi(n as i32) * fact).sqrt())
    }

    #[test]
    fn recurrence_matches_closed_form() {
        for n in 0..=10 {
            for i in 0..=40 {
                let x = -6.0 + 0.3 * i as f64;
                assert_abs_diff_eq!(quadrature_wavefunction(n, x), psi_explicit(n, x), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn wavefunction_examples() {
        assert_abs_diff_eq!(quadrature_wavefunction(0, 0.0), PI.powf(-0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(quadrature_wavefunction(0, 0.0), 0.7511255444649425, epsilon = 1e-12);
        assert_eq!(quadrature_wavefunction(1, 0.0), 0.0);
        let grid = QuadratureGrid::default();
        let h = grid.spacing();
        let vals: Vec<f64> = grid.values().iter().map(|&x| quadrature_wavefunction(1, x).powi(2)).collect();
        let trapz = h * (vals.iter().sum::<f64>() - 0.5 * (vals[0] + vals[vals.len() - 1]));
        assert_abs_diff_eq!(trapz, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn grid_validation() {
        assert!(QuadratureGrid::new(1.0, -1.0, 10).is_err());
        assert!(QuadratureGrid::new(-1.0, 1.0, 1).is_err());
        let g = QuadratureGrid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(QuadratureGrid::default().tail_mass(6) < 1e-10);
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let rho = make_fock_state(&[3], 6).unwrap().to_density();
        let narrow = QuadratureGrid::new(-2.0, 2.0, 400).unwrap();
        assert!(matches!(quadrature_density(&rho, 0.0, &narrow), Err(Error::GridTooNarrow { .. })));
    }

    fn gaussian_half(x: f64) -> f64 {
        (-x * x).exp() / PI.sqrt()
    }

    #[test]
    fn density_examples() {
        let grid = QuadratureGrid::default();
        let xs = grid.values();
        let vac = make_fock_state(&[0], 6).unwrap().to_density();
        let one = make_fock_state(&[1], 6).unwrap().to_density();
        let mix = DensityMatrix::diagonal(6, &[0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        for &theta in &[0.0, 0.7, 2.0] {
            let p0 = quadrature_density(&vac, theta, &grid).unwrap();
            let p1 = quadrature_density(&one, theta, &grid).unwrap();
            let pm = quadrature_density(&mix, theta, &grid).unwrap();
            for (i, &x) in xs.iter().enumerate() {
                assert_abs_diff_eq!(p0[i], gaussian_half(x), epsilon = 1e-13);
                assert_abs_diff_eq!(p1[i], 2.0 * x * x * gaussian_half(x), epsilon = 1e-13);
                assert_abs_diff_eq!(pm[i], 0.5 * (p0[i] + p1[i]), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn densities_of_low_fock_states_are_normalized() {
        let grid = QuadratureGrid::default();
        let h = grid.spacing();
        for n in 0..=6 {
            let rho = make_fock_state(&[n], 6).unwrap().to_density();
            let p = quadrature_density(&rho, 0.3, &grid).unwrap();
            let trapz = h * (p.iter().sum::<f64>() - 0.5 * (p[0] + p[p.len() - 1]));
            assert_abs_diff_eq!(trapz, 1.0, epsilon = 1e-6);
            assert!(p.iter().all(|&v| v > -1e-10));
        }
    }

    #[test]
    fn density_of_coherence_depends_on_phase() {
        // (|0> + |1>)/√2: mean quadrature cos(θ)/√2
        let basis = FockBasis::new(1, 2).unwrap();
        let s = PureState::normalized(
            basis,
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        let rho = s.to_density();
        let grid = QuadratureGrid::default();
        for &theta in &[0.0, 1.0, FRAC_PI_2, 2.5] {
            let p = quadrature_density(&rho, theta, &grid).unwrap();
            let h = grid.spacing();
            let mean: f64 = grid.values().iter().zip(&p).map(|(x, w)| x * w).sum::<f64>() * h;
            assert_abs_diff_eq!(mean, theta.cos() / 2f64.sqrt(), epsilon = 1e-8);
            assert_abs_diff_eq!(expectation_quadrature(&rho, theta).unwrap(), theta.cos() / 2f64.sqrt(), epsilon = 1e-12);
        }
    }

    fn split_photon(phi: f64) -> PureState {
        let u = beam_splitter(0.5, phi, 2).unwrap();
        apply_two_mode(&u, &make_fock_state(&[1, 0], 2).unwrap(), (0, 1)).unwrap()
    }

    fn brute_force_xx(state: &PureState, t1: f64, t2: f64) -> f64 {
        let cutoff = state.cutoff();
        let op = quadrature_operator(cutoff, t1).kronecker(&quadrature_operator(cutoff, t2));
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        (v.adjoint() * op * &v)[(0, 0)].re
    }

    #[test]
    fn correlation_examples() {
        let s = split_photon(FRAC_PI_2);
        assert_abs_diff_eq!(expectation_xx(&s, 0.0, 0.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(expectation_xx(&s, 0.0, FRAC_PI_2).unwrap(), 0.5, epsilon = 1e-12);
        let vac = make_fock_state(&[0, 0], 2).unwrap();
        assert_abs_diff_eq!(expectation_xx(&vac, 0.3, 1.9).unwrap(), 0.0, epsilon = 1e-15);
        assert!(expectation_xx(&make_fock_state(&[0], 2).unwrap(), 0.0, 0.0).is_err());
    }

    #[test]
    fn correlation_follows_cosine_law() {
        for i in 0..6 {
            let phi = 2.0 * PI * i as f64 / 6.0;
            let s = split_photon(phi);
            for j in 0..6 {
                for k in 0..6 {
                    let t1 = 2.0 * PI * j as f64 / 6.0 + 0.1;
                    let t2 = 2.0 * PI * k as f64 / 6.0 - 0.2;
                    let got = expectation_xx(&s, t1, t2).unwrap();
                    assert_abs_diff_eq!(got, 0.5 * (phi + t1 - t2).cos(), epsilon = 1e-10);
                    assert_abs_diff_eq!(got, brute_force_xx(&s, t1, t2), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn marginal_variance_of_split_photon_is_one() {
        let s = split_photon(FRAC_PI_2);
        for mode in 0..2 {
            let rho = s.to_density().partial_trace(&[mode]).unwrap();
            for i in 0..8 {
                let theta = i as f64 * 0.8;
                assert_abs_diff_eq!(expectation_quadrature_squared(&rho, theta).unwrap(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn squared_operator_is_exact_at_the_cutoff() {
        // <N|x²|N> = N + 1/2 even though the truncated x matrix squares to N/2
        let cutoff = 3;
        let top = make_fock_state(&[cutoff], cutoff).unwrap().to_density();
        assert_abs_diff_eq!(expectation_quadrature_squared(&top, 0.4).unwrap(), 3.5, epsilon = 1e-12);
    }
}
