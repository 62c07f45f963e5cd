//! Dense states over a truncated multimode Fock basis.
//!
//! Basis tuples `(n_0, ..., n_{M-1})` with every `n_i <= cutoff` are laid out
//! in row-major order, mode 0 most significant.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-8;

/// Index arithmetic for the truncated basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockBasis {
    pub num_modes: usize,
    pub cutoff: usize,
}

impl FockBasis {
    pub fn new(num_modes: usize, cutoff: usize) -> Result<Self> {
        if num_modes == 0 || cutoff == 0 {
            return Err(Error::Domain(format!(
                "basis needs at least one mode and cutoff >= 1 (got {num_modes} modes, cutoff {cutoff})"
            )));
        }
        Ok(Self { num_modes, cutoff })
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.levels().pow(self.num_modes as u32)
    }

    pub fn index_of(&self, ns: &[usize]) -> Result<usize> {
        if ns.len() != self.num_modes {
            return Err(Error::DimensionMismatch { expected: self.num_modes, found: ns.len() });
        }
        let mut idx = 0;
        for &n in ns {
            if n > self.cutoff {
                return Err(Error::CutoffExceeded { n, cutoff: self.cutoff });
            }
            idx = idx * self.levels() + n;
        }
        Ok(idx)
    }

    pub fn tuple_of(&self, mut index: usize) -> Vec<usize> {
        let mut ns = vec![0; self.num_modes];
        for slot in ns.iter_mut().rev() {
            *slot = index % self.levels();
            index /= self.levels();
        }
        ns
    }

    /// Photon number in `mode` for basis state `index`.
    #[inline]
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        let stride = self.levels().pow((self.num_modes - 1 - mode) as u32);
        (index / stride) % self.levels()
    }

    #[inline]
    pub fn stride(&self, mode: usize) -> usize {
        self.levels().pow((self.num_modes - 1 - mode) as u32)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.num_modes {
            Ok(())
        } else {
            Err(Error::ModeIndex { index: mode, num_modes: self.num_modes })
        }
    }
}

/// Read access shared by pure and mixed states.
pub trait FockState {
    fn basis(&self) -> FockBasis;
    /// Diagonal of the density operator in the Fock basis.
    fn populations(&self) -> Vec<f64>;
    fn to_density(&self) -> DensityMatrix;
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    basis: FockBasis,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps an amplitude vector; it must already be normalized.
    pub fn from_amplitudes(basis: FockBasis, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: amplitudes.len() });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotPhysical(format!("squared norm {norm} differs from 1")));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(basis: FockBasis, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotPhysical("zero or non-finite amplitude vector".into()));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::from_amplitudes(basis, amplitudes)
    }

    pub fn vacuum(num_modes: usize, cutoff: usize) -> Result<Self> {
        make_fock_state(&vec![0; num_modes], cutoff)
    }

    pub fn num_modes(&self) -> usize {
        self.basis.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.basis.cutoff
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, ns: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.basis.index_of(ns)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Tensor product, `self` occupying the leading modes.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if self.cutoff() != other.cutoff() {
            return Err(Error::DimensionMismatch { expected: self.cutoff(), found: other.cutoff() });
        }
        let basis = FockBasis::new(self.num_modes() + other.num_modes(), self.cutoff())?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(PureState { basis, amplitudes })
    }

    pub(crate) fn from_raw(basis: FockBasis, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), basis.dim());
        Self { basis, amplitudes }
    }
}

impl FockState for PureState {
    fn basis(&self) -> FockBasis {
        self.basis
    }

    fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn to_density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        DensityMatrix { basis: self.basis, elements: &v * v.adjoint() }
    }
}

/// `|n_0, ..., n_{M-1}>` at the given per-mode cutoff.
pub fn make_fock_state(ns: &[usize], cutoff: usize) -> Result<PureState> {
    let basis = FockBasis::new(ns.len(), cutoff)?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
    amplitudes[basis.index_of(ns)?] = Complex64::new(1.0, 0.0);
    Ok(PureState { basis, amplitudes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    basis: FockBasis,
    elements: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(basis: FockBasis, elements: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::unchecked(basis, elements)?;
        let herm = rho.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotPhysical(format!("Hermiticity error {herm:e}")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotPhysical(format!("trace {tr} differs from 1")));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::NotPhysical(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(rho)
    }

    fn unchecked(basis: FockBasis, elements: DMatrix<Complex64>) -> Result<Self> {
        let dim = basis.dim();
        if elements.nrows() != dim || elements.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: elements.nrows() });
        }
        Ok(Self { basis, elements })
    }

    /// Hermitian-symmetrizes and renormalizes an operator that is physical up to rounding.
    pub(crate) fn from_rounded(basis: FockBasis, elements: DMatrix<Complex64>) -> Result<Self> {
        let sym = (&elements + elements.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = sym.trace().re;
        if !(tr > 0.0 && tr.is_finite()) {
            return Err(Error::NotPhysical(format!("trace {tr} is not positive")));
        }
        Self::new(basis, sym / Complex64::new(tr, 0.0))
    }

    /// Diagonal state with the given photon-number populations (single mode).
    pub fn diagonal(cutoff: usize, populations: &[f64]) -> Result<Self> {
        let basis = FockBasis::new(1, cutoff)?;
        if populations.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: populations.len() });
        }
        let diag = nalgebra::DVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| Complex64::new(p, 0.0)),
        );
        Self::new(basis, DMatrix::from_diagonal(&diag))
    }

    pub fn num_modes(&self) -> usize {
        self.basis.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.basis.cutoff
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &DMatrix<Complex64> {
        &self.elements
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elements[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.elements - self.elements.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.elements + self.elements.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Reduced state on `keep` (sorted, duplicates removed).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::Domain("partial trace must keep at least one mode".into()));
        }
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        for &m in &kept {
            self.basis.check_mode(m)?;
        }
        let traced: Vec<usize> = (0..self.num_modes()).filter(|m| !kept.contains(m)).collect();
        let out_basis = FockBasis::new(kept.len(), self.cutoff())?;
        let env_basis_dim = self.basis.levels().pow(traced.len() as u32);

        // full index of (kept tuple, traced tuple)
        let compose = |k_idx: usize, e_idx: usize| -> usize {
            let mut full = 0;
            let mut k = k_idx;
            let mut e = e_idx;
            let levels = self.basis.levels();
            let mut digits = vec![0usize; self.num_modes()];
            for &m in kept.iter().rev() {
                digits[m] = k % levels;
                k /= levels;
            }
            for &m in traced.iter().rev() {
                digits[m] = e % levels;
                e /= levels;
            }
            for d in digits {
                full = full * levels + d;
            }
            full
        };

        let d = out_basis.dim();
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        for e in 0..env_basis_dim {
            let idx: Vec<usize> = (0..d).map(|k| compose(k, e)).collect();
            for (r, &fr) in idx.iter().enumerate() {
                for (c, &fc) in idx.iter().enumerate() {
                    out[(r, c)] += self.elements[(fr, fc)];
                }
            }
        }
        Ok(DensityMatrix { basis: out_basis, elements: out })
    }

    /// `U rho U^dagger` for an operator on the full space.
    pub(crate) fn conjugate_by(&self, op: &DMatrix<Complex64>) -> DensityMatrix {
        DensityMatrix { basis: self.basis, elements: op * &self.elements * op.adjoint() }
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.cutoff() != other.cutoff() {
            return Err(Error::DimensionMismatch { expected: self.cutoff(), found: other.cutoff() });
        }
        let basis = FockBasis::new(self.num_modes() + other.num_modes(), self.cutoff())?;
        Ok(DensityMatrix { basis, elements: self.elements.kronecker(&other.elements) })
    }
}

impl FockState for DensityMatrix {
    fn basis(&self) -> FockBasis {
        self.basis
    }

    fn populations(&self) -> Vec<f64> {
        self.elements.diagonal().iter().map(|z| z.re).collect()
    }

    fn to_density(&self) -> DensityMatrix {
        self.clone()
    }
}

impl From<&PureState> for DensityMatrix {
    fn from(s: &PureState) -> Self {
        s.to_density()
    }
}

pub fn partial_trace<S: FockState>(state: &S, keep: &[usize]) -> Result<DensityMatrix> {
    state.to_density().partial_trace(keep)
}

/// `<target| rho |target>`.
pub fn fidelity(rho: &DensityMatrix, target: &PureState) -> Result<f64> {
    if rho.basis != target.basis() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: target.amplitudes.len() });
    }
    let v = nalgebra::DVector::from_column_slice(target.amplitudes());
    let f = (v.adjoint() * rho.elements() * &v)[(0, 0)];
    Ok(f.re.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fock_state_sits_on_its_tuple() {
        let s = make_fock_state(&[1, 0], 2).unwrap();
        assert_eq!(s.amplitudes().len(), 9);
        assert_eq!(s.amplitude(&[1, 0]).unwrap(), c(1.0, 0.0));
        assert_eq!(s.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);

        let vac = make_fock_state(&[0], 1).unwrap();
        assert_eq!(vac.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn fock_state_rejects_cutoff_overflow() {
        assert_eq!(
            make_fock_state(&[2, 2], 1).unwrap_err(),
            Error::CutoffExceeded { n: 2, cutoff: 1 }
        );
    }

    #[test]
    fn basis_round_trips_indices() {
        let b = FockBasis::new(3, 2).unwrap();
        for i in 0..b.dim() {
            let t = b.tuple_of(i);
            assert_eq!(b.index_of(&t).unwrap(), i);
            for (m, &n) in t.iter().enumerate() {
                assert_eq!(b.occupation(i, m), n);
            }
        }
    }

    #[test]
    fn partial_trace_of_split_photon_is_even_mixture() {
        let basis = FockBasis::new(2, 2).unwrap();
        let mut amps = vec![c(0.0, 0.0); basis.dim()];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[basis.index_of(&[1, 0]).unwrap()] = c(h, 0.0);
        amps[basis.index_of(&[0, 1]).unwrap()] = c(0.0, h);
        let s = PureState::from_amplitudes(basis, amps).unwrap();
        let rho = partial_trace(&s, &[0]).unwrap();
        assert_eq!(rho.dim(), 3);
        assert_abs_diff_eq!(rho.get(0, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.get(1, 1).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.get(0, 1).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-10);

        // brute-force contraction over the traced index
        for r in 0..3 {
            for col in 0..3 {
                let mut acc = c(0.0, 0.0);
                for e in 0..3 {
                    acc += s.amplitude(&[r, e]).unwrap() * s.amplitude(&[col, e]).unwrap().conj();
                }
                assert_abs_diff_eq!((acc - rho.get(r, col)).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn partial_trace_keeping_everything_is_identity_map() {
        let s = make_fock_state(&[1, 2], 2).unwrap();
        let rho = partial_trace(&s, &[0, 1]).unwrap();
        assert_eq!(rho, s.to_density());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let s = make_fock_state(&[1, 0], 3).unwrap();
        let rho = partial_trace(&s, &[0]).unwrap();
        assert_eq!(rho, make_fock_state(&[1], 3).unwrap().to_density());
        assert!(matches!(partial_trace(&s, &[2]), Err(Error::ModeIndex { .. })));
        assert!(partial_trace(&s, &[]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let one = make_fock_state(&[1], 2).unwrap();
        let zero = make_fock_state(&[0], 2).unwrap();
        assert_abs_diff_eq!(fidelity(&one.to_density(), &one).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&zero.to_density(), &one).unwrap(), 0.0, epsilon = 1e-12);
        let mix = DensityMatrix::diagonal(2, &[0.5, 0.5, 0.0]).unwrap();
        assert_abs_diff_eq!(fidelity(&mix, &one).unwrap(), 0.5, epsilon = 1e-12);
        let other = make_fock_state(&[1], 3).unwrap();
        assert!(matches!(fidelity(&mix, &other), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn density_validation_rejects_unphysical() {
        let b = FockBasis::new(1, 1).unwrap();
        let bad_trace = DMatrix::from_diagonal_element(2, 2, c(1.0, 0.0));
        assert!(DensityMatrix::new(b, bad_trace).is_err());
        let negative = DMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(b, negative).is_err());
        let non_herm = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.3, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(b, non_herm).is_err());
    }
}
