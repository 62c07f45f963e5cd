//! Linear-optical two-mode unitaries in the photon-number block representation.
//!
//! A beam splitter conserves total photon number, so on two modes it splits
//! into blocks indexed by `k = n_a + n_b`. Block `k` acts on the `k + 1`
//! states `|m, k - m>` and is stored with row/column index `m`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{make_fock_state, DensityMatrix, FockBasis, FockState, PureState};
use crate::error::{check_unit_interval, Error, Result};

const LEAK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeUnitary {
    cutoff: usize,
    transmittance: f64,
    phase: f64,
    blocks: Vec<DMatrix<Complex64>>,
}

impl TwoModeUnitary {
    pub fn identity(cutoff: usize) -> Self {
        let blocks = (0..=2 * cutoff).map(|k| DMatrix::identity(k + 1, k + 1)).collect();
        Self { cutoff, transmittance: 1.0, phase: 0.0, blocks }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Block for total photon number `k` (`0 <= k <= 2 * cutoff`).
    pub fn block(&self, k: usize) -> &DMatrix<Complex64> {
        &self.blocks[k]
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    /// Single-photon transfer: column `j` holds the image of `|1>` in input mode `j`
    /// expressed over output modes `(a, b)`.
    pub fn mode_matrix(&self) -> [[Complex64; 2]; 2] {
        let b = &self.blocks[1];
        // block 1 basis: m = 0 -> |0,1>, m = 1 -> |1,0>
        [[b[(1, 1)], b[(1, 0)]], [b[(0, 1)], b[(0, 0)]]]
    }

    /// Matrix of the unitary on a two-mode state space truncated at `cutoff`.
    pub fn full_matrix(&self, basis: FockBasis, modes: (usize, usize)) -> Result<DMatrix<Complex64>> {
        check_pair(basis, modes)?;
        let dim = basis.dim();
        let mut u = DMatrix::<Complex64>::zeros(dim, dim);
        for col in 0..dim {
            for (row, amp) in self.column_image(basis, modes, col) {
                u[(row, col)] += amp;
            }
        }
        Ok(u)
    }

    /// Nonzero entries of `U |col>` that stay inside the truncated basis.
    fn column_image(
        &self,
        basis: FockBasis,
        (i, j): (usize, usize),
        col: usize,
    ) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let ni = basis.occupation(col, i);
        let nj = basis.occupation(col, j);
        let k = ni + nj;
        let (si, sj) = (basis.stride(i), basis.stride(j));
        let rest = col - ni * si - nj * sj;
        let cutoff = basis.cutoff;
        let block = &self.blocks[k];
        (k.saturating_sub(cutoff)..=k.min(cutoff)).filter_map(move |m| {
            let amp = block[(m, ni)];
            (amp != Complex64::new(0.0, 0.0)).then(|| (rest + m * si + (k - m) * sj, amp))
        })
    }
}

fn check_pair(basis: FockBasis, (i, j): (usize, usize)) -> Result<()> {
    basis.check_mode(i)?;
    basis.check_mode(j)?;
    if i == j {
        return Err(Error::ModeIndex { index: j, num_modes: basis.num_modes });
    }
    Ok(())
}

/// Beam splitter with power transmittance `t` and reflection phase `phase`.
///
/// On creation operators: `a† -> √t a† + e^{iφ} √(1-t) b†`,
/// `b† -> -e^{-iφ} √(1-t) a† + √t b†`. The blocks are the exponential of the
/// mixing generator `θ (e^{iφ} b† a - e^{-iφ} a† b)` with `cos θ = √t`.
pub fn beam_splitter(t: f64, phase: f64, cutoff: usize) -> Result<TwoModeUnitary> {
    check_unit_interval("transmittance", t)?;
    if !phase.is_finite() {
        return Err(Error::Domain(format!("beam splitter phase {phase} is not finite")));
    }
    let theta = t.sqrt().acos();
    let e = Complex64::from_polar(1.0, phase);
    let blocks = (0..=2 * cutoff)
        .map(|k| {
            // Hermitian H with exp(iH) = exp(G), H = -iG
            let mut h = DMatrix::<Complex64>::zeros(k + 1, k + 1);
            for m in 1..=k {
                let g = theta * ((m * (k - m + 1)) as f64).sqrt();
                // G[m-1, m] = g e^{iφ},  G[m, m-1] = -g e^{-iφ}
                h[(m - 1, m)] = Complex64::new(0.0, -1.0) * e * g;
                h[(m, m - 1)] = Complex64::new(0.0, 1.0) * e.conj() * g;
            }
            exp_i_hermitian(h)
        })
        .collect();
    Ok(TwoModeUnitary { cutoff, transmittance: t, phase, blocks })
}

fn exp_i_hermitian(h: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = h.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, Complex64::from_polar(1.0, h[(0, 0)].re));
    }
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = nalgebra::DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)),
    );
    v * DMatrix::from_diagonal(&phases) * v.adjoint()
}

/// Applies `u` to modes `(i, j)` of `state`, identity elsewhere.
///
/// Fails with [`Error::TruncationLoss`] if the output would need photon
/// numbers above the cutoff.
pub fn apply_two_mode(u: &TwoModeUnitary, state: &PureState, modes: (usize, usize)) -> Result<PureState> {
    let basis = FockState::basis(state);
    check_pair(basis, modes)?;
    if u.cutoff != basis.cutoff {
        return Err(Error::DimensionMismatch { expected: basis.cutoff, found: u.cutoff });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); basis.dim()];
    for (col, &amp) in state.amplitudes().iter().enumerate() {
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (row, coeff) in u.column_image(basis, modes, col) {
            out[row] += coeff * amp;
        }
    }
    let norm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
    let lost = state.norm_sqr() - norm;
    if lost > LEAK_TOL {
        return Err(Error::TruncationLoss { lost });
    }
    Ok(PureState::from_raw(basis, out))
}

/// `U rho U†` with `u` on modes `(i, j)`.
pub fn apply_two_mode_density(
    u: &TwoModeUnitary,
    rho: &DensityMatrix,
    modes: (usize, usize),
) -> Result<DensityMatrix> {
    let basis = FockState::basis(rho);
    if u.cutoff != basis.cutoff {
        return Err(Error::DimensionMismatch { expected: basis.cutoff, found: u.cutoff });
    }
    let full = u.full_matrix(basis, modes)?;
    let out = rho.conjugate_by(&full);
    let lost = rho.trace() - out.trace();
    if lost > LEAK_TOL {
        return Err(Error::TruncationLoss { lost });
    }
    Ok(out)
}

/// Multiplies every amplitude with `n` photons in `mode` by `e^{i n θ}`.
pub fn phase_shift(state: &PureState, mode: usize, theta: f64) -> Result<PureState> {
    let basis = FockState::basis(state);
    basis.check_mode(mode)?;
    let out = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(idx, a)| a * Complex64::from_polar(1.0, basis.occupation(idx, mode) as f64 * theta))
        .collect();
    Ok(PureState::from_raw(basis, out))
}

/// Photon loss on a single-mode state: mix with vacuum on a beam splitter of
/// transmittance `efficiency` and discard the reflected mode.
pub fn attenuate(rho: &DensityMatrix, efficiency: f64) -> Result<DensityMatrix> {
    check_unit_interval("efficiency", efficiency)?;
    if rho.num_modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: rho.num_modes() });
    }
    let cutoff = rho.cutoff();
    let vac = make_fock_state(&[0], cutoff)?.to_density();
    let joint = rho.tensor(&vac)?;
    let bs = beam_splitter(efficiency, std::f64::consts::FRAC_PI_2, cutoff)?;
    let mixed = apply_two_mode_density(&bs, &joint, (0, 1))?;
    let reduced = mixed.partial_trace(&[0])?;
    DensityMatrix::from_rounded(reduced.basis(), reduced.elements().clone())
}
