//! Truncated Fock-space states, linear-optical unitaries and quadrature algebra.

pub mod constants;
pub mod quadrature;
pub mod state;
pub mod unitary;

pub use constants::zero_point_field_variance;
pub use quadrature::{
    expectation_quadrature, expectation_quadrature_squared, expectation_xx, hermite_functions,
    quadrature_density, quadrature_operator, quadrature_squared_operator, quadrature_wavefunction,
    QuadratureGrid,
};
pub use state::{fidelity, make_fock_state, partial_trace, DensityMatrix, FockBasis, FockState, PureState};
pub use unitary::{apply_two_mode, apply_two_mode_density, attenuate, beam_splitter, phase_shift, TwoModeUnitary};

/// Default photon-number cutoff per mode.
pub const DEFAULT_CUTOFF: usize = 6;
