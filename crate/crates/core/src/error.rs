use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("photon number {n} exceeds cutoff {cutoff}")]
    CutoffExceeded { n: usize, cutoff: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mode index {index} out of range for a {num_modes}-mode state")]
    ModeIndex { index: usize, num_modes: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadrature grid too narrow: {tail_mass:e} probability mass lies outside")]
    GridTooNarrow { tail_mass: f64 },

    #[error("herald never clicks (click probability {probability:e})")]
    NeverClicks { probability: f64 },

    #[error("expected {expected} detector specs, found {found}")]
    SpecCountMismatch { expected: usize, found: usize },

    #[error("tomography needs at least 3 non-empty phases, found {found}")]
    TooFewPhases { found: usize },

    #[error("displacement truncation bound exceeded ({0})")]
    CutoffTooLarge(String),

    #[error("unitary moved {lost:e} of probability above the photon-number cutoff")]
    TruncationLoss { lost: f64 },

    #[error("not a physical state: {0}")]
    NotPhysical(String),

    #[error("malformed sample file: {0}")]
    SampleFormat(String),
}

impl Error {
    /// Stable snake-case identifier used in machine-readable error records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::CutoffExceeded { .. } => "cutoff_exceeded",
            Error::Domain(_) => "domain_error",
            Error::ModeIndex { .. } => "mode_index",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::GridTooNarrow { .. } => "grid_too_narrow",
            Error::NeverClicks { .. } => "never_clicks",
            Error::SpecCountMismatch { .. } => "spec_count_mismatch",
            Error::TooFewPhases { .. } => "too_few_phases",
            Error::CutoffTooLarge(_) => "cutoff_too_large",
            Error::TruncationLoss { .. } => "truncation_loss",
            Error::NotPhysical(_) => "not_physical",
            Error::SampleFormat(_) => "sample_format",
        }
    }
}

pub(crate) fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {value} outside [0, 1]")))
    }
}
