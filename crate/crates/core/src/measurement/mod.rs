//! Click (energy) detection and homodyne (field-quadrature) detection.

pub mod clicks;
pub mod homodyne;

pub use clicks::{click_probabilities, sample_clicks, ClickDistribution, ClickRecord, DetectorSpec};
pub use homodyne::{
    apply_detector, homodyne_sampler, sample_homodyne, sample_joint_homodyne, wrap_phase, InverseCdf,
    JointHomodyneSampler, QuadratureSample,
};
