//! Physical constants (SI, CODATA 2018) and the zero-point field scale.

use crate::error::{Error, Result};

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Vacuum electric-field variance `ħν / (ε₀ V)` of a mode, in V²/m².
pub fn zero_point_field_variance(frequency_hz: f64, mode_volume_m3: f64) -> Result<f64> {
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(Error::Domain(format!("optical frequency {frequency_hz} must be positive")));
    }
    if !(mode_volume_m3 > 0.0 && mode_volume_m3.is_finite()) {
        return Err(Error::Domain(format!("mode volume {mode_volume_m3} must be positive")));
    }
    Ok(HBAR * frequency_hz / (EPSILON_0 * mode_volume_m3))
}
