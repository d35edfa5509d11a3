//! Physical constants and unit conversions.
//!
//! Energies enter the public API in meV. Internally every energy is an
//! angular frequency in ps⁻¹ (E/ħ), times are in ps and temperatures in K.

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;
/// Boltzmann constant in meV/K.
pub const KB_MEV_PER_K: f64 = 0.0861733;

/// SI constants used to reduce the phonon material parameters.
pub mod si {
    pub const HBAR: f64 = 1.054571817e-34;
    pub const ELECTRON_VOLT: f64 = 1.602176634e-19;
    pub const ELECTRON_MASS: f64 = 9.1093837015e-31;
}

/// meV → ps⁻¹ (angular).
#[inline]
pub fn mev_to_rad_per_ps(e_mev: f64) -> f64 {
    e_mev / HBAR_MEV_PS
}

/// ps⁻¹ (angular) → meV.
#[inline]
pub fn rad_per_ps_to_mev(w: f64) -> f64 {
    w * HBAR_MEV_PS
}

/// Thermal energy k_B·T expressed as an angular frequency in ps⁻¹.
#[inline]
pub fn thermal_frequency(temperature_k: f64) -> f64 {
    KB_MEV_PER_K * temperature_k / HBAR_MEV_PS
}
