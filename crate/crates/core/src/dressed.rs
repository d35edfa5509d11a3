//! Closed-form dressed-state analysis of the driven H2 subspace.
//!
//! The approximate two-level picture keeps {|11⟩, |ψ₊⟩} coupled by Ω/√2
//! with |ψ₊⟩ detuned by Δ, and the dark state |ψ₋⟩ at Δ − 2V_F. The
//! single-exciton subspaces H1, H1' see coupling Ω/2 and detuning
//! Δ' = Δ − V_F.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::pulses::PulseSchedule;
use crate::quadrature;
use crate::units::mev_to_rad_per_ps;

/// Mixing angle Θ = ½·atan2(√2Ω, Δ). Units cancel, so any consistent
/// energy unit works.
pub fn mixing_angle(omega: f64, delta: f64) -> Result<f64> {
    if omega == 0.0 && delta == 0.0 {
        return Err(Error::UndefinedMixingAngle);
    }
    Ok(0.5 * (SQRT_2 * omega).atan2(delta))
}

/// Instantaneous dressed-frame quantities, all frequencies in ps⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedFrame {
    pub theta: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub lambda_psi_minus: f64,
    /// Λ = λ₊ − λ₋
    pub big_lambda: f64,
    /// Υ = λ₊ − λ_ψ₋, kept signed.
    pub upsilon: f64,
    /// Ξ = λ_ψ₋ − λ₋, kept signed.
    pub xi: f64,
}

impl DressedFrame {
    /// Frame from angular frequencies (ps⁻¹). For Ω = Δ = 0 the angle is
    /// taken as zero.
    pub fn from_frequencies(omega: f64, delta: f64, v_f: f64) -> Self {
        let root = (delta * delta + 2.0 * omega * omega).sqrt();
        let theta = mixing_angle(omega, delta).unwrap_or(0.0);
        Self {
            theta,
            lambda_minus: 0.5 * (delta - root),
            lambda_plus: 0.5 * (delta + root),
            lambda_psi_minus: delta - 2.0 * v_f,
            big_lambda: root,
            upsilon: 2.0 * v_f - 0.5 * (delta - root),
            xi: 0.5 * (delta + root) - 2.0 * v_f,
        }
    }
}

/// Dressed frame for drive, detuning and Förster coupling given in meV.
pub fn dressed_frame(omega_mev: f64, delta_mev: f64, v_f_mev: f64) -> DressedFrame {
    DressedFrame::from_frequencies(
        mev_to_rad_per_ps(omega_mev),
        mev_to_rad_per_ps(delta_mev),
        mev_to_rad_per_ps(v_f_mev),
    )
}

/// Spontaneous decay rate of the lower dressed state, Γ₋ = √2·Γ₀·sin²Θ.
pub fn radiative_decay_rate(theta: f64, gamma0: f64) -> f64 {
    SQRT_2 * gamma0 * theta.sin().powi(2)
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Phases accumulated by the qubit basis states relative to |00⟩, in rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLedger {
    pub phi_11: f64,
    pub phi_01: f64,
    pub phi_10: f64,
    /// φ₀₀ − φ₀₁ − φ₁₀ + φ₁₁ wrapped into (−π, π].
    pub conditional_phase: f64,
}

impl PhaseLedger {
    pub fn new(phi_11: f64, phi_01: f64, phi_10: f64) -> Self {
        Self { phi_11, phi_01, phi_10, conditional_phase: wrap_phase(phi_11 - phi_01 - phi_10) }
    }

    /// Conditional phase without wrapping; meaningful when the individual
    /// phases are themselves unwrapped (e.g. from quadrature).
    pub fn unwrapped_conditional(&self) -> f64 {
        self.phi_11 - self.phi_01 - self.phi_10
    }
}

/// Relative drive amplitude below which the window edge counts as "off".
const EDGE_RATIO: f64 = 1e-6;

/// Adiabatic phase integrals over `window` (ps) for a Gaussian schedule:
/// φ₁₁ = ∫ ½[Δ − √(Δ² + 2Ω²)] dt and φ₀₁ = φ₁₀ = ∫ ½[Δ' − √(Δ'² + Ω²)] dt.
pub fn phase_integrals(pulse: &PulseSchedule, v_f_mev: f64, window: (f64, f64)) -> Result<PhaseLedger> {
    let (t0, t1) = window;
    let peak = pulse.omega0();
    if peak > 0.0 {
        let edge = pulse.gaussian(t0).max(pulse.gaussian(t1));
        if edge > EDGE_RATIO * peak {
            return Err(Error::WindowTooSmall { ratio: edge / peak });
        }
    } else {
        return Ok(PhaseLedger::new(0.0, 0.0, 0.0));
    }
    phase_integrals_for(|t| pulse.gaussian(t), pulse.delta(), mev_to_rad_per_ps(v_f_mev), window)
}

/// Phase integrals for an arbitrary drive envelope `omega(t)` (ps⁻¹) at
/// constant detuning `delta` and Förster coupling `v_f` (ps⁻¹).
pub fn phase_integrals_for<F: Fn(f64) -> f64>(
    omega: F,
    delta: f64,
    v_f: f64,
    window: (f64, f64),
) -> Result<PhaseLedger> {
    let dp = delta - v_f;
    // ½[x − √(x² + kΩ²)], rearranged for x ≥ 0 to avoid cancellation
    let shift = |x: f64, k: f64, o: f64| {
        let o2 = k * o * o;
        let root = (x * x + o2).sqrt();
        if x >= 0.0 {
            -0.5 * o2 / (x + root)
        } else {
            0.5 * (x - root)
        }
    };
    let tol = 1e-12;
    let phi_11 = quadrature::integrate(|t| shift(delta, 2.0, omega(t)), window.0, window.1, tol)?;
    let phi_01 = quadrature::integrate(|t| shift(dp, 1.0, omega(t)), window.0, window.1, tol)?;
    Ok(PhaseLedger::new(phi_11, phi_01, phi_01))
}

/// Leading-order conditional energy shift δE = −Ω²V_F / (2Δ(Δ − V_F)) in
/// meV, and the square-pulse gate time π/|δE| in ps.
pub fn energy_shift_estimate(omega_mev: f64, delta_mev: f64, v_f_mev: f64) -> Result<(f64, f64)> {
    if delta_mev == 0.0 || delta_mev == v_f_mev {
        return Err(Error::SingularShift(format!("delta = {delta_mev} meV with V_F = {v_f_mev} meV")));
    }
    if delta_mev.abs() < 3.0 * omega_mev.abs() {
        log::warn!("energy-shift estimate used outside Δ ≫ Ω (Δ = {delta_mev}, Ω = {omega_mev} meV)");
    }
    let de = -omega_mev * omega_mev * v_f_mev / (2.0 * delta_mev * (delta_mev - v_f_mev));
    let t_gate = if de == 0.0 { f64::INFINITY } else { PI / mev_to_rad_per_ps(de.abs()) };
    Ok((de, t_gate))
}

/// Gaussian width τ₀ (ps) whose leading-order conditional phase is π:
/// |δE|·τ₀·√(π/2) = π.
pub fn gaussian_tau_estimate(omega0_mev: f64, delta_mev: f64, v_f_mev: f64) -> Result<f64> {
    let (de, _) = energy_shift_estimate(omega0_mev, delta_mev, v_f_mev)?;
    if de == 0.0 {
        return Ok(f64::INFINITY);
    }
    // ∫exp(−2t²/τ²)dt = τ√(π/2)
    Ok(PI * (2.0 / PI).sqrt() / mev_to_rad_per_ps(de.abs()))
}
