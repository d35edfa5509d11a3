//! Control schedules, CPHASE calibration and adiabaticity diagnostics.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::dressed::{self, wrap_phase};
use crate::error::{Error, Result};
use crate::evolve::gate::coherent_phases;
use crate::exec::{self, Exec};
use crate::system::SystemParams;
use crate::units::{mev_to_rad_per_ps, rad_per_ps_to_mev};

pub const DEFAULT_T_CUT: f64 = 5.0;
pub const DEFAULT_ADIABATIC_MARGIN: f64 = 10.0;

/// Gaussian drive Ω(t) = Ω₀·exp(−(t/τ)²) at constant detuning, centred on
/// t = 0 and switched off outside |t| < t_cut·τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub omega0_mev: f64,
    pub tau_ps: f64,
    pub delta_mev: f64,
    pub t_cut: f64,
}

impl PulseSchedule {
    pub fn new(omega0_mev: f64, tau_ps: f64, delta_mev: f64, t_cut: f64) -> Result<Self> {
        let p = Self { omega0_mev, tau_ps, delta_mev, t_cut };
        p.validate()?;
        Ok(p)
    }

    /// Same schedule specified with Ω₀ and Δ as angular frequencies (ps⁻¹).
    pub fn from_frequencies(omega0: f64, tau_ps: f64, delta: f64, t_cut: f64) -> Result<Self> {
        Self::new(rad_per_ps_to_mev(omega0), tau_ps, rad_per_ps_to_mev(delta), t_cut)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0_mev >= 0.0 && self.omega0_mev.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega0 = {} meV", self.omega0_mev)));
        }
        if !(self.tau_ps > 0.0 && self.tau_ps.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau = {} ps", self.tau_ps)));
        }
        if !self.delta_mev.is_finite() {
            return Err(Error::InvalidParameter("non-finite detuning".into()));
        }
        if !(self.t_cut >= 4.0) {
            return Err(Error::InvalidParameter(format!("t_cut = {} < 4", self.t_cut)));
        }
        Ok(())
    }

    /// Peak drive in ps⁻¹.
    pub fn omega0(&self) -> f64 {
        mev_to_rad_per_ps(self.omega0_mev)
    }

    /// Detuning in ps⁻¹.
    pub fn delta(&self) -> f64 {
        mev_to_rad_per_ps(self.delta_mev)
    }

    pub fn window(&self) -> (f64, f64) {
        let h = self.t_cut * self.tau_ps;
        (-h, h)
    }

    /// Drive (ps⁻¹) including the window cut.
    pub fn omega_at(&self, t: f64) -> f64 {
        if t.abs() >= self.t_cut * self.tau_ps {
            0.0
        } else {
            self.gaussian(t)
        }
    }

    /// The untruncated Gaussian (ps⁻¹).
    pub fn gaussian(&self, t: f64) -> f64 {
        self.omega0() * (-(t / self.tau_ps).powi(2)).exp()
    }

    /// dΩ/dt in ps⁻², zero outside the window.
    pub fn omega_dot_at(&self, t: f64) -> f64 {
        -2.0 * t / (self.tau_ps * self.tau_ps) * self.omega_at(t)
    }

    /// (Ω(t), Δ(t)) in meV.
    pub fn evaluate(&self, t: f64) -> (f64, f64) {
        (rad_per_ps_to_mev(self.omega_at(t)), self.delta_mev)
    }
}

/// Square resonant pulse (Δ = 0) on the |11⟩ ↔ |ψ₊⟩ transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicPulse {
    pub omega_mev: f64,
    pub duration_ps: f64,
}

impl DynamicPulse {
    /// The 2π pulse: the |11⟩ ↔ |ψ₊⟩ Rabi frequency is √2Ω.
    pub fn two_pi(omega_mev: f64) -> Result<Self> {
        if !(omega_mev > 0.0 && omega_mev.is_finite()) {
            return Err(Error::InvalidParameter(format!("dynamic omega = {omega_mev} meV")));
        }
        Ok(Self { omega_mev, duration_ps: 2.0 * PI / (SQRT_2 * mev_to_rad_per_ps(omega_mev)) })
    }

    pub fn omega(&self) -> f64 {
        mev_to_rad_per_ps(self.omega_mev)
    }
}

/// Left-hand side of the adiabaticity condition,
/// (Ω̇Δ − ΩΔ̇) / (√2 (Δ² + 2Ω²)^{3/2}), for the constant-detuning schedule.
pub fn adiabaticity_lhs(pulse: &PulseSchedule, t: f64) -> f64 {
    let (o, d) = (pulse.omega_at(t), pulse.delta());
    let denom = SQRT_2 * (d * d + 2.0 * o * o).powf(1.5);
    if denom == 0.0 {
        return 0.0;
    }
    pulse.omega_dot_at(t) * d / denom
}

/// sup_t |adiabaticity_lhs| from a dense scan plus golden-section polish.
pub fn max_adiabaticity_lhs(pulse: &PulseSchedule) -> f64 {
    let (t0, t1) = pulse.window();
    let n = 4000;
    let f = |t: f64| adiabaticity_lhs(pulse, t).abs();
    let h = (t1 - t0) / n as f64;
    let (mut best_t, mut best) = (t0, 0.0);
    for k in 0..=n {
        let t = t0 + k as f64 * h;
        let v = f(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let (mut a, mut b) = ((best_t - h).max(t0), (best_t + h).min(t1));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(f(0.5 * (a + b)))
}

/// Gaussian adiabaticity bound √2Ω₀/Δ² (ps) and whether τ exceeds it by the
/// default margin.
pub fn adiabaticity_bound_gaussian(pulse: &PulseSchedule) -> Result<(f64, bool)> {
    adiabaticity_bound_gaussian_with_margin(pulse, DEFAULT_ADIABATIC_MARGIN)
}

pub fn adiabaticity_bound_gaussian_with_margin(pulse: &PulseSchedule, margin: f64) -> Result<(f64, bool)> {
    let d = pulse.delta();
    if d == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let bound = SQRT_2 * pulse.omega0() / (d * d);
    Ok((bound, pulse.tau_ps >= margin * bound))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    pub t_cut: f64,
    /// Stop once |conditional phase − π| is below this (rad).
    pub phase_tol: f64,
    /// Integrator tolerance of the coherent simulation.
    pub ode_tol: f64,
    pub exec: Exec,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self { t_cut: DEFAULT_T_CUT, phase_tol: 1e-7, ode_tol: 1e-10, exec: Exec::default() }
    }
}

/// Unwrapped conditional phase of the coherent nine-level run. The wrapped
/// simulation phase is lifted onto the branch nearest the adiabatic
/// phase integral, which is monotone in τ.
pub fn simulated_conditional_phase(pulse: &PulseSchedule, params: &SystemParams, ode_tol: f64) -> Result<f64> {
    let guide = dressed::phase_integrals(pulse, params.v_f_mev, pulse.window())?.unwrapped_conditional();
    let sim = coherent_phases(pulse, params, ode_tol)?.conditional_phase;
    Ok(guide + wrap_phase(sim - guide))
}

/// Finds τ such that the coherent gate yields conditional phase π.
pub fn calibrate_cphase(
    omega0_mev: f64,
    delta_mev: f64,
    params: &SystemParams,
    opts: &CalibrationOptions,
) -> Result<PulseSchedule> {
    if !(omega0_mev > 0.0) {
        return Err(Error::InvalidParameter(format!("omega0 = {omega0_mev} meV must be > 0")));
    }
    if delta_mev <= 2.0 * params.v_f_mev.abs() {
        log::warn!(
            "calibrating outside the adiabatic regime: Δ = {delta_mev} meV ≤ 2|V_F| = {} meV",
            2.0 * params.v_f_mev.abs()
        );
    }
    let tau0 = dressed::gaussian_tau_estimate(omega0_mev, delta_mev, params.v_f_mev)
        .map_err(|e| Error::CalibrationFailed(e.to_string()))?;
    if !tau0.is_finite() {
        return Err(Error::CalibrationFailed(
            "no conditional energy shift (V_F = 0): the phase never accumulates".into(),
        ));
    }
    let schedule = |tau: f64| PulseSchedule::new(omega0_mev, tau, delta_mev, opts.t_cut);
    let residual = |tau: f64| -> Result<f64> {
        Ok(simulated_conditional_phase(&schedule(tau)?, params, opts.ode_tol)?.abs() - PI)
    };

    // Probe candidates around τ₀ concurrently, then keep the sign change
    // closest to the estimate.
    const FACTORS: [f64; 11] = [0.2, 0.3, 0.45, 0.6, 0.8, 1.0, 1.25, 1.6, 2.2, 3.2, 5.0];
    let probes: Vec<f64> = FACTORS.iter().map(|f| f * tau0).collect();
    let values = exec::map(opts.exec, &probes, |&tau| residual(tau));
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let mut bracket = None;
    let mut best_dist = f64::INFINITY;
    for k in 0..probes.len() - 1 {
        if values[k] == 0.0 {
            return schedule(probes[k]);
        }
        if values[k].signum() != values[k + 1].signum() {
            let dist = (FACTORS[k].ln() + FACTORS[k + 1].ln()).abs();
            if dist < best_dist {
                best_dist = dist;
                bracket = Some((probes[k], values[k], probes[k + 1]));
            }
        }
    }
    let (mut lo, mut f_lo, mut hi) = bracket.ok_or_else(|| {
        Error::CalibrationFailed(format!(
            "no sign change of the conditional phase over τ ∈ [{:.4}, {:.4}] ps",
            probes[0],
            probes[probes.len() - 1]
        ))
    })?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(mid)?;
        if f_mid.abs() < opts.phase_tol || (hi - lo) < 1e-12 * mid {
            return schedule(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::CalibrationFailed("bisection did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn pulse(o: f64, tau: f64, d: f64) -> PulseSchedule {
        PulseSchedule::new(o, tau, d, DEFAULT_T_CUT).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let p = pulse(1.0, 20.0, 5.0);
        assert_eq!(p.evaluate(0.0), (1.0, 5.0));
        let (o, d) = p.evaluate(20.0);
        assert!((o - 1.0 / E).abs() < 1e-14);
        assert_eq!(d, 5.0);
        assert_eq!(p.evaluate(100.0), (0.0, 5.0));
        assert_eq!(p.evaluate(-100.0), (0.0, 5.0));
        assert_eq!(p.evaluate(1e4), (0.0, 5.0));
    }

    #[test]
    fn schedule_invariants() {
        assert!(PulseSchedule::new(-1.0, 1.0, 1.0, 5.0).is_err());
        assert!(PulseSchedule::new(1.0, 0.0, 1.0, 5.0).is_err());
        assert!(PulseSchedule::new(1.0, 1.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn dynamic_pulse_duration() {
        let p = DynamicPulse::two_pi(0.1).unwrap();
        assert!((p.duration_ps * SQRT_2 * p.omega() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn adiabaticity_lhs_examples() {
        let p = PulseSchedule::from_frequencies(1.0, 10.0, 1.0, 5.0).unwrap();
        assert_eq!(adiabaticity_lhs(&p, 0.0), 0.0);
        let m = max_adiabaticity_lhs(&p);
        assert!(m < 0.1, "max lhs = {m}");
        // bounded by the Gaussian estimate divided by τ
        let (bound, ok) = adiabaticity_bound_gaussian(&p).unwrap();
        assert!(m <= bound / p.tau_ps);
        assert!((bound - SQRT_2).abs() < 1e-12);
        assert!(!ok);
    }

    #[test]
    fn max_lhs_matches_brute_force() {
        let p = PulseSchedule::from_frequencies(1.3, 3.0, 0.8, 5.0).unwrap();
        let brute = (0..=200_000)
            .map(|k| -15.0 + 30.0 * k as f64 / 200_000.0)
            .map(|t| adiabaticity_lhs(&p, t).abs())
            .fold(0.0, f64::max);
        assert!((max_adiabaticity_lhs(&p) - brute).abs() < 1e-9);
    }

    #[test]
    fn max_lhs_decreases_with_tau() {
        let mut prev = f64::INFINITY;
        for tau in [1.0, 2.0, 5.0, 10.0, 40.0] {
            let m = max_adiabaticity_lhs(&PulseSchedule::from_frequencies(1.0, tau, 1.0, 5.0).unwrap());
            assert!(m < prev);
            prev = m;
        }
    }

    #[test]
    fn bound_examples() {
        let p = pulse(0.0, 10.0, 5.0);
        assert_eq!(adiabaticity_bound_gaussian(&p).unwrap(), (0.0, true));
        let p = pulse(1.0, 10.0, 5.0);
        let (b, ok) = adiabaticity_bound_gaussian(&p).unwrap();
        let want = SQRT_2 * mev_to_rad_per_ps(1.0) / mev_to_rad_per_ps(5.0).powi(2);
        assert!((b - want).abs() < 1e-15);
        assert!((b - 0.0372).abs() < 5e-5);
        assert!(ok);
        assert_eq!(adiabaticity_bound_gaussian(&pulse(1.0, 10.0, 0.0)), Err(Error::ZeroDetuning));
    }

    #[test]
    fn calibration_fails_without_forster_coupling() {
        let params = SystemParams { v_f_mev: 0.0, ..Default::default() };
        let err = calibrate_cphase(1.0, 5.0, &params, &CalibrationOptions::default()).unwrap_err();
        assert!(matches!(err, Error::CalibrationFailed(_)));
    }
}
