//! Acoustic-phonon environment: spectral densities, thermal occupation and
//! the instantaneous dressed-frame Lindblad set.
//!
//! Material constants are kept in their customary units (eV, g/cm³, cm/s)
//! and reduced to SI once when an environment is built. For GaAs with
//! R = 7 nm the deformation prefactor D_e²/(4πħμc_s²R³) evaluates to
//! (14.6 eV)² / (4π · ħ · 5300 kg/m³ · (4800 m/s)² · (7 nm)³) ≈ 9.86e10 s⁻¹,
//! i.e. 0.0986 ps⁻¹.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::dressed::DressedFrame;
use crate::error::{Error, Result};
use crate::lindblad::{scaled, LindbladTerm, TermLabel, Transition};
use crate::pulses::PulseSchedule;
use crate::system::{basis_ket, psi_minus, psi_plus, BasisLabel, CVector, SystemParams, DIM};
use crate::units::{si, thermal_frequency};

/// Bulk material constants. Defaults are GaAs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialParams {
    /// Electron deformation potential (eV).
    pub d_e_ev: f64,
    /// Hole deformation potential (eV).
    pub d_h_ev: f64,
    /// Piezoelectric constant (eV/nm).
    pub p_piezo_ev_per_nm: f64,
    /// Effective masses in units of the free electron mass.
    pub m_e: f64,
    pub m_h: f64,
    /// Mass density (g/cm³).
    pub mu_g_cm3: f64,
    /// Longitudinal sound velocity (cm/s).
    pub c_s_cm_s: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            d_e_ev: 14.6,
            d_h_ev: 4.8,
            p_piezo_ev_per_nm: 1.45,
            m_e: 0.067,
            m_h: 0.34,
            mu_g_cm3: 5.3,
            c_s_cm_s: 4.8e5,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("d_e_ev", self.d_e_ev),
            ("d_h_ev", self.d_h_ev),
            ("p_piezo_ev_per_nm", self.p_piezo_ev_per_nm),
            ("m_e", self.m_e),
            ("m_h", self.m_h),
            ("mu_g_cm3", self.mu_g_cm3),
            ("c_s_cm_s", self.c_s_cm_s),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("material.{name} = {v} must be > 0")));
            }
        }
        Ok(())
    }

    /// Sound velocity in nm/ps.
    pub fn c_s_nm_ps(&self) -> f64 {
        self.c_s_cm_s * 1e-5
    }
}

/// Dot separation and harmonic confinement strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DotGeometry {
    /// Centre-to-centre distance (nm).
    pub r_nm: f64,
    /// Confinement strength c of the potential ½cr² (J/m²).
    pub c_conf: f64,
}

impl Default for DotGeometry {
    fn default() -> Self {
        Self { r_nm: 7.0, c_conf: 8.3e-3 }
    }
}

/// Cutoff frequencies of the spectral densities (ps⁻¹).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoffs {
    pub omega_e: f64,
    pub omega_h: f64,
    pub omega_eh: f64,
    pub omega_p: f64,
}

impl DotGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("r_nm", self.r_nm), ("c_conf", self.c_conf)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("geometry.{name} = {v} must be > 0")));
            }
        }
        Ok(())
    }

    /// Gaussian ground-state width (ħ/√(m c))^{1/2} in nm for an effective
    /// mass in units of m₀.
    fn width_nm(&self, mass: f64) -> f64 {
        (si::HBAR / (mass * si::ELECTRON_MASS * self.c_conf).sqrt()).sqrt() * 1e9
    }

    /// Electron and hole wavefunction widths (nm).
    pub fn widths(&self, mat: &MaterialParams) -> (f64, f64) {
        (self.width_nm(mat.m_e), self.width_nm(mat.m_h))
    }

    pub fn cutoffs(&self, mat: &MaterialParams) -> Cutoffs {
        let (d_e, d_h) = self.widths(mat);
        let cs = mat.c_s_nm_ps();
        Cutoffs {
            omega_e: SQRT_2 * cs / d_e,
            omega_h: SQRT_2 * cs / d_h,
            omega_eh: 2.0 * cs / (d_e * d_e + d_h * d_h).sqrt(),
            omega_p: cs / self.r_nm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    #[default]
    Deformation,
    Piezo,
    Both,
}

/// Symmetric (+) or antisymmetric (−) combination of the two dots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Prefactor D_e²/(4πħμc_s²R³) in ps⁻¹.
pub fn deformation_prefactor(mat: &MaterialParams, geo: &DotGeometry) -> f64 {
    let d_e = mat.d_e_ev * si::ELECTRON_VOLT;
    let mu = mat.mu_g_cm3 * 1e3;
    let cs = mat.c_s_cm_s * 1e-2;
    let r = geo.r_nm * 1e-9;
    d_e * d_e / (4.0 * PI * si::HBAR * mu * cs * cs * r.powi(3)) * 1e-12
}

/// Prefactor P²/(4πħμc_s²R) in ps⁻¹.
pub fn piezo_prefactor(mat: &MaterialParams, geo: &DotGeometry) -> f64 {
    let p = mat.p_piezo_ev_per_nm * si::ELECTRON_VOLT * 1e9;
    let mu = mat.mu_g_cm3 * 1e3;
    let cs = mat.c_s_cm_s * 1e-2;
    let r = geo.r_nm * 1e-9;
    p * p / (4.0 * PI * si::HBAR * mu * cs * cs * r) * 1e-12
}

fn check_frequency(omega: f64) -> Result<()> {
    if omega < 0.0 || omega.is_nan() {
        return Err(Error::NegativeFrequency("non-negative; pass |ω| and conjugate the operator"));
    }
    Ok(())
}

fn deformation_envelope(omega: f64, ratio: f64, k: &Cutoffs) -> f64 {
    let e = (-(omega / k.omega_e).powi(2)).exp();
    let eh = (-(omega / k.omega_eh).powi(2)).exp();
    let h = (-(omega / k.omega_h).powi(2)).exp();
    e - 2.0 * ratio * eh + ratio * ratio * h
}

fn piezo_envelope(omega: f64, k: &Cutoffs) -> f64 {
    let e = (-(omega / k.omega_e).powi(2)).exp();
    let eh = (-(omega / k.omega_eh).powi(2)).exp();
    let h = (-(omega / k.omega_h).powi(2)).exp();
    e - 2.0 * eh + h
}

/// Superohmic deformation-potential spectral density J±(ω) in ps⁻¹.
pub fn spectral_density_deformation(
    omega: f64,
    branch: Branch,
    mat: &MaterialParams,
    geo: &DotGeometry,
) -> Result<f64> {
    check_frequency(omega)?;
    let k = geo.cutoffs(mat);
    Ok(deformation_kernel(omega, branch, deformation_prefactor(mat, geo), mat.d_h_ev / mat.d_e_ev, &k))
}

/// Ohmic piezoelectric spectral density J±(ω) in ps⁻¹.
pub fn spectral_density_piezo(omega: f64, branch: Branch, mat: &MaterialParams, geo: &DotGeometry) -> Result<f64> {
    check_frequency(omega)?;
    let k = geo.cutoffs(mat);
    Ok(piezo_kernel(omega, branch, piezo_prefactor(mat, geo), &k))
}

fn deformation_kernel(omega: f64, branch: Branch, pref: f64, ratio: f64, k: &Cutoffs) -> f64 {
    let x = omega / k.omega_p;
    let v = pref * x.powi(3) * (1.0 + branch.sign() * sinc(x)) * deformation_envelope(omega, ratio, k);
    v.max(0.0)
}

fn piezo_kernel(omega: f64, branch: Branch, pref: f64, k: &Cutoffs) -> f64 {
    let x = omega / k.omega_p;
    let v = pref * x * (1.0 + branch.sign() * sinc(x)) * piezo_envelope(omega, k);
    v.max(0.0)
}

/// Zero of the deformation envelope between its two peaks (ps⁻¹):
/// ω*² = 4c_s² ln(D_e/D_h)/(d_e² − d_h²).
pub fn deformation_dip_frequency(mat: &MaterialParams, geo: &DotGeometry) -> Option<f64> {
    let (d_e, d_h) = geo.widths(mat);
    let cs = mat.c_s_nm_ps();
    let w2 = 4.0 * cs * cs * (mat.d_e_ev / mat.d_h_ev).ln() / (d_e * d_e - d_h * d_h);
    (w2 > 0.0).then(|| w2.sqrt())
}

/// Thermal phonon number 1/(e^{ω/k_BT} − 1); exactly 0 at T = 0.
pub fn bose_occupation(omega: f64, temperature_k: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::NegativeFrequency("strictly positive for the Bose occupation"));
    }
    if temperature_k < 0.0 {
        return Err(Error::InvalidParameter(format!("temperature = {temperature_k} K")));
    }
    if temperature_k == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / thermal_frequency(temperature_k)).exp_m1())
}

/// Material, geometry and coupling mechanism with the derived constants
/// cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononEnvironment {
    pub material: MaterialParams,
    pub geometry: DotGeometry,
    pub coupling: Coupling,
    cutoffs: Cutoffs,
    def_prefactor: f64,
    piezo_prefactor: f64,
    ratio: f64,
}

impl PhononEnvironment {
    pub fn new(material: MaterialParams, geometry: DotGeometry, coupling: Coupling) -> Result<Self> {
        material.validate()?;
        geometry.validate()?;
        Ok(Self {
            material,
            geometry,
            coupling,
            cutoffs: geometry.cutoffs(&material),
            def_prefactor: deformation_prefactor(&material, &geometry),
            piezo_prefactor: piezo_prefactor(&material, &geometry),
            ratio: material.d_h_ev / material.d_e_ev,
        })
    }

    /// GaAs with deformation-potential coupling.
    pub fn gaas_deformation() -> Self {
        Self::new(MaterialParams::default(), DotGeometry::default(), Coupling::Deformation)
            .expect("GaAs defaults are valid")
    }

    pub fn cutoffs(&self) -> Cutoffs {
        self.cutoffs
    }

    /// Total J±(ω) for the configured coupling mechanism, ω ≥ 0.
    pub fn spectral_density(&self, omega: f64, branch: Branch) -> f64 {
        let k = &self.cutoffs;
        match self.coupling {
            Coupling::Deformation => deformation_kernel(omega, branch, self.def_prefactor, self.ratio, k),
            Coupling::Piezo => piezo_kernel(omega, branch, self.piezo_prefactor, k),
            Coupling::Both => {
                deformation_kernel(omega, branch, self.def_prefactor, self.ratio, k)
                    + piezo_kernel(omega, branch, self.piezo_prefactor, k)
            }
        }
    }
}

/// Frequencies below this (ps⁻¹) are treated as the dropped zero-frequency
/// channel.
const ZERO_FREQUENCY: f64 = 1e-12;

/// Writes the six phonon transitions for the instantaneous dressed frame
/// into `out`, ordered Λ, Υ, Ξ with emission before absorption.
pub(crate) fn fill_phonon_transitions(
    frame: &DressedFrame,
    env: &PhononEnvironment,
    temperature_k: f64,
    out: &mut [Transition],
) {
    debug_assert_eq!(out.len(), 6);
    let (s, co) = frame.theta.sin_cos();
    let p11 = basis_ket(BasisLabel::S11);
    let pp = psi_plus();
    let zeta_minus = scaled(&p11, co) - scaled(&pp, s);
    let zeta_plus = scaled(&p11, s) + scaled(&pp, co);
    let pm = psi_minus();

    let channels = [
        (
            -0.5 * (2.0 * frame.theta).sin(),
            &zeta_minus,
            &zeta_plus,
            frame.big_lambda,
            Branch::Plus,
            [TermLabel::LambdaEmission, TermLabel::LambdaAbsorption],
        ),
        (co, &pm, &zeta_plus, frame.upsilon, Branch::Minus, [TermLabel::UpsilonEmission, TermLabel::UpsilonAbsorption]),
        (-s, &zeta_minus, &pm, frame.xi, Branch::Minus, [TermLabel::XiEmission, TermLabel::XiAbsorption]),
    ];
    for (k, (amp, to, from, omega, branch, labels)) in channels.into_iter().enumerate() {
        // A negative splitting swaps the roles of the two states.
        let (to, from) = if omega < 0.0 { (from, to) } else { (to, from) };
        let w = omega.abs();
        let (j, n) = if w < ZERO_FREQUENCY {
            (0.0, 0.0)
        } else {
            (env.spectral_density(w, branch), bose_occupation(w, temperature_k).unwrap_or(0.0))
        };
        let emit = &mut out[2 * k];
        emit.label = labels[0];
        emit.rate = j * (n + 1.0);
        emit.ket.copy_from(to);
        emit.ket *= crate::system::c(amp);
        emit.bra.copy_from(from);
        let absorb = &mut out[2 * k + 1];
        absorb.label = labels[1];
        absorb.rate = j * n;
        absorb.ket.copy_from(from);
        absorb.ket *= crate::system::c(amp);
        absorb.bra.copy_from(to);
    }
}

pub(crate) fn phonon_transitions(frame: &DressedFrame, env: &PhononEnvironment, temperature_k: f64) -> Vec<Transition> {
    let mut out: Vec<Transition> = (0..6).map(|_| Transition::zeroed(DIM, TermLabel::LambdaEmission)).collect();
    fill_phonon_transitions(frame, env, temperature_k, &mut out);
    out
}

/// The six phonon dissipators (emission and absorption for Λ, Υ, Ξ) in the
/// bare nine-level basis.
pub fn phonon_lindblad_set(frame: &DressedFrame, env: &PhononEnvironment, temperature_k: f64) -> Vec<LindbladTerm> {
    phonon_transitions(frame, env, temperature_k).iter().map(Transition::to_term).collect()
}

/// max over the dressed splittings ω′ ∈ {Λ, Υ, Ξ} of |dω′/dt · t / ω′|,
/// with t counted from the start of the pulse window.
pub fn adiabatic_frame_validity(pulse: &PulseSchedule, params: &SystemParams, t: f64) -> f64 {
    let omega = pulse.omega_at(t);
    let omega_dot = pulse.omega_dot_at(t);
    if omega_dot == 0.0 {
        return 0.0;
    }
    let frame = DressedFrame::from_frequencies(omega, pulse.delta(), params.v_f());
    if frame.big_lambda == 0.0 {
        return 0.0;
    }
    let lambda_dot = 2.0 * omega * omega_dot / frame.big_lambda;
    let elapsed = t - pulse.window().0;
    [(frame.big_lambda, lambda_dot), (frame.upsilon, 0.5 * lambda_dot), (frame.xi, 0.5 * lambda_dot)]
        .into_iter()
        .filter(|(w, _)| w.abs() > ZERO_FREQUENCY)
        .map(|(w, wd)| (wd * elapsed / w).abs())
        .fold(0.0, f64::max)
}

/// Bare-basis vectors of the approximate lower and upper dressed states.
pub fn dressed_kets(theta: f64) -> (CVector, CVector) {
    let (s, co) = theta.sin_cos();
    let p11 = basis_ket(BasisLabel::S11);
    let pp = psi_plus();
    (scaled(&p11, co) - scaled(&pp, s), scaled(&p11, s) + scaled(&pp, co))
}
