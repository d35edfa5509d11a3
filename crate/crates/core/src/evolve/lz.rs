//! Landau–Zener leakage out of the lower dressed state.

use serde::Serialize;

use super::evolve_state;
use crate::dressed::mixing_angle;
use crate::error::Result;
use crate::phonons::dressed_kets;
use crate::pulses::PulseSchedule;
use crate::system::{basis_ket, fill_rwa_hamiltonian, BasisLabel, CMatrix, SystemParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LzTrace {
    pub times: Vec<f64>,
    /// Population of the instantaneous approximate |ζ₋⟩.
    pub pop_minus: Vec<f64>,
}

impl LzTrace {
    pub fn final_leakage(&self) -> f64 {
        1.0 - self.pop_minus.last().copied().unwrap_or(1.0)
    }
}

/// Coherent evolution of |11⟩ through the pulse, projected at each sample
/// onto ζ₋(Θ(t)) = cosΘ|11⟩ − sinΘ|ψ₊⟩. The full H2 block, including |XX⟩,
/// is propagated.
pub fn lz_leakage_trace(pulse: &PulseSchedule, params: &SystemParams, samples: usize) -> Result<LzTrace> {
    let (t0, t1) = pulse.window();
    let samples = samples.max(2);
    let times: Vec<f64> = (0..samples)
        .map(|k| if k + 1 == samples { t1 } else { t0 + (t1 - t0) * k as f64 / (samples - 1) as f64 })
        .collect();
    let (v_f, v_xx, delta) = (params.v_f(), params.v_xx(), pulse.delta());
    let states = evolve_state(
        |t, h: &mut CMatrix| fill_rwa_hamiltonian(h, v_f, v_xx, pulse.omega_at(t), delta),
        &basis_ket(BasisLabel::S11),
        t0,
        &times,
        1e-11,
    )?;
    let pop_minus = times
        .iter()
        .zip(&states)
        .map(|(&t, psi)| {
            let theta = mixing_angle(pulse.omega_at(t), delta).unwrap_or(0.0);
            dressed_kets(theta).0.dotc(psi).norm_sqr()
        })
        .collect();
    Ok(LzTrace { times, pop_minus })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_drive_means_no_leakage() {
        let pulse = PulseSchedule::new(0.0, 5.0, 1.0, 5.0).unwrap();
        let trace = lz_leakage_trace(&pulse, &SystemParams::default(), 50).unwrap();
        assert!(trace.pop_minus.iter().all(|&p| (p - 1.0).abs() < 1e-12));
    }
}
