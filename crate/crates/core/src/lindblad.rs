//! Lindblad jump operators shared by the radiative and phonon channels.
//!
//! Every channel in this model is a single transition |a⟩⟨b| between
//! real bare-basis superpositions, so terms are stored in that factored
//! form and only expanded to a dense matrix on request.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::system::{basis_ket, psi_plus, BasisLabel, CMatrix, CVector, Operator, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermLabel {
    LambdaEmission,
    LambdaAbsorption,
    UpsilonEmission,
    UpsilonAbsorption,
    XiEmission,
    XiAbsorption,
    RadiativeH1,
    RadiativeH1Prime,
    RadiativeH2,
}

impl fmt::Display for TermLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TermLabel::LambdaEmission => "Λ-emission",
            TermLabel::LambdaAbsorption => "Λ-absorption",
            TermLabel::UpsilonEmission => "Υ-emission",
            TermLabel::UpsilonAbsorption => "Υ-absorption",
            TermLabel::XiEmission => "Ξ-emission",
            TermLabel::XiAbsorption => "Ξ-absorption",
            TermLabel::RadiativeH1 => "radiative-H1",
            TermLabel::RadiativeH1Prime => "radiative-H1'",
            TermLabel::RadiativeH2 => "radiative-H2",
        };
        f.write_str(s)
    }
}

/// rate · D[|ket⟩⟨bra|]. Any amplitude of the jump operator is carried by
/// `ket`, so the dense operator is exactly ket·bra†.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub rate: f64,
    pub ket: CVector,
    pub bra: CVector,
    pub label: TermLabel,
}

impl Transition {
    pub fn new(rate: f64, ket: CVector, bra: CVector, label: TermLabel) -> Self {
        Self { rate, ket, bra, label }
    }

    pub fn zeroed(dim: usize, label: TermLabel) -> Self {
        Self::new(0.0, CVector::zeros(dim), CVector::zeros(dim), label)
    }

    pub fn operator(&self) -> CMatrix {
        &self.ket * self.bra.adjoint()
    }

    pub fn to_term(&self) -> LindbladTerm {
        LindbladTerm { operator: Operator::bare(self.operator()), rate: self.rate, label: self.label }
    }
}

/// A dissipator rate·D[L] with L held as a dense bare-basis operator.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladTerm {
    pub operator: Operator,
    pub rate: f64,
    pub label: TermLabel,
}

impl LindbladTerm {
    pub fn dim(&self) -> usize {
        self.operator.dim()
    }
}

/// Spontaneous emission: each dot decays separately in H1 and H1', while
/// in H2 only the bright state |ψ₊⟩ decays, at the superradiant rate √2Γ₀.
pub fn radiative_transitions(gamma0: f64) -> [Transition; 3] {
    use BasisLabel::*;
    [
        Transition::new(gamma0, basis_ket(S01), basis_ket(S0X), TermLabel::RadiativeH1),
        Transition::new(gamma0, basis_ket(S10), basis_ket(SX0), TermLabel::RadiativeH1Prime),
        Transition::new(SQRT_2 * gamma0, basis_ket(S11), psi_plus(), TermLabel::RadiativeH2),
    ]
}

pub fn radiative_lindblad_set(gamma0: f64) -> Vec<LindbladTerm> {
    radiative_transitions(gamma0).iter().map(Transition::to_term).collect()
}

pub(crate) fn scaled(v: &CVector, s: f64) -> CVector {
    v.map(|z| z * C64::new(s, 0.0))
}
