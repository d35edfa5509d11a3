//! Hilbert space of the two-dot system: basis, subspaces, the RWA
//! Hamiltonian and state observables.
//!
//! Basis index order (frozen): `[00, 01, 0X, 10, X0, 11, 1X, X1, XX]`.
//! The four subspaces H0 = {00}, H1 = {01, 0X}, H1' = {10, X0} and
//! H2 = {11, 1X, X1, XX} are contiguous index ranges in this order.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::mev_to_rad_per_ps;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const DIM: usize = 9;

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Static couplings of the two-dot system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemParams {
    /// Exciton creation energy (meV). Only enters through the detuning.
    pub omega0_mev: f64,
    /// Förster coupling (meV, signed).
    pub v_f_mev: f64,
    /// Biexciton dipolar shift (meV).
    pub v_xx_mev: f64,
    /// Single-dot spontaneous emission rate (ps⁻¹).
    pub gamma0: f64,
    /// Bath temperature (K).
    pub temperature_k: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self { omega0_mev: 1300.0, v_f_mev: 0.85, v_xx_mev: 5.0, gamma0: 0.01, temperature_k: 0.0 }
    }
}

impl SystemParams {
    /// Checks hard invariants; returns soft warnings for couplings outside
    /// the usual meV scale.
    pub fn validate(&self) -> Result<Vec<String>> {
        let finite = [self.omega0_mev, self.v_f_mev, self.v_xx_mev, self.gamma0, self.temperature_k]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite system parameter".into()));
        }
        if self.gamma0 < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma0 = {} < 0", self.gamma0)));
        }
        if self.temperature_k < 0.0 {
            return Err(Error::InvalidParameter(format!("temperature = {} K < 0", self.temperature_k)));
        }
        let mut warnings = Vec::new();
        if !(0.0..=20.0).contains(&self.v_xx_mev) {
            warnings.push(format!("V_XX = {} meV outside [0, 20] meV", self.v_xx_mev));
        }
        if self.v_f_mev.abs() > 20.0 {
            warnings.push(format!("|V_F| = {} meV outside [0, 20] meV", self.v_f_mev.abs()));
        }
        Ok(warnings)
    }

    pub fn v_f(&self) -> f64 {
        mev_to_rad_per_ps(self.v_f_mev)
    }

    pub fn v_xx(&self) -> f64 {
        mev_to_rad_per_ps(self.v_xx_mev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisLabel {
    S00,
    S01,
    S0X,
    S10,
    SX0,
    S11,
    S1X,
    SX1,
    SXX,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; DIM] = [
        BasisLabel::S00,
        BasisLabel::S01,
        BasisLabel::S0X,
        BasisLabel::S10,
        BasisLabel::SX0,
        BasisLabel::S11,
        BasisLabel::S1X,
        BasisLabel::SX1,
        BasisLabel::SXX,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisLabel::S00 => "00",
            BasisLabel::S01 => "01",
            BasisLabel::S0X => "0X",
            BasisLabel::S10 => "10",
            BasisLabel::SX0 => "X0",
            BasisLabel::S11 => "11",
            BasisLabel::S1X => "1X",
            BasisLabel::SX1 => "X1",
            BasisLabel::SXX => "XX",
        }
    }

    pub fn subspace(self) -> Subspace {
        match self {
            BasisLabel::S00 => Subspace::H0,
            BasisLabel::S01 | BasisLabel::S0X => Subspace::H1,
            BasisLabel::S10 | BasisLabel::SX0 => Subspace::H1Prime,
            _ => Subspace::H2,
        }
    }
}

pub(crate) const I00: usize = BasisLabel::S00.index();
pub(crate) const I01: usize = BasisLabel::S01.index();
pub(crate) const I0X: usize = BasisLabel::S0X.index();
pub(crate) const I10: usize = BasisLabel::S10.index();
pub(crate) const IX0: usize = BasisLabel::SX0.index();
pub(crate) const I11: usize = BasisLabel::S11.index();
pub(crate) const I1X: usize = BasisLabel::S1X.index();
pub(crate) const IX1: usize = BasisLabel::SX1.index();
pub(crate) const IXX: usize = BasisLabel::SXX.index();

/// Pauli-blocking decomposition of the nine-level space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subspace {
    H0,
    H1,
    H1Prime,
    H2,
}

impl Subspace {
    pub const ALL: [Subspace; 4] = [Subspace::H0, Subspace::H1, Subspace::H1Prime, Subspace::H2];

    pub fn members(self) -> &'static [BasisLabel] {
        use BasisLabel::*;
        match self {
            Subspace::H0 => &[S00],
            Subspace::H1 => &[S01, S0X],
            Subspace::H1Prime => &[S10, SX0],
            Subspace::H2 => &[S11, S1X, SX1, SXX],
        }
    }

    pub fn range(self) -> std::ops::Range<usize> {
        let m = self.members();
        m[0].index()..m[m.len() - 1].index() + 1
    }

    pub fn of_index(i: usize) -> Subspace {
        BasisLabel::ALL[i].subspace()
    }
}

/// Frame an operator's matrix is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// The nine-level bare basis in the frame rotating at the laser frequency.
    BareRwa,
    /// Any other basis (reduced models in tests and diagnostics).
    Generic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub matrix: CMatrix,
    pub frame: Frame,
}

impl Operator {
    pub fn bare(matrix: CMatrix) -> Self {
        Self { matrix, frame: Frame::BareRwa }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Largest |A - A†| entry relative to the largest |A| entry.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    /// Largest matrix element connecting two different subspaces.
    pub fn off_block_norm(&self) -> f64 {
        let n = self.dim();
        debug_assert_eq!(n, DIM);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if Subspace::of_index(i) != Subspace::of_index(j) {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn block(&self, s: Subspace) -> CMatrix {
        let r = s.range();
        self.matrix.view((r.start, r.start), (r.len(), r.len())).into_owned()
    }
}

pub(crate) fn hermiticity_error(m: &CMatrix) -> f64 {
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// Writes the RWA Hamiltonian (ps⁻¹) into `h`. All arguments are angular
/// frequencies: Förster coupling, biexciton shift, drive and detuning.
pub fn fill_rwa_hamiltonian(h: &mut CMatrix, v_f: f64, v_xx: f64, omega: f64, delta: f64) {
    h.fill(C64::new(0.0, 0.0));
    let dp = delta - v_f;
    let half = c(0.5 * omega);
    // H1 and H1'
    h[(I0X, I0X)] = c(dp);
    h[(I01, I0X)] = half;
    h[(I0X, I01)] = half;
    h[(IX0, IX0)] = c(dp);
    h[(I10, IX0)] = half;
    h[(IX0, I10)] = half;
    // H2: each exciton carries Δ', Förster hopping between 1X and X1
    h[(I1X, I1X)] = c(dp);
    h[(IX1, IX1)] = c(dp);
    h[(I1X, IX1)] = c(v_f);
    h[(IX1, I1X)] = c(v_f);
    h[(IXX, IXX)] = c(2.0 * dp + v_xx);
    for (a, b) in [(I11, I1X), (I11, IX1), (I1X, IXX), (IX1, IXX)] {
        h[(a, b)] = half;
        h[(b, a)] = half;
    }
}

/// RWA Hamiltonian for drive `omega_mev` and detuning `delta_mev` from the
/// |11⟩ ↔ |ψ₊⟩ transition, returned in ps⁻¹.
pub fn build_rwa_hamiltonian(params: &SystemParams, omega_mev: f64, delta_mev: f64) -> Operator {
    let mut h = CMatrix::zeros(DIM, DIM);
    fill_rwa_hamiltonian(
        &mut h,
        params.v_f(),
        params.v_xx(),
        mev_to_rad_per_ps(omega_mev),
        mev_to_rad_per_ps(delta_mev),
    );
    Operator::bare(h)
}

pub fn basis_ket(label: BasisLabel) -> CVector {
    let mut v = CVector::zeros(DIM);
    v[label.index()] = c(1.0);
    v
}

/// (|1X⟩ + |X1⟩)/√2
pub fn psi_plus() -> CVector {
    let mut v = CVector::zeros(DIM);
    v[I1X] = c(FRAC_1_SQRT_2);
    v[IX1] = c(FRAC_1_SQRT_2);
    v
}

/// (|1X⟩ − |X1⟩)/√2
pub fn psi_minus() -> CVector {
    let mut v = CVector::zeros(DIM);
    v[I1X] = c(FRAC_1_SQRT_2);
    v[IX1] = c(-FRAC_1_SQRT_2);
    v
}

/// Columns are {|11⟩, |ψ₊⟩, |ψ₋⟩, |XX⟩} written in the bare H2 basis
/// {11, 1X, X1, XX}.
pub fn h2_symmetric_basis() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    CMatrix::from_row_slice(
        4,
        4,
        &[
            c(1.0),
            c(0.0),
            c(0.0),
            c(0.0),
            c(0.0),
            c(s),
            c(s),
            c(0.0),
            c(0.0),
            c(s),
            c(-s),
            c(0.0),
            c(0.0),
            c(0.0),
            c(0.0),
            c(1.0),
        ],
    )
}

/// (|00⟩ + |01⟩ + |10⟩ + |11⟩)/2
pub fn standard_input_state() -> CVector {
    let mut v = CVector::zeros(DIM);
    for i in [I00, I01, I10, I11] {
        v[i] = c(0.5);
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: CMatrix,
}

impl DensityMatrix {
    pub fn from_pure(psi: &CVector) -> Self {
        Self { matrix: psi * psi.adjoint() }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self { matrix: CMatrix::identity(n, n) / c(n as f64) }
    }

    /// Incoherent mixture Σ wᵢ|ψᵢ⟩⟨ψᵢ|.
    pub fn mixture(parts: &[(f64, CVector)]) -> Self {
        let n = parts.first().map(|p| p.1.len()).unwrap_or(DIM);
        let mut m = CMatrix::zeros(n, n);
        for (w, psi) in parts {
            m += psi * psi.adjoint() * c(*w);
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        let m = &self.matrix;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * c(0.5);
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn population_of(&self, psi: &CVector) -> f64 {
        (psi.adjoint() * &self.matrix * psi)[(0, 0)].re
    }

    /// Checks the state invariants at the given tolerances.
    pub fn validate(&self, herm_tol: f64, trace_tol: f64, pos_tol: f64) -> Result<()> {
        let he = self.hermiticity_error();
        if he > herm_tol {
            return Err(Error::InvalidParameter(format!("density matrix not Hermitian ({he:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidParameter(format!("density matrix trace {tr}")));
        }
        let lmin = self.min_eigenvalue();
        if lmin < -pos_tol {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {lmin:e}")));
        }
        Ok(())
    }
}

/// tr(ρ²)
pub fn purity(rho: &DensityMatrix) -> f64 {
    // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
    rho.matrix.iter().map(|z| z.norm_sqr()).sum()
}

/// ⟨target|ρ|target⟩ for a normalized pure target.
pub fn fidelity(rho: &DensityMatrix, target: &CVector) -> Result<f64> {
    let n2 = target.norm_squared();
    if (n2 - 1.0).abs() > 1e-12 {
        return Err(Error::UnnormalizedTarget(n2));
    }
    if target.len() != rho.dim() {
        return Err(Error::Dimension(format!(
            "target has {} entries, state has dimension {}",
            target.len(),
            rho.dim()
        )));
    }
    Ok(rho.population_of(target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams { v_f_mev: 0.85, v_xx_mev: 5.0, ..Default::default() }
    }

    #[test]
    fn subspaces_partition_the_basis() {
        let mut seen = [0usize; DIM];
        for s in Subspace::ALL {
            for m in s.members() {
                seen[m.index()] += 1;
                assert_eq!(m.subspace(), s);
            }
            assert_eq!(s.range().len(), s.members().len());
        }
        assert!(seen.iter().all(|&k| k == 1));
    }

    #[test]
    fn undriven_hamiltonian_is_diagonal_in_symmetric_basis() {
        let p = params();
        let delta = 3.0;
        let h = build_rwa_hamiltonian(&p, 0.0, delta);
        let u = h2_symmetric_basis();
        let h2 = u.adjoint() * h.block(Subspace::H2) * &u;
        let w = |e: f64| mev_to_rad_per_ps(e);
        let expect = [0.0, w(delta), w(delta - 2.0 * p.v_f_mev), w(2.0 * delta - 2.0 * p.v_f_mev + p.v_xx_mev)];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { expect[i] } else { 0.0 };
                assert!((h2[(i, j)] - c(want)).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn h2_block_matches_symmetric_form() {
        let p = params();
        let (omega, delta) = (0.7, 4.2);
        let h = build_rwa_hamiltonian(&p, omega, delta);
        let u = h2_symmetric_basis();
        let h2 = u.adjoint() * h.block(Subspace::H2) * &u;
        let (o, d, vf, vxx) = (mev_to_rad_per_ps(omega), mev_to_rad_per_ps(delta), p.v_f(), p.v_xx());
        let g = o * FRAC_1_SQRT_2;
        // order {11, ψ+, ψ-, XX}
        let want = [
            [0.0, g, 0.0, 0.0],
            [g, d, 0.0, g],
            [0.0, 0.0, d - 2.0 * vf, 0.0],
            [0.0, g, 0.0, 2.0 * d - 2.0 * vf + vxx],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((h2[(i, j)] - c(want[i][j])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hamiltonian_is_hermitian_and_block_diagonal() {
        let h = build_rwa_hamiltonian(&params(), 1.0, -2.0);
        assert!(h.hermiticity_error() < 1e-12);
        assert_eq!(h.off_block_norm(), 0.0);
        assert_eq!(h.frame, Frame::BareRwa);
    }

    #[test]
    fn purity_examples() {
        let psi = standard_input_state();
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        assert!((purity(&DensityMatrix::from_pure(&psi)) - 1.0).abs() < 1e-14);
        assert!((purity(&DensityMatrix::maximally_mixed(DIM)) - 1.0 / 9.0).abs() < 1e-14);
        let mix = DensityMatrix::mixture(&[(0.5, basis_ket(BasisLabel::S11)), (0.5, psi_minus())]);
        assert!((purity(&mix) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn standard_input_amplitudes() {
        let psi = standard_input_state();
        for (i, z) in psi.iter().enumerate() {
            let want = if [I00, I01, I10, I11].contains(&i) { 0.5 } else { 0.0 };
            assert_eq!(*z, c(want));
        }
    }

    #[test]
    fn fidelity_examples() {
        let psi = standard_input_state();
        let rho = DensityMatrix::from_pure(&psi);
        assert!((fidelity(&rho, &psi).unwrap() - 1.0).abs() < 1e-14);
        let r00 = DensityMatrix::from_pure(&basis_ket(BasisLabel::S00));
        assert_eq!(fidelity(&r00, &basis_ket(BasisLabel::S11)).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(DIM);
        assert!((fidelity(&mixed, &psi).unwrap() - 1.0 / 9.0).abs() < 1e-14);
        let bad = &psi * c(1.1);
        assert!(matches!(fidelity(&rho, &bad), Err(Error::UnnormalizedTarget(_))));
    }

    #[test]
    fn params_validation() {
        assert!(params().validate().unwrap().is_empty());
        let bad = SystemParams { gamma0: -1.0, ..params() };
        assert!(bad.validate().is_err());
        let loud = SystemParams { v_xx_mev: 30.0, ..params() };
        assert_eq!(loud.validate().unwrap().len(), 1);
    }
}
