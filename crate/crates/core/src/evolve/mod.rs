//! Time-dependent Lindblad evolution and the gate-level drivers built on it.

pub mod gate;
pub mod integrator;
pub mod lz;
pub mod sweep;

use crate::error::{Error, Result};
use crate::lindblad::{LindbladTerm, Transition};
use crate::system::{purity, CMatrix, CVector, DensityMatrix, C64};
use integrator::{rk4_richardson, AdaptiveOptions, Dopri5, Stats};

pub use gate::{
    coherent_phases, coherent_phases_dynamic, cphase_target, distance_from_pi, evolve_pulse, run_adiabatic_gate,
    run_dynamic_gate, DissipatorConfig, GateResult,
};
pub use lz::lz_leakage_trace;
pub use sweep::{sweep, Grid, SweepAxis, SweepRow, SweepTable};

/// Instantaneous generator: Hamiltonian plus dissipators. Rank-one jumps
/// are kept factored; `dense` holds any other jump operators.
#[derive(Debug, Clone)]
pub struct Generator {
    pub hamiltonian: CMatrix,
    pub transitions: Vec<Transition>,
    pub dense: Vec<LindbladTerm>,
}

impl Generator {
    pub fn new(dim: usize) -> Self {
        Self { hamiltonian: CMatrix::zeros(dim, dim), transitions: Vec::new(), dense: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }
}

/// A time-dependent open system. `update` overwrites `g` in place so the
/// integrator never allocates inside its loop.
pub trait Dynamics {
    fn dim(&self) -> usize;
    fn new_generator(&self) -> Generator {
        Generator::new(self.dim())
    }
    fn update(&self, t: f64, g: &mut Generator);
    /// State whose population is tracked as `pop_minus` in trajectories.
    fn tracked_state(&self, _t: f64) -> Option<CVector> {
        None
    }
}

/// Scratch space for the master-equation right-hand side.
struct LindbladRhs<'a, D: Dynamics + ?Sized> {
    model: &'a D,
    gen: Generator,
    h_eff: Vec<C64>,
    m: Vec<C64>,
    n: usize,
}

impl<'a, D: Dynamics + ?Sized> LindbladRhs<'a, D> {
    fn new(model: &'a D) -> Self {
        let n = model.dim();
        Self {
            model,
            gen: model.new_generator(),
            h_eff: vec![C64::new(0.0, 0.0); n * n],
            m: vec![C64::new(0.0, 0.0); n * n],
            n,
        }
    }
}

/// Column-major product out = a·b for n×n matrices.
fn matmul(n: usize, a: &[C64], b: &[C64], out: &mut [C64]) {
    out.fill(C64::new(0.0, 0.0));
    for j in 0..n {
        let col = &mut out[j * n..(j + 1) * n];
        for k in 0..n {
            let bkj = b[j * n + k];
            if bkj == C64::new(0.0, 0.0) {
                continue;
            }
            let acol = &a[k * n..(k + 1) * n];
            for i in 0..n {
                col[i] += acol[i] * bkj;
            }
        }
    }
}

impl<'a, D: Dynamics + ?Sized> integrator::Rhs for LindbladRhs<'a, D> {
    fn eval(&mut self, t: f64, rho: &[C64], drho: &mut [C64]) {
        let n = self.n;
        self.model.update(t, &mut self.gen);
        // H_eff = H − (i/2) Σ rate·L†L
        self.h_eff.copy_from_slice(self.gen.hamiltonian.as_slice());
        let half_i = C64::new(0.0, 0.5);
        for tr in &self.gen.transitions {
            if tr.rate == 0.0 {
                continue;
            }
            let w = half_i * (tr.rate * tr.ket.norm_squared());
            for j in 0..n {
                let bj = tr.bra[j];
                if bj == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..n {
                    self.h_eff[j * n + i] -= w * tr.bra[i] * bj.conj();
                }
            }
        }
        for term in &self.gen.dense {
            let l = &term.operator.matrix;
            let ldl = l.adjoint() * l;
            for j in 0..n {
                for i in 0..n {
                    self.h_eff[j * n + i] -= half_i * term.rate * ldl[(i, j)];
                }
            }
        }
        // −i H_eff ρ + h.c. (ρ is Hermitian, so ρH_eff† = (H_eff ρ)†)
        matmul(n, &self.h_eff, rho, &mut self.m);
        let mi = C64::new(0.0, -1.0);
        for j in 0..n {
            for i in 0..n {
                let a = mi * self.m[j * n + i];
                let b = mi * self.m[i * n + j];
                drho[j * n + i] = a + b.conj();
            }
        }
        // Σ rate·LρL†
        for tr in &self.gen.transitions {
            if tr.rate == 0.0 {
                continue;
            }
            // ⟨bra|ρ|bra⟩
            let mut p = C64::new(0.0, 0.0);
            for j in 0..n {
                let bj = tr.bra[j];
                if bj == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..n {
                    p += tr.bra[i].conj() * rho[j * n + i] * bj;
                }
            }
            let w = p * tr.rate;
            for j in 0..n {
                let kj = tr.ket[j].conj();
                if kj == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..n {
                    drho[j * n + i] += w * tr.ket[i] * kj;
                }
            }
        }
        for term in &self.gen.dense {
            let l = &term.operator.matrix;
            let r = CMatrix::from_column_slice(n, n, rho);
            let lrl = l * r * l.adjoint();
            for j in 0..n {
                for i in 0..n {
                    drho[j * n + i] += lrl[(i, j)] * term.rate;
                }
            }
        }
    }
}

fn hermitize(n: usize, y: &mut [C64]) {
    for j in 0..n {
        y[j * n + j].im = 0.0;
        for i in (j + 1)..n {
            let avg = 0.5 * (y[j * n + i] + y[i * n + j].conj());
            y[j * n + i] = avg;
            y[i * n + j] = avg.conj();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Dormand–Prince 5(4) with relative and absolute tolerance `tol`.
    Adaptive,
    /// Classical RK4 with this many steps, checked against twice as many.
    FixedRk4 { steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub tol: f64,
    /// Number of evenly spaced output samples including both endpoints.
    pub samples: usize,
    pub method: Method,
    /// Keep the full density matrix at each sample.
    pub keep_states: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tol: 1e-9, samples: 201, method: Method::Adaptive, keep_states: false }
    }
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-12..=1e-6).contains(&self.tol) {
            return Err(Error::InvalidParameter(format!("tolerance {} outside [1e-12, 1e-6]", self.tol)));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter("need at least two output samples".into()));
        }
        if let Method::FixedRk4 { steps } = self.method {
            if steps == 0 {
                return Err(Error::InvalidParameter("fixed-step run needs at least one step".into()));
            }
        }
        Ok(())
    }
}

/// Sampled evolution with per-sample observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Full states, only when requested.
    pub states: Vec<DensityMatrix>,
    pub purity: Vec<f64>,
    pub trace: Vec<f64>,
    /// Diagonal of ρ in the bare basis, one row per sample.
    pub populations: Vec<Vec<f64>>,
    /// Population of the model's tracked state (instantaneous lower dressed
    /// state for the gate models); empty if the model tracks none.
    pub pop_minus: Vec<f64>,
    /// −arg ρ[k,0] for every basis state k, i.e. the phase of each amplitude
    /// relative to the first basis state.
    pub phases: Vec<Vec<f64>>,
    pub final_state: DensityMatrix,
    /// Largest population of each basis state over all accepted steps.
    pub max_populations: Vec<f64>,
    /// Largest |tr ρ − 1| and smallest purity over all accepted steps.
    pub max_trace_error: f64,
    pub min_purity: f64,
    pub max_purity: f64,
    pub stats: Stats,
    /// Richardson error estimate for fixed-step runs.
    pub fixed_step_error: Option<f64>,
}

fn sample_times(t_span: (f64, f64), samples: usize) -> Vec<f64> {
    let (a, b) = t_span;
    (0..samples).map(|k| if k + 1 == samples { b } else { a + (b - a) * k as f64 / (samples - 1) as f64 }).collect()
}

fn rho_entry(y: &[C64], n: usize, i: usize, j: usize) -> C64 {
    y[j * n + i]
}

fn purity_of(y: &[C64]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum()
}

fn trace_of(y: &[C64], n: usize) -> f64 {
    (0..n).map(|i| y[i * n + i].re).sum()
}

/// Integrates a model from `rho0` over `t_span`.
pub fn evolve_model<D: Dynamics + ?Sized>(
    model: &D,
    rho0: &DensityMatrix,
    t_span: (f64, f64),
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    let n = model.dim();
    if rho0.dim() != n {
        return Err(Error::Dimension(format!("state is {}×{}, model is {n}×{n}", rho0.dim(), rho0.dim())));
    }
    if !(t_span.1 >= t_span.0) {
        return Err(Error::InvalidParameter(format!("time span {t_span:?} is reversed")));
    }
    let stops = sample_times(t_span, opts.samples);
    let mut traj = Trajectory {
        times: Vec::with_capacity(stops.len()),
        states: Vec::new(),
        purity: Vec::with_capacity(stops.len()),
        trace: Vec::with_capacity(stops.len()),
        populations: Vec::with_capacity(stops.len()),
        pop_minus: Vec::new(),
        phases: Vec::with_capacity(stops.len()),
        final_state: rho0.clone(),
        max_populations: vec![0.0; n],
        max_trace_error: 0.0,
        min_purity: f64::INFINITY,
        max_purity: 0.0,
        stats: Stats { accepted: 0, rejected: 0, rhs_evals: 0 },
        fixed_step_error: None,
    };
    let mut y: Vec<C64> = rho0.matrix.as_slice().to_vec();

    let record_step = |y: &[C64], traj: &mut Trajectory| {
        for i in 0..n {
            traj.max_populations[i] = traj.max_populations[i].max(y[i * n + i].re);
        }
        traj.max_trace_error = traj.max_trace_error.max((trace_of(y, n) - 1.0).abs());
        let p = purity_of(y);
        traj.min_purity = traj.min_purity.min(p);
        traj.max_purity = traj.max_purity.max(p);
    };
    record_step(&y, &mut traj);

    let record_sample = |t: f64, y: &[C64], traj: &mut Trajectory| {
        traj.times.push(t);
        traj.purity.push(purity_of(y));
        traj.trace.push(trace_of(y, n));
        traj.populations.push((0..n).map(|i| y[i * n + i].re).collect());
        traj.phases.push((0..n).map(|k| -rho_entry(y, n, k, 0).arg()).collect());
        if let Some(psi) = model.tracked_state(t) {
            let rho = CMatrix::from_column_slice(n, n, y);
            traj.pop_minus.push((psi.adjoint() * rho * &psi)[(0, 0)].re);
        }
        if opts.keep_states {
            traj.states.push(DensityMatrix { matrix: CMatrix::from_column_slice(n, n, y) });
        }
    };

    let mut rhs = LindbladRhs::new(model);
    let mut post = |y: &mut [C64]| hermitize(n, y);
    match opts.method {
        Method::Adaptive => {
            let traj_cell = std::cell::RefCell::new(&mut traj);
            let stats = Dopri5::new(AdaptiveOptions::with_tol(opts.tol)).with_post_step(&mut post).integrate(
                &mut rhs,
                t_span.0,
                &mut y,
                &stops,
                &mut |_, t, y| record_sample(t, y, &mut traj_cell.borrow_mut()),
                &mut |_, y| record_step(y, &mut traj_cell.borrow_mut()),
            )?;
            traj.stats = stats;
        }
        Method::FixedRk4 { steps } => {
            record_sample(stops[0], &y, &mut traj);
            let per = steps.div_ceil(stops.len() - 1).max(1);
            let mut worst = 0.0f64;
            for w in stops.windows(2) {
                let (next, err) = rk4_richardson(&mut rhs, w[0], w[1], &y, per, &mut post);
                worst = worst.max(err);
                y = next;
                record_step(&y, &mut traj);
                record_sample(w[1], &y, &mut traj);
            }
            traj.stats.accepted = 2 * per * (stops.len() - 1);
            traj.stats.rhs_evals = 4 * traj.stats.accepted + 4 * per * (stops.len() - 1);
            traj.fixed_step_error = Some(worst);
        }
    }
    traj.final_state = DensityMatrix { matrix: CMatrix::from_column_slice(n, n, &y) };
    Ok(traj)
}

struct ClosureModel<H, L> {
    dim: usize,
    h_of_t: H,
    terms_of_t: L,
}

impl<H, L> Dynamics for ClosureModel<H, L>
where
    H: Fn(f64) -> CMatrix,
    L: Fn(f64) -> Vec<LindbladTerm>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn update(&self, t: f64, g: &mut Generator) {
        g.hamiltonian = (self.h_of_t)(t);
        g.dense = (self.terms_of_t)(t);
    }
}

/// Integrates ρ̇ = −i[H(t), ρ] + Σ_k rate_k·D[L_k(t)]ρ for arbitrary
/// Hamiltonian and dissipator sources (any dimension).
pub fn evolve_lindblad<H, L>(
    h_of_t: H,
    dissipators: L,
    rho0: &DensityMatrix,
    t_span: (f64, f64),
    opts: &EvolveOptions,
) -> Result<Trajectory>
where
    H: Fn(f64) -> CMatrix,
    L: Fn(f64) -> Vec<LindbladTerm>,
{
    let model = ClosureModel { dim: rho0.dim(), h_of_t, terms_of_t: dissipators };
    evolve_model(&model, rho0, t_span, opts)
}

/// Coherent evolution of a pure state under H(t), i ψ̇ = H ψ. Returns the
/// state at each time in `stops`.
pub fn evolve_state<H>(h_of_t: H, psi0: &CVector, t0: f64, stops: &[f64], tol: f64) -> Result<Vec<CVector>>
where
    H: Fn(f64, &mut CMatrix),
{
    let n = psi0.len();
    let mut h = CMatrix::zeros(n, n);
    let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        h_of_t(t, &mut h);
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += h[(i, j)] * y[j];
            }
            dy[i] = C64::new(acc.im, -acc.re);
        }
    };
    let mut y: Vec<C64> = psi0.as_slice().to_vec();
    let mut out = vec![CVector::zeros(n); stops.len()];
    Dopri5::new(AdaptiveOptions::with_tol(tol)).integrate(
        &mut rhs,
        t0,
        &mut y,
        stops,
        &mut |k, _, y| out[k] = CVector::from_column_slice(y),
        &mut |_, _| {},
    )?;
    Ok(out)
}

/// Purity of the final state of a trajectory.
pub fn final_purity(traj: &Trajectory) -> f64 {
    purity(&traj.final_state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::TermLabel;
    use crate::system::{c, Operator};

    fn two_level_decay(gamma: f64) -> Vec<LindbladTerm> {
        let mut l = CMatrix::zeros(2, 2);
        l[(0, 1)] = c(1.0);
        vec![LindbladTerm { operator: Operator::bare(l), rate: gamma, label: TermLabel::RadiativeH1 }]
    }

    #[test]
    fn two_level_decay_is_exponential() {
        let gamma = 0.3;
        let mut e = CVector::zeros(2);
        e[1] = c(1.0);
        let rho0 = DensityMatrix::from_pure(&e);
        let traj = evolve_lindblad(
            |_| CMatrix::zeros(2, 2),
            |_| two_level_decay(gamma),
            &rho0,
            (0.0, 10.0),
            &EvolveOptions { samples: 11, ..EvolveOptions::with_tol(1e-10) },
        )
        .unwrap();
        for (t, p) in traj.times.iter().zip(&traj.populations) {
            assert!((p[1] - (-gamma * t).exp()).abs() < 1e-6, "t = {t}");
        }
        assert!(traj.max_trace_error < 1e-10);
    }

    #[test]
    fn factored_and_dense_jumps_agree() {
        struct Factored;
        impl Dynamics for Factored {
            fn dim(&self) -> usize {
                2
            }
            fn update(&self, _t: f64, g: &mut Generator) {
                g.hamiltonian[(0, 1)] = c(0.4);
                g.hamiltonian[(1, 0)] = c(0.4);
                g.hamiltonian[(1, 1)] = c(0.2);
                let mut ket = CVector::zeros(2);
                ket[0] = c(0.5);
                let mut bra = CVector::zeros(2);
                bra[1] = c(1.0);
                g.transitions = vec![Transition::new(0.7, ket, bra, TermLabel::RadiativeH1)];
            }
        }
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = c(0.4);
        h[(1, 0)] = c(0.4);
        h[(1, 1)] = c(0.2);
        let dense = |_t: f64| {
            let mut l = CMatrix::zeros(2, 2);
            l[(0, 1)] = c(0.5);
            vec![LindbladTerm { operator: Operator::bare(l), rate: 0.7, label: TermLabel::RadiativeH1 }]
        };
        let mut e = CVector::zeros(2);
        e[1] = c(1.0);
        let rho0 = DensityMatrix::from_pure(&e);
        let opts = EvolveOptions::with_tol(1e-10);
        let a = evolve_model(&Factored, &rho0, (0.0, 8.0), &opts).unwrap();
        let b = evolve_lindblad(|_| h.clone(), dense, &rho0, (0.0, 8.0), &opts).unwrap();
        assert!((a.final_state.matrix.clone() - b.final_state.matrix).norm() < 1e-8);
    }

    #[test]
    fn fixed_step_matches_adaptive() {
        let gamma = 0.2;
        let mut e = CVector::zeros(2);
        e[1] = c(1.0);
        let rho0 = DensityMatrix::from_pure(&e);
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = c(1.0);
        h[(1, 0)] = c(1.0);
        let fixed = EvolveOptions { method: Method::FixedRk4 { steps: 4000 }, ..EvolveOptions::with_tol(1e-10) };
        let a = evolve_lindblad(|_| h.clone(), |_| two_level_decay(gamma), &rho0, (0.0, 5.0), &fixed).unwrap();
        let b = evolve_lindblad(
            |_| h.clone(),
            |_| two_level_decay(gamma),
            &rho0,
            (0.0, 5.0),
            &EvolveOptions::with_tol(1e-10),
        )
        .unwrap();
        assert!((a.final_state.matrix.clone() - b.final_state.matrix).norm() < 1e-8);
        assert!(a.fixed_step_error.unwrap() < 1e-9);
    }

    #[test]
    fn tolerance_is_range_checked() {
        let rho0 = DensityMatrix::maximally_mixed(2);
        for tol in [1e-13, 1e-5] {
            let r =
                evolve_lindblad(|_| CMatrix::zeros(2, 2), |_| vec![], &rho0, (0.0, 1.0), &EvolveOptions::with_tol(tol));
            assert!(matches!(r, Err(Error::InvalidParameter(_))));
        }
    }
}
