//! Explicit Runge–Kutta integration of flattened complex states.
//!
//! The adaptive scheme is Dormand–Prince 5(4) with the usual PI-free step
//! controller; the fixed-step scheme is classical RK4 with a step-doubling
//! (Richardson) error estimate.

use crate::error::{Error, Result};
use crate::system::C64;

pub const MIN_STEP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl Stats {
    fn new() -> Self {
        Self { accepted: 0, rejected: 0, rhs_evals: 0 }
    }
}

/// Right-hand side y' = f(t, y).
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[C64], dy: &mut [C64]);
}

impl<F: FnMut(f64, &[C64], &mut [C64])> Rhs for F {
    fn eval(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
        self(t, y, dy)
    }
}

// Dormand–Prince coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on a single step (ps).
    pub max_step: f64,
}

impl AdaptiveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, max_steps: 5_000_000, max_step: f64::INFINITY }
    }
}

fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..y.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (a, k) in terms {
            acc += k[i] * *a;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Projection applied to the state after each accepted step.
pub type PostStep<'a> = dyn FnMut(&mut [C64]) + 'a;

/// Adaptive Dormand–Prince integrator. The state is advanced in place from
/// `t0` through every time in `stops` (ascending, all ≥ t0); `on_stop` is
/// called at each, and `on_step` after every accepted step (after
/// `post_step` has been applied).
pub struct Dopri5<'a> {
    opts: AdaptiveOptions,
    post_step: Option<&'a mut PostStep<'a>>,
}

impl<'a> Dopri5<'a> {
    pub fn new(opts: AdaptiveOptions) -> Self {
        Self { opts, post_step: None }
    }

    /// Hook applied to the state after each accepted step.
    pub fn with_post_step(mut self, f: &'a mut PostStep<'a>) -> Self {
        self.post_step = Some(f);
        self
    }

    fn error_norm(&self, y: &[C64], y_new: &[C64], err: &[C64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..y.len() {
            let scale = self.opts.atol + self.opts.rtol * y[i].norm().max(y_new[i].norm());
            worst = worst.max(err[i].norm() / scale);
        }
        worst
    }

    pub fn integrate<R: Rhs>(
        &mut self,
        rhs: &mut R,
        t0: f64,
        y: &mut [C64],
        stops: &[f64],
        on_stop: &mut dyn FnMut(usize, f64, &[C64]),
        on_step: &mut dyn FnMut(f64, &[C64]),
    ) -> Result<Stats> {
        let n = y.len();
        let mut ks: Vec<Vec<C64>> = (0..7).map(|_| vec![C64::new(0.0, 0.0); n]).collect();
        let mut tmp = vec![C64::new(0.0, 0.0); n];
        let mut y_new = vec![C64::new(0.0, 0.0); n];
        let mut err = vec![C64::new(0.0, 0.0); n];
        let mut stats = Stats::new();
        let mut t = t0;
        let t_end = stops.last().copied().unwrap_or(t0);

        rhs.eval(t, y, &mut ks[0]);
        stats.rhs_evals += 1;
        let mut h = self.initial_step(rhs, t, y, &ks[0], t_end - t, &mut stats);
        let mut next_stop = 0;
        while next_stop < stops.len() && stops[next_stop] <= t {
            on_stop(next_stop, t, y);
            next_stop += 1;
        }
        let mut fsal_valid = true;

        while next_stop < stops.len() {
            if stats.accepted + stats.rejected >= self.opts.max_steps {
                return Err(Error::NotConverged(format!(
                    "step budget of {} exhausted at t = {t} ps",
                    self.opts.max_steps
                )));
            }
            let target = stops[next_stop];
            let mut step = h.min(self.opts.max_step);
            let lands = t + step >= target - 1e-12 * target.abs().max(1.0);
            if lands {
                step = target - t;
            }
            if !fsal_valid {
                rhs.eval(t, y, &mut ks[0]);
                stats.rhs_evals += 1;
                fsal_valid = true;
            }
            combine(&mut tmp, y, step, &[(A21, &ks[0])]);
            rhs.eval(t + C2 * step, &tmp, &mut ks[1]);
            combine(&mut tmp, y, step, &[(A31, &ks[0]), (A32, &ks[1])]);
            rhs.eval(t + C3 * step, &tmp, &mut ks[2]);
            combine(&mut tmp, y, step, &[(A41, &ks[0]), (A42, &ks[1]), (A43, &ks[2])]);
            rhs.eval(t + C4 * step, &tmp, &mut ks[3]);
            combine(&mut tmp, y, step, &[(A51, &ks[0]), (A52, &ks[1]), (A53, &ks[2]), (A54, &ks[3])]);
            rhs.eval(t + C5 * step, &tmp, &mut ks[4]);
            combine(&mut tmp, y, step, &[(A61, &ks[0]), (A62, &ks[1]), (A63, &ks[2]), (A64, &ks[3]), (A65, &ks[4])]);
            rhs.eval(t + step, &tmp, &mut ks[5]);
            combine(&mut y_new, y, step, &[(B1, &ks[0]), (B3, &ks[2]), (B4, &ks[3]), (B5, &ks[4]), (B6, &ks[5])]);
            rhs.eval(t + step, &y_new, &mut ks[6]);
            stats.rhs_evals += 6;
            for i in 0..n {
                err[i] =
                    (ks[0][i] * E1 + ks[2][i] * E3 + ks[3][i] * E4 + ks[4][i] * E5 + ks[5][i] * E6 + ks[6][i] * E7)
                        * step;
            }
            let e = self.error_norm(y, &y_new, &err);
            if !e.is_finite() {
                return Err(Error::NotConverged(format!("non-finite state at t = {t} ps")));
            }
            if e <= 1.0 {
                stats.accepted += 1;
                t = if lands { target } else { t + step };
                y.copy_from_slice(&y_new);
                if let Some(post) = self.post_step.as_mut() {
                    post(y);
                    fsal_valid = false;
                } else {
                    ks.swap(0, 6);
                }
                on_step(t, y);
                while next_stop < stops.len() && stops[next_stop] <= t {
                    on_stop(next_stop, t, y);
                    next_stop += 1;
                }
                let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                // Keep the controller's proposal when a step was shortened
                // only to land on an output time.
                h = if lands { h.max(step * fac) } else { step * fac };
            } else {
                stats.rejected += 1;
                h = step * (0.9 * e.powf(-0.2)).clamp(0.1, 1.0);
                if h < MIN_STEP {
                    return Err(Error::StepUnderflow { t, dt: h });
                }
            }
        }
        Ok(stats)
    }

    /// Starting step from the Hairer–Nørsett–Wanner heuristic.
    fn initial_step<R: Rhs>(&self, rhs: &mut R, t: f64, y: &[C64], f0: &[C64], span: f64, stats: &mut Stats) -> f64 {
        if span <= 0.0 {
            return MIN_STEP;
        }
        let scale = |v: &C64| self.opts.atol + self.opts.rtol * v.norm();
        let rms = |a: &[C64], s: &[C64]| {
            (a.iter().zip(s).map(|(x, y)| (x.norm() / scale(y)).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
        };
        let d0 = rms(y, y);
        let d1 = rms(f0, y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1: Vec<C64> = y.iter().zip(f0).map(|(a, b)| a + b * h0).collect();
        let mut f1 = vec![C64::new(0.0, 0.0); y.len()];
        rhs.eval(t + h0, &y1, &mut f1);
        stats.rhs_evals += 1;
        let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff, y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(span).min(self.opts.max_step).max(MIN_STEP)
    }
}

/// Classical RK4 over `steps` equal steps, in place.
pub fn rk4_fixed<R: Rhs>(
    rhs: &mut R,
    t0: f64,
    t1: f64,
    y: &mut [C64],
    steps: usize,
    post_step: &mut dyn FnMut(&mut [C64]),
) {
    let n = y.len();
    let h = (t1 - t0) / steps as f64;
    let zero = C64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        rhs.eval(t, y, &mut k1);
        combine(&mut tmp, y, 0.5 * h, &[(1.0, &k1)]);
        rhs.eval(t + 0.5 * h, &tmp, &mut k2);
        combine(&mut tmp, y, 0.5 * h, &[(1.0, &k2)]);
        rhs.eval(t + 0.5 * h, &tmp, &mut k3);
        combine(&mut tmp, y, h, &[(1.0, &k3)]);
        rhs.eval(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        post_step(y);
    }
}

/// RK4 with `steps` and `2·steps` steps. Returns the finer solution and the
/// Richardson estimate max|y_fine − y_coarse|/15 of its error.
pub fn rk4_richardson<R: Rhs>(
    rhs: &mut R,
    t0: f64,
    t1: f64,
    y0: &[C64],
    steps: usize,
    post_step: &mut dyn FnMut(&mut [C64]),
) -> (Vec<C64>, f64) {
    let mut coarse = y0.to_vec();
    rk4_fixed(rhs, t0, t1, &mut coarse, steps, post_step);
    let mut fine = y0.to_vec();
    rk4_fixed(rhs, t0, t1, &mut fine, 2 * steps, post_step);
    let err = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / 15.0;
    (fine, err)
}
