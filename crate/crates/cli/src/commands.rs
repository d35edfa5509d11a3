use std::f64::consts::PI;

use serde_json::json;

use cphase::evolve::{lz_leakage_trace, run_adiabatic_gate, run_dynamic_gate, sweep, GateResult, Grid, SweepAxis};
use cphase::exec::{self, Exec};
use cphase::phonons::{deformation_dip_frequency, spectral_density_deformation, spectral_density_piezo, Branch};
use cphase::pulses::{calibrate_cphase, simulated_conditional_phase, CalibrationOptions, DynamicPulse, PulseSchedule};
use cphase::system::BasisLabel;

use crate::chart::{heatmap, line_chart, Series};
use crate::config::{Format, GateKind, Normalization, RunConfig};
use crate::error::CliError;
use crate::output::{csv_document, num, OutputSet};

pub struct Ctx {
    pub cfg: RunConfig,
    pub exec: Exec,
    pub stamp: Option<String>,
}

impl Ctx {
    fn csv(&self, out: &mut OutputSet, command: &str, name: &str, header: &[&str], rows: &[Vec<String>]) {
        if self.cfg.wants(Format::Csv) {
            let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
            out.add(name, csv_document(&self.cfg, command, &header, rows));
        }
    }

    fn chart(
        &self,
        out: &mut OutputSet,
        name: &str,
        svg: impl FnOnce(Option<&str>) -> Result<Option<String>, CliError>,
    ) -> Result<(), CliError> {
        if !self.cfg.wants(Format::Svg) {
            return Ok(());
        }
        match svg(self.stamp.as_deref())? {
            Some(body) => out.add(name, body),
            None => log::warn!("{name}: nothing finite to plot"),
        }
        Ok(())
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn spectra(ctx: &Ctx) -> Result<OutputSet, CliError> {
    let s = &ctx.cfg.spectra;
    let omegas = SweepAxis::linear("omega", s.omega_min, s.omega_max, s.points).values().map_err(usage)?;
    let (mat, geo) = (&ctx.cfg.material, &ctx.cfg.geometry);
    let mut cols: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(omegas.len())).collect();
    for &w in &omegas {
        cols[0].push(spectral_density_deformation(w, Branch::Plus, mat, geo).map_err(usage)?);
        cols[1].push(spectral_density_deformation(w, Branch::Minus, mat, geo).map_err(usage)?);
        cols[2].push(spectral_density_piezo(w, Branch::Plus, mat, geo).map_err(usage)?);
        cols[3].push(spectral_density_piezo(w, Branch::Minus, mat, geo).map_err(usage)?);
    }
    if s.normalize == Normalization::Peak {
        for pair in cols.chunks_mut(2) {
            let peak = pair.iter().flatten().copied().fold(0.0, f64::max);
            if peak > 0.0 {
                pair.iter_mut().flatten().for_each(|v| *v /= peak);
            }
        }
    }
    let names = ["J_plus_def", "J_minus_def", "J_plus_piezo", "J_minus_piezo"];
    let argmax = |c: &[f64]| omegas[(0..c.len()).max_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap_or(0)];
    for (name, c) in names.iter().zip(&cols) {
        println!("{name}: peak at ω = {} ps⁻¹", num(argmax(c)));
    }
    if let Some(w) = deformation_dip_frequency(mat, geo) {
        println!("deformation interior zero at ω* = {} ps⁻¹", num(w));
    }

    let mut out = OutputSet::default();
    let rows: Vec<Vec<String>> = (0..omegas.len())
        .map(|k| std::iter::once(omegas[k]).chain(cols.iter().map(|c| c[k])).map(num).collect())
        .collect();
    let header = ["omega_ps_inv", names[0], names[1], names[2], names[3]];
    ctx.csv(&mut out, "spectra", "spectra.csv", &header, &rows);
    let series: Vec<Series> = names
        .iter()
        .zip(&cols)
        .map(|(n, c)| Series { name: n.to_string(), points: omegas.iter().copied().zip(c.iter().copied()).collect() })
        .collect();
    ctx.chart(&mut out, "spectra.svg", |st| {
        line_chart("Phonon spectral densities", ("ω (ps⁻¹)", "J(ω) (ps⁻¹)"), &series, st)
    })?;
    Ok(out)
}

fn deltas_or_default(list: &[f64], fallback: f64) -> Vec<f64> {
    if list.is_empty() {
        vec![fallback]
    } else {
        list.to_vec()
    }
}

pub fn calibrate(ctx: &Ctx) -> Result<OutputSet, CliError> {
    let cfg = &ctx.cfg;
    let deltas = deltas_or_default(&cfg.calibrate.deltas_mev, cfg.pulse.delta_mev);
    let inner = if deltas.len() > 1 { Exec::Sequential } else { ctx.exec };
    let opts = CalibrationOptions {
        t_cut: cfg.pulse.t_cut,
        ode_tol: cfg.solver.tol.min(1e-10),
        exec: inner,
        ..Default::default()
    };
    let results = exec::map(ctx.exec, &deltas, |&d| -> Result<(f64, f64), CliError> {
        let pulse = calibrate_cphase(cfg.pulse.omega0_mev, d, &cfg.system, &opts)?;
        let residual = simulated_conditional_phase(&pulse, &cfg.system, opts.ode_tol)?.abs() - PI;
        Ok((pulse.tau_ps, residual))
    });
    let mut rows = Vec::with_capacity(deltas.len());
    let mut points = Vec::with_capacity(deltas.len());
    for (&d, r) in deltas.iter().zip(results) {
        let (tau, residual) = r?;
        println!("Δ = {} meV: τ = {} ps, phase residual {residual:.3e} rad", num(d), num(tau));
        rows.push([cfg.pulse.omega0_mev, d, cfg.system.v_f_mev, tau, residual].map(num).to_vec());
        points.push((d, tau));
    }
    let mut out = OutputSet::default();
    let header = ["omega0_mev", "delta_mev", "v_f_mev", "tau_ps", "conditional_phase_residual"];
    ctx.csv(&mut out, "calibrate", "calibrate.csv", &header, &rows);
    let series = [Series { name: "τ".into(), points }];
    ctx.chart(&mut out, "calibrate.svg", |st| line_chart("Calibrated gate width", ("Δ (meV)", "τ (ps)"), &series, st))?;
    Ok(out)
}

/// One gate run as configured; the width is calibrated when not given.
fn run_gate(cfg: &RunConfig, inner: Exec) -> Result<(GateResult, Option<f64>), CliError> {
    let dconf = cfg.dissipator_config()?;
    let opts = cfg.evolve_options()?;
    let p = &cfg.pulse;
    match p.kind {
        GateKind::Dynamic => {
            let pulse = DynamicPulse::two_pi(p.omega0_mev)?;
            Ok((run_dynamic_gate(&pulse, &cfg.system, &dconf, &opts)?, None))
        }
        GateKind::Adiabatic => {
            let pulse = adiabatic_pulse(cfg, inner)?;
            Ok((run_adiabatic_gate(&pulse, &cfg.system, &dconf, &opts)?, Some(pulse.tau_ps)))
        }
    }
}

fn adiabatic_pulse(cfg: &RunConfig, inner: Exec) -> Result<PulseSchedule, CliError> {
    let p = &cfg.pulse;
    Ok(match p.tau_ps {
        Some(tau) => PulseSchedule::new(p.omega0_mev, tau, p.delta_mev, p.t_cut)?,
        None => {
            let opts = CalibrationOptions { t_cut: p.t_cut, exec: inner, ..Default::default() };
            calibrate_cphase(p.omega0_mev, p.delta_mev, &cfg.system, &opts)?
        }
    })
}

const POP_COLUMNS: [&str; 9] =
    ["pop_00", "pop_01", "pop_0X", "pop_10", "pop_X0", "pop_11", "pop_1X", "pop_X1", "pop_XX"];

pub fn gate(ctx: &Ctx) -> Result<OutputSet, CliError> {
    let cfg = &ctx.cfg;
    let configs: Vec<RunConfig> = match cfg.pulse.kind {
        GateKind::Dynamic => vec![cfg.clone()],
        GateKind::Adiabatic => deltas_or_default(&cfg.gate.deltas_mev, cfg.pulse.delta_mev)
            .into_iter()
            .map(|d| cfg.with_field("pulse.delta_mev", d))
            .collect::<Result<_, _>>()?,
    };
    let inner = if configs.len() > 1 { Exec::Sequential } else { ctx.exec };
    let results = exec::map(ctx.exec, &configs, |c| run_gate(c, inner));

    let mut out = OutputSet::default();
    let mut summary = String::new();
    let mut series = Vec::new();
    for (k, (c, r)) in configs.iter().zip(results).enumerate() {
        let (g, tau) = r?;
        let line = json!({
            "run": k,
            "kind": c.pulse.kind,
            "omega0_mev": c.pulse.omega0_mev,
            "delta_mev": if c.pulse.kind == GateKind::Dynamic { 0.0 } else { c.pulse.delta_mev },
            "tau_ps": tau,
            "temperature_k": c.system.temperature_k,
            "purity": g.purity,
            "fidelity": g.fidelity,
            "conditional_phase": g.conditional_phase,
            "reference_fidelity": g.reference_fidelity,
            "phi_01": g.unwound_phases.0,
            "phi_10": g.unwound_phases.1,
            "window_ps": [g.window.0, g.window.1],
            "max_trace_error": g.trajectory.max_trace_error,
            "accepted_steps": g.stats.accepted,
        });
        println!("{line}");
        summary.push_str(&line.to_string());
        summary.push('\n');

        let t = &g.trajectory;
        let rows: Vec<Vec<String>> = (0..t.times.len())
            .map(|i| {
                std::iter::once(t.times[i])
                    .chain(std::iter::once(t.purity[i]))
                    .chain(t.populations[i].iter().copied())
                    .chain(std::iter::once(t.pop_minus[i]))
                    .map(num)
                    .collect()
            })
            .collect();
        let mut header = vec!["t_ps", "purity"];
        header.extend(POP_COLUMNS);
        header.push("pop_zeta_minus");
        ctx.csv(&mut out, "gate", &format!("gate_trajectory_{k}.csv"), &header, &rows);
        series.push(Series {
            name: format!("Δ = {} meV", c.pulse.delta_mev),
            points: t.times.iter().copied().zip(t.purity.iter().copied()).collect(),
        });
    }
    out.add("gate_summary.jsonl", summary);
    ctx.chart(&mut out, "gate_purity.svg", |st| {
        line_chart("Purity during the gate", ("t (ps)", "tr ρ²"), &series, st)
    })?;
    Ok(out)
}

const GATE_OBSERVABLES: [&str; 6] =
    ["purity", "fidelity", "conditional_phase", "reference_fidelity", "tau_ps", "max_xx"];
const LZ_OBSERVABLES: [&str; 2] = ["leakage", "lz_band"];

fn evaluate_cell(cfg: &RunConfig, observables: &[String]) -> Result<Vec<f64>, CliError> {
    let gate = if observables.iter().any(|o| GATE_OBSERVABLES.contains(&o.as_str())) {
        Some(run_gate(cfg, Exec::Sequential)?)
    } else {
        None
    };
    let leakage = if observables.iter().any(|o| LZ_OBSERVABLES.contains(&o.as_str())) {
        let p = &cfg.pulse;
        let tau = p.tau_ps.ok_or_else(|| CliError::Usage("leakage observables need pulse.tau_ps".into()))?;
        let pulse = PulseSchedule::new(p.omega0_mev, tau, p.delta_mev, p.t_cut)?;
        Some(lz_leakage_trace(&pulse, &cfg.system, cfg.lz.samples)?.final_leakage())
    } else {
        None
    };
    let [lo, hi] = cfg.sweep.lz_thresholds;
    Ok(observables
        .iter()
        .map(|o| {
            let g = gate.as_ref();
            match o.as_str() {
                "purity" => g.map_or(f64::NAN, |g| g.0.purity),
                "fidelity" => g.map_or(f64::NAN, |g| g.0.fidelity),
                "conditional_phase" => g.map_or(f64::NAN, |g| g.0.conditional_phase),
                "reference_fidelity" => g.map_or(f64::NAN, |g| g.0.reference_fidelity),
                "tau_ps" => g.and_then(|g| g.1).unwrap_or(f64::NAN),
                "max_xx" => g.map_or(f64::NAN, |g| g.0.trajectory.max_populations[BasisLabel::SXX.index()]),
                "leakage" => leakage.unwrap_or(f64::NAN),
                "lz_band" => leakage.map_or(f64::NAN, |l| {
                    if l < lo {
                        0.0
                    } else if l < hi {
                        1.0
                    } else {
                        2.0
                    }
                }),
                _ => unreachable!("observables are checked before the sweep"),
            }
        })
        .collect())
}

pub fn sweep_cmd(ctx: &Ctx) -> Result<OutputSet, CliError> {
    let cfg = &ctx.cfg;
    let sw = &cfg.sweep;
    let grid = Grid::new(sw.axes.clone());
    grid.cells().map_err(usage)?;
    for axis in &sw.axes {
        cfg.with_field(&axis.name, axis.min).map_err(|e| CliError::Usage(format!("sweep axis {}: {e}", axis.name)))?;
    }
    if sw.observables.is_empty() {
        return Err(CliError::Usage("sweep.observables is empty".into()));
    }
    for o in &sw.observables {
        if !GATE_OBSERVABLES.contains(&o.as_str()) && !LZ_OBSERVABLES.contains(&o.as_str()) {
            let known: Vec<&str> = GATE_OBSERVABLES.iter().chain(&LZ_OBSERVABLES).copied().collect();
            return Err(CliError::Usage(format!("unknown observable {o:?}; known: {}", known.join(", "))));
        }
    }
    let names: Vec<&str> = sw.observables.iter().map(String::as_str).collect();
    let table = sweep(&grid, &names, ctx.exec, |cell| {
        let mut c = cfg.clone();
        for (axis, &v) in sw.axes.iter().zip(cell) {
            c = c.with_field(&axis.name, v).map_err(|e| cphase::Error::InvalidParameter(e.to_string()))?;
        }
        evaluate_cell(&c, &sw.observables).map_err(|e| match e {
            CliError::Model(m) => m,
            other => cphase::Error::InvalidParameter(other.to_string()),
        })
    })?;
    let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
    println!("swept {} cells over {}; {failed} failed", table.rows.len(), table.axis_names.join(" × "));

    let mut out = OutputSet::default();
    let mut header: Vec<&str> = table.axis_names.iter().map(String::as_str).collect();
    header.extend(names.iter().copied());
    header.push("error");
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let mut row: Vec<String> = r.params.iter().chain(&r.observables).copied().map(num).collect();
            row.push(r.error.clone().unwrap_or_default());
            row
        })
        .collect();
    ctx.csv(&mut out, "sweep", "sweep.csv", &header, &rows);

    if cfg.wants(Format::Svg) {
        let values: Vec<Vec<f64>> = sw.axes.iter().map(|a| a.values()).collect::<Result<_, _>>().map_err(usage)?;
        for o in &names {
            let col = table.column(o).expect("observable column");
            let name = format!("sweep_{o}.svg");
            match values.len() {
                1 => {
                    let series = [Series { name: o.to_string(), points: values[0].iter().copied().zip(col).collect() }];
                    ctx.chart(&mut out, &name, |st| line_chart(o, (&sw.axes[0].name, o), &series, st))?;
                }
                2 => ctx.chart(&mut out, &name, |st| {
                    heatmap(o, (&sw.axes[0].name, &sw.axes[1].name), &values[0], &values[1], &col, st)
                })?,
                n => log::warn!("no chart for a {n}-axis sweep"),
            }
        }
    }
    Ok(out)
}

pub fn lz(ctx: &Ctx) -> Result<OutputSet, CliError> {
    let cfg = &ctx.cfg;
    let p = &cfg.pulse;
    if cfg.lz.taus_ps.is_empty() {
        return Err(CliError::Usage("lz.taus_ps is empty".into()));
    }
    let pulses: Vec<PulseSchedule> = cfg
        .lz
        .taus_ps
        .iter()
        .map(|&tau| PulseSchedule::new(p.omega0_mev, tau, p.delta_mev, p.t_cut))
        .collect::<Result<_, _>>()
        .map_err(usage)?;
    let traces = exec::map(ctx.exec, &pulses, |pulse| lz_leakage_trace(pulse, &cfg.system, cfg.lz.samples));

    let mut out = OutputSet::default();
    let mut summary = Vec::new();
    let mut series = Vec::new();
    for (k, (pulse, tr)) in pulses.iter().zip(traces).enumerate() {
        let tr = tr?;
        println!("τ = {} ps: final leakage {:.4e}", num(pulse.tau_ps), tr.final_leakage());
        let rows: Vec<Vec<String>> = tr.times.iter().zip(&tr.pop_minus).map(|(&t, &q)| vec![num(t), num(q)]).collect();
        ctx.csv(&mut out, "lz", &format!("lz_tau_{k}.csv"), &["t_ps", "pop_minus"], &rows);
        summary.push(vec![num(pulse.tau_ps), num(tr.final_leakage())]);
        series.push(Series {
            name: format!("τ = {} ps", pulse.tau_ps),
            points: tr.times.iter().copied().zip(tr.pop_minus.iter().copied()).collect(),
        });
    }
    ctx.csv(&mut out, "lz", "lz_summary.csv", &["tau_ps", "final_leakage"], &summary);
    ctx.chart(&mut out, "lz.svg", |st| line_chart("Lower dressed-state population", ("t (ps)", "P(ζ₋)"), &series, st))?;
    Ok(out)
}
