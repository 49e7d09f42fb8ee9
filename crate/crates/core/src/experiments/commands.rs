use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, PotentialSpec, Setup};
use super::output::{gnuplot_script, num, opt, CsvTable, Header, OutputSet};
use crate::classical::{harmonic_classical_path, perturbation_probe, slice_energies, solve_classical_path};
use crate::error::{Error, Result};
use crate::grid::{PhysicalConstants, SpaceGrid, TimeGrid};
use crate::propagator::{
    alias_free_separation, analytic_kernel_free, analytic_kernel_harmonic, lattice_kernel, step_wavefunction, Kernel,
    SliceOperator,
};
use crate::transition::{modulus_and_phase, transition_edge_leak, transition_quantities, wrap_to_pi, KinematicQuantity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Kernel,
    Evolve,
    Transition,
    ClassicalPath,
    TheoremCheck,
    VariationalCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Evolve => "evolve",
            Command::Transition => "transition",
            Command::ClassicalPath => "classical-path",
            Command::TheoremCheck => "theorem-check",
            Command::VariationalCheck => "variational-check",
        }
    }
}

/// Result of a command that ran to completion. `passed` is false when a
/// numerical check the command asserts did not hold; the files are complete
/// either way.
#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub files: OutputSet,
    pub summary: String,
    pub passed: bool,
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<CommandOutcome> {
    match command {
        Command::Kernel => cmd_kernel(cfg),
        Command::Evolve => cmd_evolve(cfg),
        Command::Transition => cmd_transition(cfg),
        Command::ClassicalPath => cmd_classical_path(cfg),
        Command::TheoremCheck => cmd_theorem_check(cfg),
        Command::VariationalCheck => cmd_variational_check(cfg),
    }
}

fn header(command: Command, cfg: &ExperimentConfig, setup: &Setup) -> Header {
    let (tg, sg, c) = (&setup.time, &setup.space, &setup.constants);
    let kv = |k: &str, v: String| (k.to_string(), v);
    Header {
        command: command.name().into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        discretization: vec![
            kv("potential", cfg.potential.label()),
            kv("hbar", num(c.hbar)),
            kv("mass", num(c.mass)),
            kv("t_start", num(tg.t_start())),
            kv("t_end", num(tg.t_end())),
            kv("n_slices", tg.n_slices().to_string()),
            kv("dt", num(tg.dt())),
            kv("x_min", num(sg.x_min())),
            kv("x_max", num(sg.x_max())),
            kv("n_points", sg.n_points().to_string()),
            kv("dx", num(sg.dx())),
            kv("absorbing_band", num(sg.absorbing_band())),
            kv("x1", num(cfg.endpoints.x1)),
            kv("x2", num(cfg.endpoints.x2)),
        ],
    }
}

fn json_file(header: &Header, body: serde_json::Value) -> String {
    let doc = json!({ "header": header.to_json(), "report": body });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// Closed-form kernel for the configured potential, when one exists.
fn analytic_oracle(cfg: &ExperimentConfig, c: PhysicalConstants) -> Option<impl Fn(f64, f64, f64) -> Result<Complex64>> {
    let omega = match cfg.potential {
        PotentialSpec::Free => 0.0,
        PotentialSpec::Harmonic { omega } => omega,
        _ => return None,
    };
    Some(move |x2: f64, x1: f64, t: f64| {
        if omega == 0.0 {
            analytic_kernel_free(x2, x1, t, &c)
        } else {
            analytic_kernel_harmonic(x2, x1, t, omega, &c)
        }
    })
}

/// Grid indices in the central half of the domain.
fn mid_domain(sg: &SpaceGrid) -> Vec<usize> {
    let centre = 0.5 * (sg.x_min() + sg.x_max());
    (0..sg.n_points()).filter(|&i| (sg.point(i) - centre).abs() <= 0.25 * sg.width()).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRow {
    pub n_slices: usize,
    pub dt: f64,
    pub alias_free_separation: f64,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub edge_leak: f64,
}

/// Mid-domain error of the lattice kernel for each slice count, against the
/// closed form when there is one and otherwise against the finest run.
pub fn kernel_convergence(cfg: &ExperimentConfig, setup: &Setup) -> Result<(Vec<ConvergenceRow>, &'static str)> {
    let (sg, c, p) = (&setup.space, setup.constants, &setup.potential);
    let (t0, t1) = (setup.time.t_start(), setup.time.t_end());
    let mid = mid_domain(sg);
    let pts = sg.points();
    let mut slices = cfg.convergence_slices.clone();
    slices.sort_unstable();
    slices.dedup();
    let kernels: Vec<Kernel> = slices
        .iter()
        .map(|&n| lattice_kernel(sg, &TimeGrid::new(t0, t1, n)?, p, &c))
        .collect::<Result<_>>()?;
    let oracle = analytic_oracle(cfg, c);
    let reference: Vec<Complex64> = match (&oracle, kernels.last()) {
        (Some(f), _) => {
            let mut v = Vec::with_capacity(mid.len() * mid.len());
            for &i in &mid {
                for &j in &mid {
                    v.push(f(pts[i], pts[j], t1 - t0)?);
                }
            }
            v
        }
        (None, Some(finest)) => mid.iter().flat_map(|&i| mid.iter().map(move |&j| finest.get(i, j))).collect(),
        (None, None) => Vec::new(),
    };
    let rows = slices
        .iter()
        .zip(&kernels)
        .map(|(&n, k)| {
            let (mut abs_err, mut rel_err) = (0.0f64, 0.0f64);
            let mut r = reference.iter();
            for &i in &mid {
                for &j in &mid {
                    let exact = *r.next().unwrap();
                    let d = (k.get(i, j) - exact).norm();
                    abs_err = abs_err.max(d);
                    rel_err = rel_err.max(d / exact.norm());
                }
            }
            let dt = (t1 - t0) / n as f64;
            ConvergenceRow {
                n_slices: n,
                dt,
                alias_free_separation: alias_free_separation(dt, sg.dx(), &c),
                max_abs_error: abs_err,
                max_rel_error: rel_err,
                edge_leak: k.edge_leak(),
            }
        })
        .collect();
    Ok((rows, if oracle.is_some() { "analytic" } else { "finest_lattice" }))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

pub fn cmd_kernel(cfg: &ExperimentConfig) -> Result<CommandOutcome> {
    let setup = cfg.validate()?;
    let h = header(Command::Kernel, cfg, &setup);
    let (sg, tg, c) = (&setup.space, &setup.time, setup.constants);
    let (x1, x2) = (cfg.endpoints.x1, cfg.endpoints.x2);
    let analytic = match analytic_oracle(cfg, c) {
        Some(f) => Some(f(x2, x1, tg.duration())?),
        None => None,
    };
    let kernel = lattice_kernel(sg, tg, &setup.potential, &c)?;
    let (rows, reference) = kernel_convergence(cfg, &setup)?;

    let mut matrix = CsvTable::new(&["i2", "x2", "i1", "x1", "re", "im"]);
    let pts = sg.points();
    for (i, &xi) in pts.iter().enumerate() {
        for (j, &xj) in pts.iter().enumerate() {
            let v = kernel.get(i, j);
            matrix.push(vec![i.to_string(), num(xi), j.to_string(), num(xj), num(v.re), num(v.im)]);
        }
    }
    let mut conv = CsvTable::new(&[
        "n_slices",
        "dt",
        "alias_free_separation",
        "max_abs_error",
        "max_rel_error",
        "edge_leak",
    ]);
    for r in &rows {
        conv.push(vec![
            r.n_slices.to_string(),
            num(r.dt),
            num(r.alias_free_separation),
            num(r.max_abs_error),
            num(r.max_rel_error),
            num(r.edge_leak),
        ]);
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.max_rel_error).collect();
    let monotone = strictly_decreasing(if reference == "analytic" { &errors } else { &errors[..errors.len().saturating_sub(1)] });
    let k12 = kernel.at(x2, x1)?;
    let body = json!({
        "kernel_at_endpoints": [k12.re, k12.im],
        "analytic_at_endpoints": analytic.map(|a| vec![a.re, a.im]),
        "edge_leak": kernel.edge_leak(),
        "convergence_reference": reference,
        "convergence": rows,
        "monotone_decrease": monotone,
    });

    let mut files = OutputSet::default();
    files.add("kernel.csv", matrix.render(&h));
    files.add("kernel_convergence.csv", conv.render(&h));
    files.add(
        "kernel_convergence.gp",
        gnuplot_script(&h, "kernel_convergence.csv", "kernel error vs slices", 1, &[(5, "max_rel_error")]),
    );
    files.add("kernel_summary.json", json_file(&h, body));
    let summary = format!(
        "K(x2,x1) = {} {:+}i; convergence vs {reference}: errors {:?}; monotone decrease: {monotone}",
        k12.re, k12.im, errors
    );
    Ok(CommandOutcome { files, summary, passed: true })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvolveRow {
    pub step: usize,
    pub time: f64,
    pub norm: f64,
    pub norm_drift: f64,
    pub l2_error: Option<f64>,
    pub inner_mass_fraction: f64,
}

/// Step the configured packet through every slice. The densities are
/// returned alongside the per-step table.
pub fn evolve_report(cfg: &ExperimentConfig, setup: &Setup) -> Result<(Vec<EvolveRow>, Vec<Vec<f64>>)> {
    let packet = cfg.packet.ok_or_else(|| Error::Config("evolve needs a `packet` entry".into()))?;
    let (sg, tg, c) = (&setup.space, &setup.time, &setup.constants);
    let free = matches!(cfg.potential, PotentialSpec::Free);
    let tol = cfg.tolerances.packet_outer_mass;
    let mut psi = packet.sample(sg, tg.t_start());
    let outside = 1.0 - psi.inner_mass_fraction();
    if outside > tol {
        return Err(Error::TruncationPolicy {
            detail: format!("initial packet has {outside:e} of its probability outside the inner region"),
            edge_leak: outside,
        });
    }
    if free {
        let last = packet.free_evolved(sg, tg.duration(), c, tg.t_end());
        let outside = 1.0 - last.inner_mass_fraction();
        if outside > tol {
            return Err(Error::TruncationPolicy {
                detail: format!("free packet reaches {outside:e} outside the inner region by t_end"),
                edge_leak: outside,
            });
        }
    }
    let op = SliceOperator::new(sg, tg.dt(), &setup.potential, c)?;
    let norm0 = psi.norm();
    let mut rows = Vec::with_capacity(tg.n_slices() + 1);
    let mut densities = Vec::with_capacity(tg.n_slices() + 1);
    for step in 0..=tg.n_slices() {
        if step > 0 {
            psi = step_wavefunction(&psi, &op)?;
            psi.time = tg.node(step);
        }
        let norm = psi.norm();
        let l2_error = if free {
            Some(psi.l2_distance(&packet.free_evolved(sg, psi.time - tg.t_start(), c, psi.time))?)
        } else {
            None
        };
        rows.push(EvolveRow {
            step,
            time: psi.time,
            norm,
            norm_drift: if norm0 == 0.0 { 0.0 } else { (norm - norm0).abs() / norm0 },
            l2_error,
            inner_mass_fraction: psi.inner_mass_fraction(),
        });
        densities.push(psi.values.iter().map(|z| z.norm_sqr()).collect());
    }
    Ok((rows, densities))
}

pub fn cmd_evolve(cfg: &ExperimentConfig) -> Result<CommandOutcome> {
    let setup = cfg.validate()?;
    let h = header(Command::Evolve, cfg, &setup);
    let (rows, densities) = evolve_report(cfg, &setup)?;
    let mut table = CsvTable::new(&["step", "t", "norm", "norm_drift", "l2_error", "inner_mass_fraction"]);
    for r in &rows {
        table.push(vec![
            r.step.to_string(),
            num(r.time),
            num(r.norm),
            num(r.norm_drift),
            opt(r.l2_error),
            num(r.inner_mass_fraction),
        ]);
    }
    let mut density = CsvTable::new(&["step", "t", "x", "density"]);
    let pts = setup.space.points();
    for (r, d) in rows.iter().zip(&densities) {
        for (x, v) in pts.iter().zip(d) {
            density.push(vec![r.step.to_string(), num(r.time), num(*x), num(*v)]);
        }
    }
    let last = rows.last().expect("at least the initial row");
    let max_drift = rows.iter().map(|r| r.norm_drift).fold(0.0, f64::max);
    let tol = &cfg.tolerances;
    let l2_ok = last.l2_error.is_none_or(|e| e < tol.evolve_l2);
    let drift_ok = max_drift < tol.norm_drift;
    let body = json!({
        "final_l2_error": last.l2_error,
        "max_norm_drift": max_drift,
        "l2_tolerance": tol.evolve_l2,
        "norm_drift_tolerance": tol.norm_drift,
        "l2_within_tolerance": l2_ok,
        "norm_drift_within_tolerance": drift_ok,
        "steps": rows,
    });
    let mut files = OutputSet::default();
    files.add("evolve_norm.csv", table.render(&h));
    files.add("evolve_density.csv", density.render(&h));
    files.add(
        "evolve.gp",
        gnuplot_script(&h, "evolve_norm.csv", "norm and error per step", 2, &[(3, "norm"), (5, "l2_error")]),
    );
    files.add("evolve_summary.json", json_file(&h, body));
    let summary = format!(
        "final L2 error {}; max norm drift {max_drift:e}; within tolerance: {}",
        opt(last.l2_error),
        l2_ok && drift_ok
    );
    Ok(CommandOutcome { files, summary, passed: l2_ok && drift_ok })
}

pub fn cmd_transition(cfg: &ExperimentConfig) -> Result<CommandOutcome> {
    let setup = cfg.validate()?;
    if cfg.quantities.is_empty() {
        return Err(Error::Config("no quantities requested".into()));
    }
    if setup.time.n_slices() < 2 {
        return Err(Error::NoInteriorPoints(setup.time.n_slices()));
    }
    let h = header(Command::Transition, cfg, &setup);
    let (x1, x2) = (cfg.endpoints.x1, cfg.endpoints.x2);
    let tqs = transition_quantities(
        &cfg.quantities,
        x1,
        x2,
        &setup.space,
        &setup.time,
        &setup.potential,
        &setup.constants,
    )?;
    let mut table = CsvTable::new(&[
        "quantity", "k", "tau", "re", "im", "modulus", "phase", "kernel_re", "kernel_im", "ratio_re", "ratio_im",
    ]);
    for tq in &tqs {
        let (moduli, phases) = modulus_and_phase(&tq.samples);
        let ratios = tq.normalized();
        for (k, &tau) in tq.times.iter().enumerate() {
            let s = tq.samples[k];
            table.push(vec![
                tq.quantity.name(),
                (k + 1).to_string(),
                num(tau),
                num(s.re),
                num(s.im),
                num(moduli[k]),
                opt(phases[k]),
                num(tq.kernel_value.re),
                num(tq.kernel_value.im),
                num(ratios[k].re),
                num(ratios[k].im),
            ]);
        }
    }
    let mut files = OutputSet::default();
    files.add("transition.csv", table.render(&h));
    files.add(
        "transition.gp",
        gnuplot_script(&h, "transition.csv", "transition quantities", 3, &[(10, "ratio_re"), (11, "ratio_im")]),
    );
    let k = tqs[0].kernel_value;
    let summary = format!("{} quantities at {} interior nodes; K = {} {:+}i", tqs.len(), tqs[0].times.len(), k.re, k.im);
    Ok(CommandOutcome { files, summary, passed: true })
}

fn analytic_path(cfg: &ExperimentConfig, tg: &TimeGrid, tau: f64) -> Option<f64> {
    let omega = match cfg.potential {
        PotentialSpec::Free => 0.0,
        PotentialSpec::Harmonic { omega } => omega,
        _ => return None,
    };
    let v = harmonic_classical_path(cfg.endpoints.x1, cfg.endpoints.x2, omega, tg.t_start(), tg.t_end(), tau);
    v.is_finite().then_some(v)
}

pub fn cmd_classical_path(cfg: &ExperimentConfig) -> Result<CommandOutcome> {
    let setup = cfg.validate()?;
    let h = header(Command::ClassicalPath, cfg, &setup);
    let (tg, p, c) = (&setup.time, &setup.potential, &setup.constants);
    let r = solve_classical_path(cfg.endpoints.x1, cfg.endpoints.x2, tg, p, c, &cfg.solver.options())?;
    let energies = slice_energies(&r.path, p, tg, c)?;
    let mut table = CsvTable::new(&["k", "tau", "x_m", "analytic", "slice_energy"]);
    for (k, &x) in r.path.positions().iter().enumerate() {
        let tau = tg.node(k);
        table.push(vec![k.to_string(), num(tau), num(x), opt(analytic_path(cfg, tg, tau)), opt(energies.get(k).copied())]);
    }
    let max_analytic_dev = (0..=tg.n_slices())
        .filter_map(|k| analytic_path(cfg, tg, tg.node(k)).map(|a| (a - r.path.positions()[k]).abs()))
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    let body = json!({
        "action": r.action.value(),
        "stationarity_residual": r.stationarity_residual,
        "minimum_certificate": r.minimum_certificate,
        "iterations": r.iterations,
        "used_homotopy": r.used_homotopy,
        "max_deviation_from_analytic": max_analytic_dev,
    });
    let mut files = OutputSet::default();
    files.add("classical_path.csv", table.render(&h));
    files.add(
        "classical_path.gp",
        gnuplot_script(&h, "classical_path.csv", "stationary path", 2, &[(3, "x_m"), (4, "analytic")]),
    );
    files.add("classical_path_summary.json", json_file(&h, body));
    let summary = format!(
        "S = {}; residual {:e}; positive definite Hessian: {}",
        r.action.value(),
        r.stationarity_residual,
        r.minimum_certificate.is_positive_definite_hessian
    );
    Ok(CommandOutcome { files, summary, passed: true })
}

/// One interior node of a theorem check at a single value of ħ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoremRow {
    pub k: usize,
    pub tau: f64,
    pub x_m: f64,
    pub ratio_x: [f64; 2],
    pub deviation: f64,
    /// `arg⟨x⟩ − arg K` wrapped into `(−π, π]`.
    pub phase_difference: Option<f64>,
    /// Distance of the phase difference from the nearest of 0 and π.
    pub phase_offset: Option<f64>,
    pub ratio_x2: [f64; 2],
    /// `⟨x²⟩/K − x_m²`.
    pub fluctuation: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremRun {
    pub hbar: f64,
    pub rows: Vec<TheoremRow>,
    pub max_deviation: f64,
    pub max_fluctuation: f64,
    pub edge_leak: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub quadratic: bool,
    pub tol_quadratic: f64,
    /// Run at the configured ħ.
    pub base: TheoremRun,
    /// Runs over the ħ scan in the configured order.
    pub scan: Vec<TheoremRun>,
    pub deviation_decreasing: bool,
    pub fluctuation_decreasing: bool,
    pub action: f64,
    pub stationarity_residual: f64,
}

impl TheoremReport {
    pub fn max_deviation(&self) -> f64 {
        self.base.max_deviation
    }

    pub fn quadratic_assertion_holds(&self) -> bool {
        !self.quadratic || self.base.max_deviation < self.tol_quadratic
    }
}

fn theorem_run(setup: &Setup, x_m: &[f64], x1: f64, x2: f64, c: PhysicalConstants) -> Result<TheoremRun> {
    let (sg, tg, p) = (&setup.space, &setup.time, &setup.potential);
    let tqs = transition_quantities(
        &[KinematicQuantity::Position, KinematicQuantity::PositionSquared],
        x1,
        x2,
        sg,
        tg,
        p,
        &c,
    )?;
    let (rx, rx2) = (tqs[0].normalized(), tqs[1].normalized());
    let k_arg = tqs[0].kernel_value.arg();
    let rows: Vec<TheoremRow> = (1..tg.n_slices())
        .map(|k| {
            let xm = x_m[k];
            let sample = tqs[0].samples[k - 1];
            let phase_difference = (sample.norm() > 0.0).then(|| wrap_to_pi(sample.arg() - k_arg));
            let fl = rx2[k - 1] - xm * xm;
            TheoremRow {
                k,
                tau: tg.node(k),
                x_m: xm,
                ratio_x: [rx[k - 1].re, rx[k - 1].im],
                deviation: (rx[k - 1] - xm).norm(),
                phase_difference,
                phase_offset: phase_difference.map(|d| d.abs().min(PI - d.abs())),
                ratio_x2: [rx2[k - 1].re, rx2[k - 1].im],
                fluctuation: [fl.re, fl.im],
            }
        })
        .collect();
    Ok(TheoremRun {
        hbar: c.hbar,
        max_deviation: rows.iter().map(|r| r.deviation).fold(0.0, f64::max),
        max_fluctuation: rows.iter().map(|r| r.fluctuation[0].hypot(r.fluctuation[1])).fold(0.0, f64::max),
        edge_leak: transition_edge_leak(x1, x2, sg, tg, p, &c)?,
        rows,
    })
}

/// Compares `⟨x(τ)⟩/K` with the solved stationary path at the configured ħ
/// and over the ħ scan.
pub fn theorem_report(cfg: &ExperimentConfig) -> Result<TheoremReport> {
    let setup = cfg.validate()?;
    let (x1, x2) = (cfg.endpoints.x1, cfg.endpoints.x2);
    if setup.time.n_slices() < 2 {
        return Err(Error::NoInteriorPoints(setup.time.n_slices()));
    }
    if !setup.space.in_inner_region(x1) || !setup.space.in_inner_region(x2) {
        let leak = transition_edge_leak(x1, x2, &setup.space, &setup.time, &setup.potential, &setup.constants)?;
        return Err(Error::TruncationPolicy {
            detail: format!("endpoints {x1} and {x2} must lie in the inner region of the domain"),
            edge_leak: leak,
        });
    }
    let solved = solve_classical_path(x1, x2, &setup.time, &setup.potential, &setup.constants, &cfg.solver.options())?;
    let x_m = solved.path.positions();
    let base = theorem_run(&setup, x_m, x1, x2, setup.constants)?;
    let scan = cfg
        .hbar_scan
        .iter()
        .map(|&hb| {
            if hb == setup.constants.hbar {
                Ok(base.clone())
            } else {
                theorem_run(&setup, x_m, x1, x2, setup.constants.with_hbar(hb)?)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut by_hbar: Vec<&TheoremRun> = scan.iter().collect();
    by_hbar.sort_by(|a, b| b.hbar.total_cmp(&a.hbar));
    let devs: Vec<f64> = by_hbar.iter().map(|r| r.max_deviation).collect();
    let flucts: Vec<f64> = by_hbar.iter().map(|r| r.max_fluctuation).collect();
    Ok(TheoremReport {
        quadratic: setup.potential.is_quadratic(),
        tol_quadratic: cfg.tol_quadratic(&setup),
        base,
        deviation_decreasing: strictly_decreasing(&devs),
        fluctuation_decreasing: strictly_decreasing(&flucts),
        scan,
        action: solved.action.value(),
        stationarity_residual: solved.stationarity_residual,
    })
}

pub fn cmd_theorem_check(cfg: &ExperimentConfig) -> Result<CommandOutcome> {
    let setup = cfg.validate()?;
    let h = header(Command::TheoremCheck, cfg, &setup);
    let report = theorem_report(cfg)?;
    let mut table = CsvTable::new(&[
        "k",
        "tau",
        "x_m",
        "ratio_x_re",
        "ratio_x_im",
        "deviation",
        "phase_difference",
        "phase_offset",
        "ratio_x2_re",
        "ratio_x2_im",
        "fluctuation_re",
        "fluctuation_im",
    ]);
    for r in &report.base.rows {
        table.push(vec![
            r.k.to_string(),
            num(r.tau),
            num(r.x_m),
            num(r.ratio_x[0]),
            num(r.ratio_x[1]),
            num(r.deviation),
            opt(r.phase_difference),
            opt(r.phase_offset),
            num(r.ratio_x2[0]),
            num(r.ratio_x2[1]),
            num(r.fluctuation[0]),
            num(r.fluctuation[1]),
        ]);
    }
    let mut scan = CsvTable::new(&["hbar", "max_deviation", "max_fluctuation", "edge_leak"]);
    for run in &report.scan {
        scan.push(vec![num(run.hbar), num(run.max_deviation), num(run.max_fluctuation), num(run.edge_leak)]);
    }
    let passed = report.quadratic_assertion_holds();
    let mut files = OutputSet::default();
    files.add("theorem_table.csv", table.render(&h));
    files.add("theorem_hbar_scan.csv", scan.render(&h));
    files.add(
        "theorem.gp",
        gnuplot_script(&h, "theorem_table.csv", "stationary path vs <x>/K", 2, &[(3, "x_m"), (4, "ratio_x_re")]),
    );
    files.add(
        "theorem_summary.json",
        json_file(
            &h,
            json!({
                "quadratic": report.quadratic,
                "tol_quadratic": report.tol_quadratic,
                "max_deviation": report.base.max_deviation,
                "quadratic_assertion": if report.quadratic { Some(passed) } else { None },
                "deviation_decreasing_with_hbar": report.deviation_decreasing,
                "fluctuation_decreasing_with_hbar": report.fluctuation_decreasing,
                "edge_leak": report.base.edge_leak,
                "action": report.action,
                "stationarity_residual": report.stationarity_residual,
                "scan": report.scan.iter().map(|r| json!({
                    "hbar": r.hbar,
                    "max_deviation": r.max_deviation,
                    "max_fluctuation": r.max_fluctuation,
                    "edge_leak": r.edge_leak,
                })).collect::<Vec<_>>(),
            }),
        ),
    );
    let summary = if report.quadratic {
        format!(
            "quadratic action: max deviation {:e} vs tolerance {:e} ({})",
            report.base.max_deviation,
            report.tol_quadratic,
            if passed { "holds" } else { "FAILS" }
        )
    } else {
        format!(
            "anharmonic action: max deviation {:e}; decreasing as hbar shrinks: {}; fluctuation decreasing: {}",
            report.base.max_deviation, report.deviation_decreasing, report.fluctuation_decreasing
        )
    };
    Ok(CommandOutcome { files, summary, passed })
}

pub fn cmd_variational_check(cfg: &ExperimentConfig) -> Result<CommandOutcome> {
    let setup = cfg.validate()?;
    let h = header(Command::VariationalCheck, cfg, &setup);
    let (tg, p, c) = (&setup.time, &setup.potential, &setup.constants);
    let r = solve_classical_path(cfg.endpoints.x1, cfg.endpoints.x2, tg, p, c, &cfg.solver.options())?;
    let fraction = perturbation_probe(&r, cfg.probe.magnitude, cfg.probe.trials, cfg.seed)?;
    let classification = if fraction < 1.0 {
        "stationary but not minimal"
    } else if r.is_minimum() {
        "minimum"
    } else {
        "stationary; probe found no lower action but the Hessian is indefinite"
    };
    let mut table = CsvTable::new(&["k", "tau", "x_m"]);
    for (k, &x) in r.path.positions().iter().enumerate() {
        table.push(vec![k.to_string(), num(tg.node(k)), num(x)]);
    }
    let body = json!({
        "stationarity_residual": r.stationarity_residual,
        "action": r.action.value(),
        "minimum_certificate": r.minimum_certificate,
        "probe_fraction": fraction,
        "probe_magnitude": cfg.probe.magnitude,
        "probe_trials": cfg.probe.trials,
        "classification": classification,
    });
    let mut files = OutputSet::default();
    files.add("variational_path.csv", table.render(&h));
    files.add("variational_summary.json", json_file(&h, body));
    let summary = format!(
        "residual {:e}; probe fraction {fraction}; {classification}",
        r.stationarity_residual
    );
    Ok(CommandOutcome { files, summary, passed: true })
}
