//! Fixed-endpoint stationary-action paths on the time lattice.
//!
//! Interior positions are continuous. Newton's method runs on the exact
//! tridiagonal Hessian from the straight line between the endpoints; when
//! that fails to converge the potential is switched on gradually
//! (homotopy in its strength) and each stage starts from the previous path.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::action::{action_gradient, action_hessian, discrete_action, ActionValue};
use crate::error::{Error, Result};
use crate::grid::{LatticePath, PhysicalConstants, TimeGrid};
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Drive the gradient to zero; steps are halved while the residual grows.
    Stationary,
    /// Steps are halved while the action grows.
    Minimum,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub mode: SolveMode,
    /// A Hessian whose smallest eigenvalue, in units of `m·dt/T²`, is below
    /// this in magnitude is treated as singular (conjugate point).
    pub singular_tol: f64,
    pub homotopy_stages: usize,
    pub max_halvings: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 50,
            mode: SolveMode::Stationary,
            singular_tol: 0.5,
            homotopy_stages: 4,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimumCertificate {
    pub is_positive_definite_hessian: bool,
    pub smallest_eigen_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct ClassicalPathResult {
    pub path: LatticePath,
    pub action: ActionValue,
    pub stationarity_residual: f64,
    pub minimum_certificate: MinimumCertificate,
    pub iterations: usize,
    pub used_homotopy: bool,
    pub potential: Potential,
    pub time_grid: TimeGrid,
    pub constants: PhysicalConstants,
}

impl ClassicalPathResult {
    pub fn is_minimum(&self) -> bool {
        self.minimum_certificate.is_positive_definite_hessian
    }
}

/// `max_k |∂S/∂x_k|`; zero when there are no interior nodes.
pub fn stationarity_residual(
    path: &LatticePath,
    p: &Potential,
    tg: &TimeGrid,
    c: &PhysicalConstants,
) -> Result<f64> {
    if tg.n_slices() < 2 {
        path.check_grid(tg)?;
        return Ok(0.0);
    }
    Ok(action_gradient(path, p, tg, c)?.iter().fold(0.0, |m, g| m.max(g.abs())))
}

pub fn solve_classical_path(
    x1: f64,
    x2: f64,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
    opts: &SolveOptions,
) -> Result<ClassicalPathResult> {
    solve_from(LatticePath::straight_line(tg, x1, x2), tg, p, c, opts)
}

/// Like [`solve_classical_path`] but from a caller-supplied initial path.
pub fn solve_from(
    initial: LatticePath,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
    opts: &SolveOptions,
) -> Result<ClassicalPathResult> {
    if tg.n_slices() < 2 {
        return Err(Error::NoInteriorPoints(tg.n_slices()));
    }
    initial.check_grid(tg)?;
    let (path, iterations, used_homotopy) = match newton(initial.clone(), tg, p, c, opts) {
        Ok((path, it)) => (path, it, false),
        Err(Error::NotConverged { .. }) if opts.homotopy_stages > 0 => {
            let mut path = initial;
            let mut total = 0;
            for stage in 1..=opts.homotopy_stages {
                let s = stage as f64 / opts.homotopy_stages as f64;
                let (next, it) = newton(path, tg, &p.scaled(s), c, opts)?;
                path = next;
                total += it;
            }
            (path, total, true)
        }
        Err(e) => return Err(e),
    };
    let hessian = action_hessian(&path, p, tg, c)?;
    Ok(ClassicalPathResult {
        action: discrete_action(&path, p, tg, c)?,
        stationarity_residual: stationarity_residual(&path, p, tg, c)?,
        minimum_certificate: MinimumCertificate {
            is_positive_definite_hessian: hessian.is_positive_definite(),
            smallest_eigen_estimate: hessian.smallest_eigenvalue(),
        },
        path,
        iterations,
        used_homotopy,
        potential: p.clone(),
        time_grid: *tg,
        constants: *c,
    })
}

fn newton(
    mut path: LatticePath,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
    opts: &SolveOptions,
) -> Result<(LatticePath, usize)> {
    let eigen_unit = c.mass * tg.dt() / (tg.duration() * tg.duration());
    let mut residual = stationarity_residual(&path, p, tg, c)?;
    let mut action = discrete_action(&path, p, tg, c)?.value();
    for iter in 0..opts.max_iters {
        if residual < opts.tol {
            return Ok((path, iter));
        }
        let grad = action_gradient(&path, p, tg, c)?;
        let hessian = action_hessian(&path, p, tg, c)?;
        let lambda = hessian.smallest_eigenvalue();
        if (lambda / eigen_unit).abs() < opts.singular_tol {
            return Err(Error::ConjugatePoint { eigenvalue: lambda, scaled: lambda / eigen_unit });
        }
        let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        let step = hessian
            .solve(&rhs)
            .ok_or(Error::ConjugatePoint { eigenvalue: lambda, scaled: lambda / eigen_unit })?;

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let interior: Vec<f64> = path.interior().iter().zip(&step).map(|(x, d)| x + scale * d).collect();
            let trial = path.with_interior(&interior)?;
            let trial_residual = stationarity_residual(&trial, p, tg, c)?;
            let trial_action = discrete_action(&trial, p, tg, c)?.value();
            let better = match opts.mode {
                SolveMode::Stationary => trial_residual < residual,
                SolveMode::Minimum => trial_action <= action,
            };
            if better && trial_residual.is_finite() {
                accepted = Some((trial, trial_residual, trial_action));
                break;
            }
            scale *= 0.5;
        }
        match accepted {
            Some((trial, r, s)) => {
                path = trial;
                residual = r;
                action = s;
            }
            None => return Err(Error::NotConverged { iterations: iter + 1, residual }),
        }
    }
    if residual < opts.tol {
        Ok((path, opts.max_iters))
    } else {
        Err(Error::NotConverged { iterations: opts.max_iters, residual })
    }
}

/// Number of sine modes in a probe perturbation.
const PROBE_MODES: usize = 3;

/// Fraction of random endpoint-preserving perturbations that raise the action
/// above the solved value.
///
/// Each perturbation is `magnitude · Σ_j a_j sin(jπ k/n) / j` over the lowest
/// few modes, with `a_j` uniform in `[−1, 1]`. Node-wise white noise would be
/// dominated by the stiff high modes and never see a saddle direction.
pub fn perturbation_probe(result: &ClassicalPathResult, magnitude: f64, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Ok(1.0);
    }
    let tg = &result.time_grid;
    let n = tg.n_slices();
    let modes = PROBE_MODES.min(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = result.path.interior().to_vec();
    let s_m = result.action.value();
    let mut increased = 0usize;
    for _ in 0..trials {
        let coeffs: Vec<f64> = (0..modes).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let interior: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let k = (i + 1) as f64;
                let delta: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, a)| {
                        let j = (j + 1) as f64;
                        a * (j * PI * k / n as f64).sin() / j
                    })
                    .sum();
                x + magnitude * delta
            })
            .collect();
        let perturbed = result.path.with_interior(&interior)?;
        let s = discrete_action(&perturbed, &result.potential, tg, &result.constants)?.value();
        if s > s_m {
            increased += 1;
        }
    }
    Ok(increased as f64 / trials as f64)
}

/// `½ m v_k² + V(midpoint)` on every slice.
pub fn slice_energies(path: &LatticePath, p: &Potential, tg: &TimeGrid, c: &PhysicalConstants) -> Result<Vec<f64>> {
    path.check_grid(tg)?;
    let dt = tg.dt();
    Ok(path
        .positions()
        .windows(2)
        .map(|w| {
            let v = (w[1] - w[0]) / dt;
            0.5 * c.mass * v * v + p.value(0.5 * (w[0] + w[1]))
        })
        .collect())
}

/// `x(τ) = [x₁ sin ω(t₂ − τ) + x₂ sin ω(τ − t₁)] / sin ω(t₂ − t₁)`.
pub fn harmonic_classical_path(x1: f64, x2: f64, omega: f64, t1: f64, t2: f64, tau: f64) -> f64 {
    if omega == 0.0 {
        return x1 + (x2 - x1) * (tau - t1) / (t2 - t1);
    }
    (x1 * (omega * (t2 - tau)).sin() + x2 * (omega * (tau - t1)).sin()) / (omega * (t2 - t1)).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    #[test]
    fn free_particle_straight_line() {
        let c = PhysicalConstants::new(1.0, 2.0).unwrap();
        let tg = TimeGrid::new(0.0, 1.5, 6).unwrap();
        let r = solve_classical_path(-0.4, 1.1, &tg, &Potential::Free, &c, &SolveOptions::default()).unwrap();
        assert!(r.stationarity_residual < 1e-12);
        let line = LatticePath::straight_line(&tg, -0.4, 1.1);
        for (a, b) in r.path.positions().iter().zip(line.positions()) {
            assert!((a - b).abs() < 1e-12);
        }
        let expected = 2.0 * 1.5f64.powi(2) / (2.0 * 1.5);
        assert!((r.action.value() - expected).abs() < 1e-12);
        assert!(r.is_minimum());
        assert_eq!(r.path.start(), -0.4);
        assert_eq!(r.path.end(), 1.1);
    }

    #[test]
    fn harmonic_matches_analytic_to_second_order() {
        let p = Potential::harmonic(1.0, &nat()).unwrap();
        let mut errors = Vec::new();
        for n in [8, 16, 32] {
            let tg = TimeGrid::new(0.0, 1.0, n).unwrap();
            let r = solve_classical_path(0.0, 1.0, &tg, &p, &nat(), &SolveOptions::default()).unwrap();
            assert!(r.stationarity_residual < 1e-10);
            let err = (1..n)
                .map(|k| (r.path.positions()[k] - tg.node(k).sin() / 1f64.sin()).abs())
                .fold(0.0, f64::max);
            assert!(err < tg.dt() * tg.dt(), "n={n}: {err}");
            errors.push(err);
        }
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn conjugate_point() {
        let p = Potential::harmonic(PI, &nat()).unwrap();
        let tg = TimeGrid::new(0.0, 1.0, 16).unwrap();
        let err = solve_classical_path(0.0, 1.0, &tg, &p, &nat(), &SolveOptions::default()).unwrap_err();
        assert!(err.to_string().contains("conjugate point"), "{err}");
    }

    #[test]
    fn residual_examples() {
        let tg = TimeGrid::new(0.0, 1.0, 8).unwrap();
        let line = LatticePath::straight_line(&tg, 0.0, 1.0);
        assert!(stationarity_residual(&line, &Potential::Free, &tg, &nat()).unwrap() < 1e-13);
        let p = Potential::harmonic(1.0, &nat()).unwrap();
        let r = stationarity_residual(&line, &p, &tg, &nat()).unwrap();
        // −dt/2 (V′(mid₋) + V′(mid₊)) = −dt·x_k for a straight line; largest at the last node
        assert!((r - tg.dt() * 7.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn perturbed_start_converges_to_same_path() {
        let p = Potential::harmonic(1.0, &nat()).unwrap();
        let tg = TimeGrid::new(0.0, 1.0, 12).unwrap();
        let a = solve_classical_path(0.0, 1.0, &tg, &p, &nat(), &SolveOptions::default()).unwrap();
        let mut start = LatticePath::straight_line(&tg, 0.0, 1.0).positions().to_vec();
        for (k, x) in start.iter_mut().enumerate().skip(1).take(11) {
            *x += 0.3 * (k as f64).cos();
        }
        let b = solve_from(LatticePath::for_grid(&tg, start).unwrap(), &tg, &p, &nat(), &SolveOptions::default()).unwrap();
        for (x, y) in a.path.interior().iter().zip(b.path.interior()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn quartic_and_minimum_mode() {
        let p = Potential::quartic(0.1).unwrap();
        let tg = TimeGrid::new(0.0, 1.0, 16).unwrap();
        let opts = SolveOptions { mode: SolveMode::Minimum, ..SolveOptions::default() };
        let r = solve_classical_path(-0.5, 1.5, &tg, &p, &nat(), &opts).unwrap();
        assert!(r.stationarity_residual < 1e-10);
        assert!(r.is_minimum());
        assert_eq!(perturbation_probe(&r, 0.1, 200, 7).unwrap(), 1.0);
    }

    #[test]
    fn stiff_quartic_uses_homotopy_or_converges() {
        let p = Potential::quartic(5.0).unwrap();
        let tg = TimeGrid::new(0.0, 2.0, 32).unwrap();
        let r = solve_classical_path(-2.0, 2.0, &tg, &p, &nat(), &SolveOptions::default()).unwrap();
        assert!(r.stationarity_residual < 1e-10);
    }

    #[test]
    fn non_convergence_reports_residual() {
        let p = Potential::quartic(0.1).unwrap();
        let tg = TimeGrid::new(0.0, 1.0, 8).unwrap();
        let opts = SolveOptions { max_iters: 1, homotopy_stages: 0, tol: 1e-30, ..SolveOptions::default() };
        match solve_classical_path(0.0, 3.0, &tg, &p, &nat(), &opts) {
            Err(Error::NotConverged { residual, .. }) => assert!(residual.is_finite()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn probe_free_and_harmonic() {
        let tg = TimeGrid::new(0.0, 1.0, 16).unwrap();
        let free = solve_classical_path(0.0, 1.0, &tg, &Potential::Free, &nat(), &SolveOptions::default()).unwrap();
        assert_eq!(perturbation_probe(&free, 0.5, 500, 1).unwrap(), 1.0);
        let below = Potential::harmonic(0.5, &nat()).unwrap();
        let r = solve_classical_path(0.0, 1.0, &tg, &below, &nat(), &SolveOptions::default()).unwrap();
        assert_eq!(perturbation_probe(&r, 0.05, 500, 2).unwrap(), 1.0);
        let tg35 = TimeGrid::new(0.0, 3.5, 64).unwrap();
        let past = Potential::harmonic(1.0, &nat()).unwrap();
        let r = solve_classical_path(0.0, 1.0, &tg35, &past, &nat(), &SolveOptions::default()).unwrap();
        assert!(!r.is_minimum());
        assert!(r.minimum_certificate.smallest_eigen_estimate < 0.0);
        let frac = perturbation_probe(&r, 0.05, 1000, 3).unwrap();
        assert!(frac < 1.0 && frac > 0.0, "{frac}");
    }

    #[test]
    fn energy_is_nearly_conserved() {
        let p = Potential::quartic(0.5).unwrap();
        let mut spreads = Vec::new();
        for n in [16, 32, 64] {
            let tg = TimeGrid::new(0.0, 1.0, n).unwrap();
            let r = solve_classical_path(-1.0, 1.0, &tg, &p, &nat(), &SolveOptions::default()).unwrap();
            let e = slice_energies(&r.path, &p, &tg, &nat()).unwrap();
            let (lo, hi) = e.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            assert!(hi - lo < 10.0 * tg.dt(), "n={n}: {}", hi - lo);
            spreads.push(hi - lo);
        }
        assert!(spreads[2] < spreads[0]);
    }

    #[test]
    fn determinism_of_probe() {
        let tg = TimeGrid::new(0.0, 3.5, 32).unwrap();
        let p = Potential::harmonic(1.0, &nat()).unwrap();
        let r = solve_classical_path(0.0, 1.0, &tg, &p, &nat(), &SolveOptions::default()).unwrap();
        assert_eq!(perturbation_probe(&r, 0.1, 300, 11).unwrap(), perturbation_probe(&r, 0.1, 300, 11).unwrap());
    }

    #[test]
    fn analytic_path_free_limit() {
        assert_eq!(harmonic_classical_path(0.0, 2.0, 0.0, 0.0, 1.0, 0.25), 0.5);
        assert!((harmonic_classical_path(0.0, 1.0, 1.0, 0.0, 1.0, 0.5) - 0.5f64.sin() / 1f64.sin()).abs() < 1e-15);
    }
}
