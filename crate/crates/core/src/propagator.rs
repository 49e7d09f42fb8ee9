//! Transition amplitudes and wavefunction evolution.
//!
//! The kernel over `[t_start, t_end]` is computed three ways: by iterated
//! convolution of short-time kernels on the spatial lattice, by an explicit
//! sum of `exp(iS/ħ)` over every lattice path, and from the closed forms for
//! the free particle and the harmonic oscillator.
//!
//! Phase convention: the square root in the short-time prefactor
//! `√(m / 2πiħdt)` is taken with phase `−π/4`, so an `n`-slice product
//! carries a prefactor phase of `−nπ/4` on top of the action phases.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::action::{discrete_action, slice_action};
use crate::error::{Error, Result};
use crate::grid::{enumerate_lattice_paths, LatticePath, PhysicalConstants, SpaceGrid, TimeGrid};
use crate::linalg::CMatrix;
use crate::potential::Potential;

/// `|sin ωT|` below which the closed-form harmonic kernel is refused.
pub const FOCAL_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Lattice { dt: f64, dx: f64 },
    BruteForce,
    Analytic,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Lattice { .. } => "lattice",
            Provenance::BruteForce => "brute_force",
            Provenance::Analytic => "analytic",
        }
    }
}

/// `K(x₂, x₁)` sampled on a spatial grid; rows index `x₂`, columns `x₁`.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub values: CMatrix,
    pub grid: SpaceGrid,
    pub t_start: f64,
    pub t_end: f64,
    pub provenance: Provenance,
}

impl Kernel {
    pub fn get(&self, i_to: usize, i_from: usize) -> Complex64 {
        self.values.get(i_to, i_from)
    }

    pub fn at(&self, x_to: f64, x_from: f64) -> Result<Complex64> {
        Ok(self.get(self.grid.index_of(x_to)?, self.grid.index_of(x_from)?))
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Fraction of `Σ|K|²` that lands in the outer bands, taken over
    /// source points inside the inner region.
    pub fn edge_leak(&self) -> f64 {
        let n = self.grid.n_points();
        let mut outer = 0.0;
        let mut total = 0.0;
        for j in (0..n).filter(|&j| !self.grid.in_outer_band(j)) {
            for i in 0..n {
                let m = self.get(i, j).norm_sqr();
                total += m;
                if self.grid.in_outer_band(i) {
                    outer += m;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }
}

/// Separation beyond which the sampled short-time phase `m Δx² / 2ħdt`
/// advances by more than π per grid step and aliases.
pub fn alias_free_separation(dt: f64, dx: f64, c: &PhysicalConstants) -> f64 {
    PI * c.hbar * dt / (c.mass * dx)
}

/// `√(m / 2πiħdt)` on the branch with phase `−π/4`.
pub fn short_time_prefactor(dt: f64, c: &PhysicalConstants) -> Complex64 {
    let modulus = (c.mass / (2.0 * PI * c.hbar * dt)).sqrt();
    Complex64::from_polar(modulus, -FRAC_PI_4)
}

pub fn short_time_kernel(
    x_to: f64,
    x_from: f64,
    dt: f64,
    p: &Potential,
    c: &PhysicalConstants,
) -> Result<Complex64> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    let phase = slice_action(x_from, x_to, dt, p, c) / c.hbar;
    Ok(short_time_prefactor(dt, c) * Complex64::from_polar(1.0, phase))
}

/// One time slice as a matrix on the lattice together with its quadrature
/// weights. Applying it is `v ↦ S · diag(w) · v`.
#[derive(Debug, Clone)]
pub struct SliceOperator {
    grid: SpaceGrid,
    dt: f64,
    matrix: CMatrix,
    weights: Vec<f64>,
}

impl SliceOperator {
    pub fn new(sg: &SpaceGrid, dt: f64, p: &Potential, c: &PhysicalConstants) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::NonPositiveStep(dt));
        }
        let pts = sg.points();
        let pre = short_time_prefactor(dt, c);
        let matrix = CMatrix::from_fn(pts.len(), pts.len(), |i, j| {
            pre * Complex64::from_polar(1.0, slice_action(pts[j], pts[i], dt, p, c) / c.hbar)
        });
        Ok(Self { grid: sg.clone(), dt, matrix, weights: sg.weights() })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.matrix.weighted_apply(&self.weights, v)
    }

    /// Columns `K_j(·, x_from)` for `j = 1..=slices`, i.e. the kernel from
    /// grid point `from` after each number of slices.
    pub fn propagate_from(&self, from: usize, slices: usize) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(slices);
        if slices == 0 {
            return out;
        }
        out.push(self.matrix.column(from));
        for _ in 1..slices {
            let next = self.apply(out.last().unwrap());
            out.push(next);
        }
        out
    }

    /// Rows `K_j(x_to, ·)` for `j = 1..=slices`.
    pub fn propagate_to(&self, to: usize, slices: usize) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(slices);
        if slices == 0 {
            return out;
        }
        out.push(self.matrix.row(to).to_vec());
        for _ in 1..slices {
            let next = self.matrix.weighted_apply_left(&self.weights, out.last().unwrap());
            out.push(next);
        }
        out
    }

    fn kernel(&self, t_start: f64, t_end: f64, values: CMatrix) -> Kernel {
        Kernel {
            values,
            grid: self.grid.clone(),
            t_start,
            t_end,
            provenance: Provenance::Lattice { dt: self.dt, dx: self.grid.dx() },
        }
    }

    /// `K_n = S W S W … S` (`n` factors of `S`), by repeated squaring.
    pub fn power(&self, n: usize) -> CMatrix {
        assert!(n >= 1);
        let mut result: Option<CMatrix> = None;
        let mut base = self.matrix.clone();
        let mut e = n;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.weighted_product(&self.weights, &base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.weighted_product(&self.weights, &base);
        }
        result.unwrap()
    }
}

/// Kernel over the whole time grid by iterated short-time convolution.
pub fn lattice_kernel(
    sg: &SpaceGrid,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
) -> Result<Kernel> {
    let op = SliceOperator::new(sg, tg.dt(), p, c)?;
    let values = op.power(tg.n_slices());
    Ok(op.kernel(tg.t_start(), tg.t_end(), values))
}

/// `Σ_paths exp(iS/ħ)` with the measure `√(m/2πiħdt)` per slice and the
/// quadrature weight of every interior point.
pub fn brute_force_kernel(
    sg: &SpaceGrid,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
    x1: f64,
    x2: f64,
    cap: u64,
) -> Result<Complex64> {
    weighted_path_sum(sg, tg, p, c, x1, x2, cap, |_| 1.0)
}

/// Path sum of `g(path) · exp(iS/ħ)` with the lattice measure. Partitioned
/// by the first interior index; the partial sums are added in index order.
pub fn weighted_path_sum<F>(
    sg: &SpaceGrid,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
    x1: f64,
    x2: f64,
    cap: u64,
    g: F,
) -> Result<Complex64>
where
    F: Fn(&LatticePath) -> f64 + Sync,
{
    let paths = enumerate_lattice_paths(sg, tg, x1, x2, cap)?;
    let weights = sg.weights();
    let measure = short_time_prefactor(tg.dt(), c).powu(tg.n_slices() as u32);
    let parts = paths.partition_by_prefix();
    let partial: Vec<Result<Complex64>> = parts
        .into_par_iter()
        .map(|part| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = Vec::new();
            let mut part = part;
            while part.next_indices(&mut idx) {
                let w: f64 = idx[1..idx.len() - 1].iter().map(|&i| weights[i]).product();
                if w == 0.0 {
                    continue;
                }
                let path = LatticePath::new(idx.iter().map(|&i| sg.point(i)).collect())?;
                let s = discrete_action(&path, p, tg, c)?.value();
                acc += Complex64::from_polar(w * g(&path), s / c.hbar);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for part in partial {
        total += part?;
    }
    Ok(measure * total)
}

pub fn analytic_kernel_free(x2: f64, x1: f64, duration: f64, c: &PhysicalConstants) -> Result<Complex64> {
    if !(duration > 0.0) {
        return Err(Error::NonPositiveStep(duration));
    }
    let d = x2 - x1;
    Ok(short_time_prefactor(duration, c) * Complex64::from_polar(1.0, c.mass * d * d / (2.0 * c.hbar * duration)))
}

/// Mehler kernel. Past each focal point the prefactor picks up an extra
/// `−π/2` (Maslov) phase, so the kernel stays continuous in `T` away from
/// the caustics.
pub fn analytic_kernel_harmonic(
    x2: f64,
    x1: f64,
    duration: f64,
    omega: f64,
    c: &PhysicalConstants,
) -> Result<Complex64> {
    analytic_kernel_harmonic_eps(x2, x1, duration, omega, c, FOCAL_EPS)
}

pub fn analytic_kernel_harmonic_eps(
    x2: f64,
    x1: f64,
    duration: f64,
    omega: f64,
    c: &PhysicalConstants,
    eps: f64,
) -> Result<Complex64> {
    if !(duration > 0.0) {
        return Err(Error::NonPositiveStep(duration));
    }
    if omega == 0.0 {
        return analytic_kernel_free(x2, x1, duration, c);
    }
    let wt = omega * duration;
    let s = wt.sin();
    if s.abs() < eps {
        return Err(Error::FocalPoint { sin_abs: s.abs(), eps });
    }
    let modulus = (c.mass * omega / (2.0 * PI * c.hbar * s.abs())).sqrt();
    let caustics = (wt / PI).floor();
    let pre = Complex64::from_polar(modulus, -FRAC_PI_4 - 0.5 * PI * caustics);
    let phase = c.mass * omega / (2.0 * c.hbar * s) * ((x1 * x1 + x2 * x2) * wt.cos() - 2.0 * x1 * x2);
    Ok(pre * Complex64::from_polar(1.0, phase))
}

/// Samples a closed-form kernel on the grid.
pub fn sampled_kernel<F>(sg: &SpaceGrid, t_start: f64, t_end: f64, f: F) -> Result<Kernel>
where
    F: Fn(f64, f64) -> Result<Complex64> + Sync,
{
    let pts = sg.points();
    let n = pts.len();
    let entries: Result<Vec<Complex64>> = (0..n * n)
        .into_par_iter()
        .map(|k| f(pts[k / n], pts[k % n]))
        .collect();
    let entries = entries?;
    Ok(Kernel {
        values: CMatrix::from_fn(n, n, |i, j| entries[i * n + j]),
        grid: sg.clone(),
        t_start,
        t_end,
        provenance: Provenance::Analytic,
    })
}

/// `K_a ∘ K_b`: `K_b` covers `[t₁, t₂]`, `K_a` covers `[t₂, t₃]`.
pub fn compose_kernels(k_a: &Kernel, k_b: &Kernel) -> Result<Kernel> {
    if !k_a.grid.same_lattice(&k_b.grid) {
        return Err(Error::GridMismatch("kernels live on different spatial grids".into()));
    }
    let tol = 1e-12 * k_a.t_end.abs().max(k_b.t_start.abs()).max(1.0);
    if (k_a.t_start - k_b.t_end).abs() > tol {
        return Err(Error::GridMismatch(format!(
            "intervals do not adjoin: second ends at {}, first starts at {}",
            k_b.t_end, k_a.t_start
        )));
    }
    let provenance = match (k_a.provenance, k_b.provenance) {
        (Provenance::Lattice { dt: a, dx }, Provenance::Lattice { dt: b, .. }) if a == b => {
            Provenance::Lattice { dt: a, dx }
        }
        _ => Provenance::Lattice { dt: f64::NAN, dx: k_a.grid.dx() },
    };
    Ok(Kernel {
        values: k_a.values.weighted_product(&k_a.grid.weights(), &k_b.values),
        grid: k_a.grid.clone(),
        t_start: k_b.t_start,
        t_end: k_a.t_end,
        provenance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub values: Vec<Complex64>,
    pub grid: SpaceGrid,
    pub time: f64,
}

impl Wavefunction {
    pub fn new(grid: &SpaceGrid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.n_points()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidGrid("wavefunction values must be finite".into()));
        }
        Ok(Self { values, grid: grid.clone(), time })
    }

    pub fn zeros(grid: &SpaceGrid, time: f64) -> Self {
        Self { values: vec![Complex64::new(0.0, 0.0); grid.n_points()], grid: grid.clone(), time }
    }

    /// `Σ|ψ|² dx`.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Share of the norm that sits inside the inner region.
    pub fn inner_mass_fraction(&self) -> f64 {
        let total = self.norm();
        if total == 0.0 {
            return 1.0;
        }
        let inner: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.grid.in_outer_band(*i))
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            * self.grid.dx();
        inner / total
    }

    /// `(Σ|ψ − φ|² dx)^½`.
    pub fn l2_distance(&self, other: &Wavefunction) -> Result<f64> {
        if !self.grid.same_lattice(&other.grid) {
            return Err(Error::GridMismatch("wavefunctions live on different grids".into()));
        }
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.grid.dx()).sqrt())
    }
}

/// Normalised Gaussian packet with position spread `sigma0` and mean wave
/// number `k0`, scaled by `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianPacket {
    pub x0: f64,
    pub sigma0: f64,
    pub k0: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl GaussianPacket {
    pub fn sample(&self, grid: &SpaceGrid, time: f64) -> Wavefunction {
        let norm = (2.0 * PI * self.sigma0 * self.sigma0).powf(-0.25) * self.amplitude;
        let values = grid
            .points()
            .iter()
            .map(|&x| {
                let d = x - self.x0;
                norm * Complex64::from_polar((-d * d / (4.0 * self.sigma0 * self.sigma0)).exp(), self.k0 * d)
            })
            .collect();
        Wavefunction { values, grid: grid.clone(), time }
    }

    /// Exact free evolution of the packet after `t`.
    pub fn free_evolved(&self, grid: &SpaceGrid, t: f64, c: &PhysicalConstants, time: f64) -> Wavefunction {
        let s0 = self.sigma0;
        let spread = Complex64::new(1.0, c.hbar * t / (2.0 * c.mass * s0 * s0));
        let st = spread * s0;
        let pre = (2.0 * PI * s0 * s0).powf(-0.25) * self.amplitude / spread.sqrt();
        let v = c.hbar * self.k0 / c.mass;
        let values = grid
            .points()
            .iter()
            .map(|&x| {
                let d = x - self.x0 - v * t;
                let gauss = (-Complex64::new(d * d, 0.0) / (4.0 * s0 * st)).exp();
                let phase = Complex64::from_polar(1.0, self.k0 * (x - self.x0 - 0.5 * v * t));
                pre * gauss * phase
            })
            .collect();
        Wavefunction { values, grid: grid.clone(), time }
    }
}

/// `ψ₂(x₂) = Σ K(x₂, x₁) ψ₁(x₁) w(x₁)`.
pub fn evolve_wavefunction(psi: &Wavefunction, kernel: &Kernel) -> Result<Wavefunction> {
    if !psi.grid.same_lattice(&kernel.grid) {
        return Err(Error::GridMismatch("wavefunction and kernel grids differ".into()));
    }
    let values = kernel.values.weighted_apply(&kernel.grid.weights(), &psi.values);
    Ok(Wavefunction { values, grid: psi.grid.clone(), time: psi.time + kernel.duration() })
}

/// One short-time step of `dt` applied to `psi` without forming a kernel.
pub fn step_wavefunction(psi: &Wavefunction, op: &SliceOperator) -> Result<Wavefunction> {
    if !psi.grid.same_lattice(op.grid()) {
        return Err(Error::GridMismatch("wavefunction and operator grids differ".into()));
    }
    Ok(Wavefunction { values: op.apply(&psi.values), grid: psi.grid.clone(), time: psi.time + op.dt() })
}
