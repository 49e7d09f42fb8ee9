use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classical::{SolveMode, SolveOptions};
use crate::error::{Error, Result};
use crate::grid::{PhysicalConstants, SpaceGrid, TimeGrid, DEFAULT_ENUMERATION_CAP};
use crate::potential::Potential;
use crate::propagator::GaussianPacket;
use crate::transition::KinematicQuantity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Free,
    Harmonic { omega: f64 },
    Quartic { lambda: f64 },
    Polynomial { coefficients: Vec<f64> },
}

impl PotentialSpec {
    pub fn build(&self, c: &PhysicalConstants) -> Result<Potential> {
        match self {
            PotentialSpec::Free => Ok(Potential::Free),
            PotentialSpec::Harmonic { omega } => Potential::harmonic(*omega, c),
            PotentialSpec::Quartic { lambda } => Potential::quartic(*lambda),
            PotentialSpec::Polynomial { coefficients } => Potential::polynomial(coefficients.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PotentialSpec::Free => "free".into(),
            PotentialSpec::Harmonic { omega } => format!("harmonic(omega={omega})"),
            PotentialSpec::Quartic { lambda } => format!("quartic(lambda={lambda})"),
            PotentialSpec::Polynomial { coefficients } => format!("polynomial({coefficients:?})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub n_slices: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub absorbing_band: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoints {
    pub x1: f64,
    pub x2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Overrides the discretization-scaled default of [`ExperimentConfig::tol_quadratic`].
    pub quadratic: Option<f64>,
    pub evolve_l2: f64,
    pub norm_drift: f64,
    /// Largest share of packet probability allowed outside the inner region.
    pub packet_outer_mass: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { quadratic: None, evolve_l2: 1e-2, norm_drift: 1e-2, packet_outer_mass: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iters: usize,
    pub mode: SolveModeSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveModeSpec {
    Stationary,
    Minimum,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self { tol: d.tol, max_iters: d.max_iters, mode: SolveModeSpec::Stationary }
    }
}

impl SolverSpec {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iters: self.max_iters,
            mode: match self.mode {
                SolveModeSpec::Stationary => SolveMode::Stationary,
                SolveModeSpec::Minimum => SolveMode::Minimum,
            },
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSpec {
    pub magnitude: f64,
    pub trials: usize,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        Self { magnitude: 0.1, trials: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub constants: PhysicalConstants,
    pub potential: PotentialSpec,
    pub time: TimeSpec,
    pub space: SpaceSpec,
    pub endpoints: Endpoints,
    pub quantities: Vec<KinematicQuantity>,
    pub tolerances: Tolerances,
    pub solver: SolverSpec,
    pub output_dir: Option<String>,
    pub seed: u64,
    pub enumeration_cap: u64,
    pub packet: Option<GaussianPacket>,
    pub probe: ProbeSpec,
    pub hbar_scan: Vec<f64>,
    pub convergence_slices: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            constants: PhysicalConstants::natural(),
            potential: PotentialSpec::Free,
            time: TimeSpec { t_start: 0.0, t_end: 1.0, n_slices: 8 },
            space: SpaceSpec { x_min: -7.5, x_max: 8.5, n_points: 1601, absorbing_band: 0.1 },
            endpoints: Endpoints { x1: 0.0, x2: 1.0 },
            quantities: vec![KinematicQuantity::Position, KinematicQuantity::PositionSquared],
            tolerances: Tolerances::default(),
            solver: SolverSpec::default(),
            output_dir: None,
            seed: 0,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            packet: None,
            probe: ProbeSpec::default(),
            hbar_scan: vec![1.0, 0.5, 0.25],
            convergence_slices: vec![16, 32, 64, 128],
        }
    }
}

/// Validated objects built from an [`ExperimentConfig`].
#[derive(Debug, Clone)]
pub struct Setup {
    pub constants: PhysicalConstants,
    pub potential: Potential,
    pub time: TimeGrid,
    pub space: SpaceGrid,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks every module precondition without computing anything.
    pub fn validate(&self) -> Result<Setup> {
        let constants = PhysicalConstants::new(self.constants.hbar, self.constants.mass)?;
        let potential = self.potential.build(&constants)?;
        let time = TimeGrid::new(self.time.t_start, self.time.t_end, self.time.n_slices)?;
        let space = SpaceGrid::new(self.space.x_min, self.space.x_max, self.space.n_points)?
            .with_absorbing_band(self.space.absorbing_band)?;
        space.index_of(self.endpoints.x1)?;
        space.index_of(self.endpoints.x2)?;
        for &h in &self.hbar_scan {
            constants.with_hbar(h)?;
        }
        if self.convergence_slices.contains(&0) {
            return Err(Error::Config("convergence_slices entries must be positive".into()));
        }
        if !(self.probe.magnitude.is_finite() && self.probe.magnitude > 0.0) {
            return Err(Error::Config("probe magnitude must be positive".into()));
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iters == 0 {
            return Err(Error::Config("solver needs a positive tolerance and at least one iteration".into()));
        }
        let t = &self.tolerances;
        if t.quadratic.is_some_and(|q| !(q > 0.0)) || !(t.evolve_l2 > 0.0) || !(t.norm_drift > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if let Some(g) = &self.packet {
            if !(g.sigma0 > 0.0 && g.sigma0.is_finite()) {
                return Err(Error::Config(format!("packet sigma0 must be positive, got {}", g.sigma0)));
            }
            if ![g.x0, g.k0, g.amplitude].iter().all(|v| v.is_finite()) {
                return Err(Error::Config("packet parameters must be finite".into()));
            }
        }
        Ok(Setup { constants, potential, time, space })
    }

    /// `max(10 dt², 10 dx², 1e−8) · max(|x₁|, |x₂|, 1)` unless overridden.
    pub fn tol_quadratic(&self, setup: &Setup) -> f64 {
        self.tolerances.quadratic.unwrap_or_else(|| {
            let dt = setup.time.dt();
            let dx = setup.space.dx();
            let scale = self.endpoints.x1.abs().max(self.endpoints.x2.abs()).max(1.0);
            (10.0 * dt * dt).max(10.0 * dx * dx).max(1e-8) * scale
        })
    }

    /// SHA-256 of the canonical JSON form; the output directory is excluded
    /// so that the same experiment hashes identically wherever it is written.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
