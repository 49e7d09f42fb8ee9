//! Transition quantities `⟨f(τ)⟩`: the path sum of `f(x(τ)) exp(iS/ħ)` with
//! both endpoints held fixed.
//!
//! Grouping the lattice paths by their position `y` at the interior node `τ`
//! turns the path sum into `Σ_y K(x₂, y) f(y) K(y, x₁) w(y)`; that is the
//! insertion route. The brute-force route enumerates the paths directly and
//! serves as its oracle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{LatticePath, PhysicalConstants, SpaceGrid, TimeGrid};
use crate::potential::Potential;
use crate::propagator::{weighted_path_sum, SliceOperator};

/// A classical quantity that depends on the coordinate only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KinematicQuantity {
    Position,
    PositionSquared,
    PotentialEnergy,
    Polynomial(Vec<f64>),
}

impl KinematicQuantity {
    pub fn unit() -> Self {
        KinematicQuantity::Polynomial(vec![1.0])
    }

    pub fn eval(&self, x: f64, p: &Potential) -> f64 {
        match self {
            KinematicQuantity::Position => x,
            KinematicQuantity::PositionSquared => x * x,
            KinematicQuantity::PotentialEnergy => p.value(x),
            KinematicQuantity::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck),
        }
    }

    pub fn name(&self) -> String {
        match self {
            KinematicQuantity::Position => "position".into(),
            KinematicQuantity::PositionSquared => "position_squared".into(),
            KinematicQuantity::PotentialEnergy => "potential_energy".into(),
            KinematicQuantity::Polynomial(c) => {
                let terms: Vec<String> = c.iter().map(|v| format!("{v}")).collect();
                format!("polynomial({})", terms.join(";"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionProvenance {
    Insertion,
    BruteForce,
}

/// `⟨f(τ_k)⟩` at every interior node for one pair of endpoints.
#[derive(Debug, Clone)]
pub struct TransitionQuantity {
    pub quantity: KinematicQuantity,
    pub x1: f64,
    pub x2: f64,
    /// Interior node times `τ_1 … τ_{n−1}`.
    pub times: Vec<f64>,
    pub samples: Vec<Complex64>,
    pub kernel_value: Complex64,
    pub provenance: TransitionProvenance,
}

impl TransitionQuantity {
    /// `R_f(τ) = ⟨f(τ)⟩ / K`.
    pub fn normalized(&self) -> Vec<Complex64> {
        self.samples.iter().map(|s| s / self.kernel_value).collect()
    }
}

fn check_tau(tau_index: usize, tg: &TimeGrid) -> Result<()> {
    if tau_index == 0 || tau_index >= tg.n_slices() {
        return Err(Error::TauNotInterior { index: tau_index, n_slices: tg.n_slices() });
    }
    Ok(())
}

/// Forward columns from `x₁` and backward rows into `x₂` for all slice counts.
struct Sweeps {
    weights: Vec<f64>,
    forward: Vec<Vec<Complex64>>,
    backward: Vec<Vec<Complex64>>,
    i2: usize,
}

impl Sweeps {
    fn new(
        sg: &SpaceGrid,
        tg: &TimeGrid,
        p: &Potential,
        c: &PhysicalConstants,
        x1: f64,
        x2: f64,
    ) -> Result<Self> {
        let i1 = sg.index_of(x1)?;
        let i2 = sg.index_of(x2)?;
        let op = SliceOperator::new(sg, tg.dt(), p, c)?;
        let n = tg.n_slices();
        Ok(Self {
            weights: op.weights().to_vec(),
            forward: op.propagate_from(i1, n),
            backward: op.propagate_to(i2, n.saturating_sub(1)),
            i2,
        })
    }

    /// `K(x₂, x₁)` as the last forward column evaluated at `x₂`.
    fn kernel(&self) -> Complex64 {
        self.forward.last().unwrap()[self.i2]
    }

    /// `Σ_y K(x₂, t₂; y, τ_k) g(y) K(y, τ_k; x₁, t₁) w(y)`.
    fn insert(&self, k: usize, values: &[f64]) -> Complex64 {
        let n = self.forward.len();
        let fwd = &self.forward[k - 1];
        let bwd = &self.backward[n - k - 1];
        fwd.iter()
            .zip(bwd)
            .zip(&self.weights)
            .zip(values)
            .map(|(((a, b), &w), &g)| a * b * (w * g))
            .sum()
    }

    /// Share of `Σ_y |K(x₂; y) K(y; x₁)| w(y)` carried by the outer bands.
    fn outer_share(&self, k: usize, sg: &SpaceGrid) -> f64 {
        let n = self.forward.len();
        let (mut outer, mut total) = (0.0, 0.0);
        for (i, ((a, b), &w)) in self.forward[k - 1].iter().zip(&self.backward[n - k - 1]).zip(&self.weights).enumerate() {
            let m = (a * b).norm() * w;
            total += m;
            if sg.in_outer_band(i) {
                outer += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outer / total
        }
    }
}

pub fn transition_quantity_insertion(
    f: &KinematicQuantity,
    tau_index: usize,
    x1: f64,
    x2: f64,
    sg: &SpaceGrid,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
) -> Result<Complex64> {
    check_tau(tau_index, tg)?;
    let sweeps = Sweeps::new(sg, tg, p, c, x1, x2)?;
    let values: Vec<f64> = sg.points().iter().map(|&y| f.eval(y, p)).collect();
    Ok(sweeps.insert(tau_index, &values))
}

pub fn transition_quantity_brute_force(
    f: &KinematicQuantity,
    tau_index: usize,
    x1: f64,
    x2: f64,
    sg: &SpaceGrid,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
    cap: u64,
) -> Result<Complex64> {
    check_tau(tau_index, tg)?;
    weighted_path_sum(sg, tg, p, c, x1, x2, cap, |path: &LatticePath| {
        f.eval(path.positions()[tau_index], p)
    })
}

/// `⟨f(τ_k)⟩` for every interior node by insertion, with `K(x₂, x₁)` attached.
pub fn transition_quantity(
    f: &KinematicQuantity,
    x1: f64,
    x2: f64,
    sg: &SpaceGrid,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
) -> Result<TransitionQuantity> {
    Ok(transition_quantities(std::slice::from_ref(f), x1, x2, sg, tg, p, c)?.remove(0))
}

/// Several quantities sharing one pair of forward/backward sweeps.
pub fn transition_quantities(
    fs: &[KinematicQuantity],
    x1: f64,
    x2: f64,
    sg: &SpaceGrid,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
) -> Result<Vec<TransitionQuantity>> {
    let sweeps = Sweeps::new(sg, tg, p, c, x1, x2)?;
    let kernel_value = sweeps.kernel();
    let points = sg.points();
    let times: Vec<f64> = (1..tg.n_slices()).map(|k| tg.node(k)).collect();
    Ok(fs
        .iter()
        .map(|f| {
            let values: Vec<f64> = points.iter().map(|&y| f.eval(y, p)).collect();
            TransitionQuantity {
                quantity: f.clone(),
                x1,
                x2,
                times: times.clone(),
                samples: (1..tg.n_slices()).map(|k| sweeps.insert(k, &values)).collect(),
                kernel_value,
                provenance: TransitionProvenance::Insertion,
            }
        })
        .collect())
}

/// Largest share, over interior nodes, of the insertion integrand's modulus
/// that sits in the outer bands of the domain.
pub fn transition_edge_leak(
    x1: f64,
    x2: f64,
    sg: &SpaceGrid,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
) -> Result<f64> {
    let sweeps = Sweeps::new(sg, tg, p, c, x1, x2)?;
    Ok((1..tg.n_slices()).map(|k| sweeps.outer_share(k, sg)).fold(0.0, f64::max))
}

/// Brute-force counterpart of [`transition_quantity`] for enumerable grids.
pub fn transition_quantity_enumerated(
    f: &KinematicQuantity,
    x1: f64,
    x2: f64,
    sg: &SpaceGrid,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
    cap: u64,
) -> Result<TransitionQuantity> {
    let samples = (1..tg.n_slices())
        .map(|k| transition_quantity_brute_force(f, k, x1, x2, sg, tg, p, c, cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionQuantity {
        quantity: f.clone(),
        x1,
        x2,
        times: (1..tg.n_slices()).map(|k| tg.node(k)).collect(),
        samples,
        kernel_value: crate::propagator::brute_force_kernel(sg, tg, p, c, x1, x2, cap)?,
        provenance: TransitionProvenance::BruteForce,
    })
}

/// `⟨x(τ)⟩` at every interior node.
pub fn transition_coordinate_path(
    x1: f64,
    x2: f64,
    sg: &SpaceGrid,
    tg: &TimeGrid,
    p: &Potential,
    c: &PhysicalConstants,
) -> Result<TransitionQuantity> {
    transition_quantity(&KinematicQuantity::Position, x1, x2, sg, tg, p, c)
}

/// Modulus per node and continuously unwrapped phase. A zero sample has no
/// phase (`None`); continuation resumes from the last defined value.
pub fn modulus_and_phase(samples: &[Complex64]) -> (Vec<f64>, Vec<Option<f64>>) {
    let moduli = samples.iter().map(|z| z.norm()).collect();
    let mut phases = Vec::with_capacity(samples.len());
    let mut previous: Option<f64> = None;
    for z in samples {
        if z.norm() == 0.0 {
            phases.push(None);
            continue;
        }
        let raw = z.arg();
        let phase = match previous {
            None => raw,
            Some(prev) => prev + wrap_to_pi(raw - prev),
        };
        previous = Some(phase);
        phases.push(Some(phase));
    }
    (moduli, phases)
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_to_pi(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

pub fn transition_modulus_and_phase(tq: &TransitionQuantity) -> (Vec<f64>, Vec<Option<f64>>) {
    modulus_and_phase(&tq.samples)
}

/// `δ[a − b]`: 1 when the two paths coincide node by node, else 0.
pub fn path_delta(a: &LatticePath, b: &LatticePath) -> Result<u8> {
    if a.positions().len() != b.positions().len() {
        return Err(Error::GridMismatch(format!(
            "paths have {} and {} nodes",
            a.positions().len(),
            b.positions().len()
        )));
    }
    Ok(u8::from(a.positions() == b.positions()))
}
