//! Lattices, constants and virtual paths shared by every other module.
//!
//! Everything here is immutable after construction. A [`SpaceGrid`] carries
//! its own quadrature weights: the trapezoid rule, optionally multiplied by a
//! smooth absorbing taper in the outer bands of the domain (see
//! [`SpaceGrid::with_absorbing_band`]).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of lattice paths an enumeration may yield.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Fraction of the domain that counts as "inner" for the truncation policy.
pub const INNER_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidConstants(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidConstants(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// Natural units, hbar = m = 1.
    pub fn natural() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        Self::new(hbar, self.mass)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

/// Uniform partition of `[t_start, t_end]` into `n_slices` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_slices: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_slices: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) || t_end <= t_start {
            return Err(Error::NonPositiveInterval { t_start, t_end });
        }
        if n_slices == 0 {
            return Err(Error::InvalidGrid("n_slices must be at least 1".into()));
        }
        Ok(Self {
            t_start,
            t_end,
            n_slices,
            dt: (t_end - t_start) / n_slices as f64,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Time of node `k`; the last node is `t_end` exactly.
    pub fn node(&self, k: usize) -> f64 {
        if k >= self.n_slices {
            self.t_end
        } else {
            self.t_start + k as f64 * self.dt
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_slices).map(|k| self.node(k)).collect()
    }

    /// Grid over `[t_start, node(k)]` with the first `k` slices.
    pub fn head(&self, k: usize) -> Result<Self> {
        Self::new(self.t_start, self.node(k), k)
    }
}

/// Uniform spatial lattice `x_min = x_0 < ... < x_{n-1} = x_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dx: f64,
    absorbing_band: f64,
}

impl SpaceGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!("x_max ({x_max}) must exceed x_min ({x_min})")));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!("n_points must be at least 2, got {n_points}")));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
            dx: (x_max - x_min) / (n_points - 1) as f64,
            absorbing_band: 0.0,
        })
    }

    /// Multiplies the quadrature weights by `sin²(π d / 2b)` where `d` is the
    /// distance to the nearer edge and `b = band · (x_max − x_min)`.
    ///
    /// Point-to-point path sums do not decay towards the boundary, so a hard
    /// cut leaves Fresnel edge terms in every intermediate integral; the taper
    /// removes them. `band = 0` is the plain trapezoid rule.
    pub fn with_absorbing_band(mut self, band: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&band) {
            return Err(Error::InvalidGrid(format!("absorbing band must be in [0, 0.5), got {band}")));
        }
        self.absorbing_band = band;
        Ok(self)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn absorbing_band(&self) -> f64 {
        self.absorbing_band
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    pub fn weight(&self, i: usize) -> f64 {
        let trapezoid = if i == 0 || i + 1 == self.n_points {
            0.5 * self.dx
        } else {
            self.dx
        };
        trapezoid * self.taper(self.point(i))
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.weight(i)).collect()
    }

    fn taper(&self, x: f64) -> f64 {
        if self.absorbing_band == 0.0 {
            return 1.0;
        }
        let band = self.absorbing_band * self.width();
        let d = (x - self.x_min).min(self.x_max - x).max(0.0);
        if d >= band {
            1.0
        } else {
            (FRAC_PI_2 * d / band).sin().powi(2)
        }
    }

    /// Index of the grid point equal to `x` (to within 1e-9 dx).
    pub fn index_of(&self, x: f64) -> Result<usize> {
        let pos = (x - self.x_min) / self.dx;
        let i = pos.round();
        if !(0.0..self.n_points as f64).contains(&i) || (pos - i).abs() > 1e-9 {
            let clamped = i.clamp(0.0, (self.n_points - 1) as f64) as usize;
            return Err(Error::NotAGridPoint { x, nearest: self.point(clamped) });
        }
        Ok(i as usize)
    }

    /// Whether `x` lies inside the inner [`INNER_FRACTION`] of the domain.
    pub fn in_inner_region(&self, x: f64) -> bool {
        let margin = 0.5 * (1.0 - INNER_FRACTION) * self.width();
        x >= self.x_min + margin && x <= self.x_max - margin
    }

    /// Whether grid point `i` lies in one of the two outer bands that together
    /// make up the complement of the inner region.
    pub fn in_outer_band(&self, i: usize) -> bool {
        !self.in_inner_region(self.point(i))
    }

    pub fn same_lattice(&self, other: &SpaceGrid) -> bool {
        self == other
    }
}

/// One virtual path: a position per time node with fixed endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePath {
    positions: Vec<f64>,
}

impl LatticePath {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::LengthMismatch { expected: 2, got: positions.len() });
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("path positions must be finite".into()));
        }
        Ok(Self { positions })
    }

    /// Path with exactly `tg.n_slices() + 1` positions.
    pub fn for_grid(tg: &TimeGrid, positions: Vec<f64>) -> Result<Self> {
        if positions.len() != tg.n_slices() + 1 {
            return Err(Error::LengthMismatch { expected: tg.n_slices() + 1, got: positions.len() });
        }
        Self::new(positions)
    }

    pub fn straight_line(tg: &TimeGrid, x1: f64, x2: f64) -> Self {
        let n = tg.n_slices();
        let positions = (0..=n)
            .map(|k| match k {
                0 => x1,
                k if k == n => x2,
                k => x1 + (x2 - x1) * k as f64 / n as f64,
            })
            .collect();
        Self { positions }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn n_slices(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.positions[0]
    }

    pub fn end(&self) -> f64 {
        self.positions[self.positions.len() - 1]
    }

    pub fn interior(&self) -> &[f64] {
        &self.positions[1..self.positions.len() - 1]
    }

    /// Replaces the interior positions, keeping both endpoints.
    pub fn with_interior(&self, interior: &[f64]) -> Result<Self> {
        let n_int = self.positions.len() - 2;
        if interior.len() != n_int {
            return Err(Error::LengthMismatch { expected: n_int, got: interior.len() });
        }
        let mut positions = self.positions.clone();
        positions[1..=n_int].copy_from_slice(interior);
        Self::new(positions)
    }

    pub fn within(&self, sg: &SpaceGrid, margin: f64) -> bool {
        self.positions
            .iter()
            .all(|&x| x >= sg.x_min() - margin && x <= sg.x_max() + margin)
    }

    pub(crate) fn check_grid(&self, tg: &TimeGrid) -> Result<()> {
        if self.positions.len() != tg.n_slices() + 1 {
            return Err(Error::LengthMismatch { expected: tg.n_slices() + 1, got: self.positions.len() });
        }
        Ok(())
    }
}

/// Number of lattice paths with fixed endpoints, `n_points^(n_slices - 1)`.
pub fn lattice_path_count(n_points: usize, n_slices: usize) -> u128 {
    let interior = n_slices.saturating_sub(1) as u32;
    (n_points as u128).checked_pow(interior).unwrap_or(u128::MAX)
}

/// Exhaustive iterator over every lattice path between two grid points.
///
/// Interior slices run through the grid like an odometer with the last slice
/// varying fastest. A run can be restricted to a fixed first interior index
/// so that enumeration can be split across workers.
#[derive(Debug, Clone)]
pub struct LatticePaths {
    grid: SpaceGrid,
    start: usize,
    end: usize,
    counters: Vec<usize>,
    fixed_first: Option<usize>,
    done: bool,
}

impl LatticePaths {
    pub fn total(&self) -> u128 {
        let free = match self.fixed_first {
            Some(_) => self.counters.len().saturating_sub(1),
            None => self.counters.len(),
        };
        (self.grid.n_points() as u128).pow(free as u32)
    }

    pub fn endpoint_indices(&self) -> (usize, usize) {
        (self.start, self.end)
    }

    /// Splits the enumeration by the index of the first interior slice.
    /// Yields a single part when there are no interior slices.
    pub fn partition_by_prefix(&self) -> Vec<LatticePaths> {
        if self.counters.is_empty() || self.fixed_first.is_some() {
            return vec![self.clone()];
        }
        (0..self.grid.n_points())
            .map(|first| {
                let mut part = self.clone();
                part.counters.iter_mut().for_each(|c| *c = 0);
                part.counters[0] = first;
                part.fixed_first = Some(first);
                part.done = false;
                part
            })
            .collect()
    }

    /// Advances and returns the full index vector of the next path
    /// (endpoints included) without allocating a [`LatticePath`].
    pub fn next_indices(&mut self, buf: &mut Vec<usize>) -> bool {
        if self.done {
            return false;
        }
        buf.clear();
        buf.push(self.start);
        buf.extend_from_slice(&self.counters);
        buf.push(self.end);
        self.advance();
        true
    }

    fn advance(&mut self) {
        let n = self.grid.n_points();
        let lowest = usize::from(self.fixed_first.is_some());
        let mut slot = self.counters.len();
        loop {
            if slot == lowest {
                self.done = true;
                return;
            }
            slot -= 1;
            self.counters[slot] += 1;
            if self.counters[slot] < n {
                return;
            }
            self.counters[slot] = 0;
        }
    }
}

impl Iterator for LatticePaths {
    type Item = LatticePath;

    fn next(&mut self) -> Option<LatticePath> {
        let mut idx = Vec::with_capacity(self.counters.len() + 2);
        if !self.next_indices(&mut idx) {
            return None;
        }
        let positions = idx.iter().map(|&i| self.grid.point(i)).collect();
        Some(LatticePath { positions })
    }
}

/// Every lattice path from grid point `x1` at `t_start` to grid point `x2` at
/// `t_end`; fails if the path count exceeds `cap`.
pub fn enumerate_lattice_paths(
    sg: &SpaceGrid,
    tg: &TimeGrid,
    x1: f64,
    x2: f64,
    cap: u64,
) -> Result<LatticePaths> {
    let start = sg.index_of(x1)?;
    let end = sg.index_of(x2)?;
    let count = lattice_path_count(sg.n_points(), tg.n_slices());
    if count > cap as u128 {
        return Err(Error::EnumerationCap { count, cap });
    }
    Ok(LatticePaths {
        grid: sg.clone(),
        start,
        end,
        counters: vec![0; tg.n_slices() - 1],
        fixed_first: None,
        done: false,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn time_grid_step() {
        let tg = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert_eq!(tg.dt(), 0.25);
        assert_eq!(tg.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn minimal_time_grid() {
        let tg = TimeGrid::new(0.0, 1.0, 1).unwrap();
        assert_eq!(tg.nodes(), vec![0.0, 1.0]);
    }

    #[test]
    fn reversed_interval_rejected() {
        let err = TimeGrid::new(1.0, 0.0, 4).unwrap_err();
        assert!(err.to_string().contains("non-positive interval"));
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn last_node_is_exact() {
        let tg = TimeGrid::new(0.1, 0.7, 3).unwrap();
        assert_eq!(tg.node(3), 0.7);
        assert!((tg.dt() * 3.0 - 0.6).abs() < 1e-15);
    }

    #[test]
    fn space_grid_validation() {
        assert!(SpaceGrid::new(1.0, 1.0, 5).is_err());
        assert!(SpaceGrid::new(0.0, 1.0, 1).is_err());
        let sg = SpaceGrid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(sg.dx(), 0.5);
        assert_eq!(sg.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(sg.weights(), vec![0.25, 0.5, 0.5, 0.5, 0.25]);
        assert_eq!(sg.index_of(0.5).unwrap(), 3);
        assert!(matches!(sg.index_of(0.3), Err(Error::NotAGridPoint { .. })));
        assert!(sg.index_of(2.0).is_err());
    }

    #[test]
    fn absorbing_band_tapers_edges_only() {
        let sg = SpaceGrid::new(-5.0, 5.0, 101).unwrap().with_absorbing_band(0.1).unwrap();
        let w = sg.weights();
        assert_eq!(w[0], 0.0);
        assert_eq!(w[100], 0.0);
        assert_eq!(w[50], sg.dx());
        assert_eq!(w[10], sg.dx());
        assert!(w[5] > 0.0 && w[5] < sg.dx());
        assert!(SpaceGrid::new(0.0, 1.0, 3).unwrap().with_absorbing_band(0.5).is_err());
    }

    #[test]
    fn inner_region() {
        let sg = SpaceGrid::new(-5.0, 5.0, 11).unwrap();
        assert!(sg.in_inner_region(0.0));
        assert!(sg.in_inner_region(4.0));
        assert!(!sg.in_inner_region(4.5));
        assert!(sg.in_outer_band(0));
        assert!(!sg.in_outer_band(5));
    }

    #[test]
    fn enumeration_counts() {
        let tg2 = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let tg1 = TimeGrid::new(0.0, 1.0, 1).unwrap();
        let tg3 = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let sg3 = SpaceGrid::new(-1.0, 1.0, 3).unwrap();
        let sg5 = SpaceGrid::new(-1.0, 1.0, 5).unwrap();
        let count = |sg: &SpaceGrid, tg: &TimeGrid| {
            enumerate_lattice_paths(sg, tg, 0.0, 0.5_f64.min(sg.x_max()), 100).map(|p| p.total())
        };
        assert_eq!(enumerate_lattice_paths(&sg3, &tg2, 0.0, 1.0, 100).unwrap().total(), 3);
        assert_eq!(enumerate_lattice_paths(&sg3, &tg1, 0.0, 1.0, 100).unwrap().total(), 1);
        assert_eq!(count(&sg5, &tg3).unwrap(), 25);
    }

    #[test]
    fn single_slice_path_is_endpoint_pair() {
        let tg = TimeGrid::new(0.0, 1.0, 1).unwrap();
        let sg = SpaceGrid::new(-1.0, 1.0, 3).unwrap();
        let paths: Vec<_> = enumerate_lattice_paths(&sg, &tg, -1.0, 1.0, 10).unwrap().collect();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].positions(), &[-1.0, 1.0]);
    }

    #[test]
    fn cap_is_enforced() {
        let tg = TimeGrid::new(0.0, 1.0, 5).unwrap();
        let sg = SpaceGrid::new(-1.0, 1.0, 7).unwrap();
        let err = enumerate_lattice_paths(&sg, &tg, 0.0, 0.0, 1000).unwrap_err();
        match err {
            Error::EnumerationCap { count, cap } => {
                assert_eq!(count, 2401);
                assert_eq!(cap, 1000);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn enumeration_is_exhaustive_and_unique() {
        for n_points in 2..=7 {
            for n_slices in 1..=5 {
                let sg = SpaceGrid::new(0.0, 1.0, n_points).unwrap();
                let tg = TimeGrid::new(0.0, 1.0, n_slices).unwrap();
                let paths = enumerate_lattice_paths(&sg, &tg, 0.0, 1.0, DEFAULT_ENUMERATION_CAP).unwrap();
                let expected = paths.total();
                let mut seen = HashSet::new();
                for p in paths {
                    assert_eq!(p.start(), 0.0);
                    assert_eq!(p.end(), 1.0);
                    assert_eq!(p.positions().len(), n_slices + 1);
                    let key: Vec<u64> = p.positions().iter().map(|x| x.to_bits()).collect();
                    assert!(seen.insert(key));
                }
                assert_eq!(seen.len() as u128, expected);
                assert_eq!(expected, lattice_path_count(n_points, n_slices));
                assert_eq!(expected, (n_points as u128).pow(n_slices as u32 - 1));
            }
        }
    }

    #[test]
    fn partition_covers_enumeration() {
        let sg = SpaceGrid::new(0.0, 1.0, 4).unwrap();
        let tg = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let all = enumerate_lattice_paths(&sg, &tg, 0.0, 1.0, 1000).unwrap();
        let whole: Vec<_> = all.clone().collect();
        let parts: Vec<_> = all.partition_by_prefix().into_iter().flat_map(|p| p.collect::<Vec<_>>()).collect();
        assert_eq!(whole, parts);
    }

    #[test]
    fn straight_line_endpoints_exact() {
        let tg = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let p = LatticePath::straight_line(&tg, 0.1, 0.7);
        assert_eq!(p.start(), 0.1);
        assert_eq!(p.end(), 0.7);
        assert!(LatticePath::for_grid(&tg, vec![0.0; 3]).is_err());
    }
}
