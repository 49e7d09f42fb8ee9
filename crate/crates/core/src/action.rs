//! Discrete action of a lattice path with its exact gradient and Hessian.
//!
//! Each slice contributes `[m/2 ((x_{k+1} − x_k)/dt)² − V((x_k + x_{k+1})/2)] dt`.
//! The potential is sampled at slice midpoints, the same rule the short-time
//! kernel uses, so a path sum of `exp(iS/ħ)` and the product of short-time
//! kernel matrices are the same arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{LatticePath, PhysicalConstants, TimeGrid};
use crate::linalg::SymTridiagonal;
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct ActionValue(pub f64);

impl ActionValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Action of one slice from `a` to `b`.
#[inline]
pub fn slice_action(a: f64, b: f64, dt: f64, p: &Potential, c: &PhysicalConstants) -> f64 {
    let v = (b - a) / dt;
    (0.5 * c.mass * v * v - p.value(0.5 * (a + b))) * dt
}

pub fn discrete_action(
    path: &LatticePath,
    p: &Potential,
    tg: &TimeGrid,
    c: &PhysicalConstants,
) -> Result<ActionValue> {
    path.check_grid(tg)?;
    let dt = tg.dt();
    let s = path
        .positions()
        .windows(2)
        .map(|w| slice_action(w[0], w[1], dt, p, c))
        .sum();
    Ok(ActionValue(s))
}

/// `∂S/∂x_k` for the interior nodes `k = 1..n−1`.
pub fn action_gradient(
    path: &LatticePath,
    p: &Potential,
    tg: &TimeGrid,
    c: &PhysicalConstants,
) -> Result<Vec<f64>> {
    path.check_grid(tg)?;
    if tg.n_slices() < 2 {
        return Err(Error::NoInteriorPoints(tg.n_slices()));
    }
    let dt = tg.dt();
    let m = c.mass;
    let x = path.positions();
    Ok((1..x.len() - 1)
        .map(|k| {
            let kinetic = m * (2.0 * x[k] - x[k - 1] - x[k + 1]) / dt;
            let force = p.derivative(0.5 * (x[k - 1] + x[k])) + p.derivative(0.5 * (x[k] + x[k + 1]));
            kinetic - 0.5 * dt * force
        })
        .collect())
}

/// Exact second derivatives over the interior nodes. Only neighbouring
/// nodes share a slice, so the matrix is tridiagonal.
pub fn action_hessian(
    path: &LatticePath,
    p: &Potential,
    tg: &TimeGrid,
    c: &PhysicalConstants,
) -> Result<SymTridiagonal> {
    path.check_grid(tg)?;
    if tg.n_slices() < 2 {
        return Err(Error::NoInteriorPoints(tg.n_slices()));
    }
    let dt = tg.dt();
    let m = c.mass;
    let x = path.positions();
    // curvature of V at each slice midpoint
    let curv: Vec<f64> = x.windows(2).map(|w| p.second_derivative(0.5 * (w[0] + w[1]))).collect();
    let n_int = x.len() - 2;
    let diag = (1..=n_int)
        .map(|k| 2.0 * m / dt - 0.25 * dt * (curv[k - 1] + curv[k]))
        .collect();
    let off = (1..n_int).map(|k| -m / dt - 0.25 * dt * curv[k]).collect();
    Ok(SymTridiagonal::new(diag, off))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::grid::{enumerate_lattice_paths, SpaceGrid};

    fn nat() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    fn families() -> Vec<Potential> {
        vec![
            Potential::Free,
            Potential::harmonic(1.0, &nat()).unwrap(),
            Potential::quartic(0.1).unwrap(),
            Potential::polynomial(vec![0.3, -0.5, 0.2, 0.1, -0.05]).unwrap(),
        ]
    }

    #[test]
    fn free_straight_line() {
        for n in 1..6 {
            let tg = TimeGrid::new(0.0, 1.0, n).unwrap();
            let path = LatticePath::straight_line(&tg, 0.0, 1.0);
            let s = discrete_action(&path, &Potential::Free, &tg, &nat()).unwrap();
            assert!((s.value() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_path() {
        let tg = TimeGrid::new(0.0, 2.0, 5).unwrap();
        let path = LatticePath::for_grid(&tg, vec![0.7; 6]).unwrap();
        for p in families() {
            let s = discrete_action(&path, &p, &tg, &nat()).unwrap();
            assert!((s.value() + p.value(0.7) * 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn harmonic_four_segments() {
        // hand summation: segments 0→¼→½→¾→1 each with velocity 1 and midpoints ⅛, ⅜, ⅝, ⅞
        let mids = [0.125, 0.375, 0.625, 0.875];
        let expected: f64 = mids.iter().map(|m| (0.5 - 0.5 * m * m) * 0.25).sum();
        assert!((expected - 0.3359375).abs() < 1e-15);
        let tg = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let path = LatticePath::straight_line(&tg, 0.0, 1.0);
        let p = Potential::harmonic(1.0, &nat()).unwrap();
        let s = discrete_action(&path, &p, &tg, &nat()).unwrap();
        assert!((s.value() - 0.3359375).abs() < 1e-15);
    }

    #[test]
    fn mismatched_lengths() {
        let tg = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let other = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let path = LatticePath::straight_line(&other, 0.0, 1.0);
        assert!(matches!(
            discrete_action(&path, &Potential::Free, &tg, &nat()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gradient_needs_interior() {
        let tg = TimeGrid::new(0.0, 1.0, 1).unwrap();
        let path = LatticePath::straight_line(&tg, 0.0, 1.0);
        let err = action_gradient(&path, &Potential::Free, &tg, &nat()).unwrap_err();
        assert!(err.to_string().contains("no interior points"));
        assert!(action_hessian(&path, &Potential::Free, &tg, &nat()).is_err());
    }

    #[test]
    fn free_gradient_examples() {
        let tg = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let line = LatticePath::straight_line(&tg, -0.3, 1.1);
        let g = action_gradient(&line, &Potential::Free, &tg, &nat()).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));

        let delta = 0.01;
        let mut x = line.positions().to_vec();
        x[2] += delta;
        let bumped = LatticePath::for_grid(&tg, x).unwrap();
        let c = PhysicalConstants::new(1.0, 2.0).unwrap();
        let g = action_gradient(&bumped, &Potential::Free, &tg, &c).unwrap();
        assert!((g[1] - 2.0 * 2.0 * delta / tg.dt()).abs() < 1e-12);
    }

    #[test]
    fn free_hessian() {
        let tg = TimeGrid::new(0.0, 1.0, 5).unwrap();
        let path = LatticePath::straight_line(&tg, 0.0, 1.0);
        let c = PhysicalConstants::new(1.0, 3.0).unwrap();
        let h = action_hessian(&path, &Potential::Free, &tg, &c).unwrap();
        assert!(h.diag.iter().all(|d| (d - 2.0 * 3.0 / 0.2).abs() < 1e-12));
        assert!(h.off.iter().all(|o| (o + 3.0 / 0.2).abs() < 1e-12));
    }

    #[test]
    fn harmonic_hessian() {
        // S = Σ m/(2dt) (b − a)² − dt m ω²/8 (a + b)²: d²/da² per slice = m/dt − dt m ω²/4
        let tg = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let omega = 1.7;
        let c = PhysicalConstants::new(1.0, 0.8).unwrap();
        let p = Potential::harmonic(omega, &c).unwrap();
        let path = LatticePath::straight_line(&tg, 0.2, 0.9);
        let h = action_hessian(&path, &p, &tg, &c).unwrap();
        let dt = tg.dt();
        let k = c.mass * omega * omega;
        for d in &h.diag {
            assert!((d - (2.0 * c.mass / dt - 0.5 * dt * k)).abs() < 1e-12);
        }
        for o in &h.off {
            assert!((o - (-c.mass / dt - 0.25 * dt * k)).abs() < 1e-12);
        }
    }

    #[test]
    fn straight_line_minimal_among_lattice_paths() {
        for n_points in 2..=5 {
            for n_slices in 1..=4 {
                let sg = SpaceGrid::new(-1.0, 1.0, n_points).unwrap();
                let tg = TimeGrid::new(0.0, 1.0, n_slices).unwrap();
                let (x1, x2) = (sg.point(0), sg.point(n_points - 1));
                let line = LatticePath::straight_line(&tg, x1, x2);
                let s_line = discrete_action(&line, &Potential::Free, &tg, &nat()).unwrap();
                for path in enumerate_lattice_paths(&sg, &tg, x1, x2, 10_000).unwrap() {
                    let s = discrete_action(&path, &Potential::Free, &tg, &nat()).unwrap();
                    let same = path
                        .positions()
                        .iter()
                        .zip(line.positions())
                        .all(|(a, b)| (a - b).abs() < 1e-12);
                    if same {
                        assert!((s.value() - s_line.value()).abs() < 1e-12);
                    } else {
                        assert!(s.value() > s_line.value(), "{path:?}");
                    }
                }
            }
        }
    }

    fn path_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-2.0f64..2.0, n + 1)
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(x in path_strategy(6)) {
            let tg = TimeGrid::new(0.0, 1.5, 6).unwrap();
            for p in families() {
                let path = LatticePath::for_grid(&tg, x.clone()).unwrap();
                let g = action_gradient(&path, &p, &tg, &nat()).unwrap();
                let h = 1e-6;
                for k in 1..6 {
                    let mut up = x.clone();
                    let mut dn = x.clone();
                    up[k] += h;
                    dn[k] -= h;
                    let su = discrete_action(&LatticePath::for_grid(&tg, up).unwrap(), &p, &tg, &nat()).unwrap();
                    let sd = discrete_action(&LatticePath::for_grid(&tg, dn).unwrap(), &p, &tg, &nat()).unwrap();
                    let fd = (su.value() - sd.value()) / (2.0 * h);
                    let err = (fd - g[k - 1]).abs() / g[k - 1].abs().max(1.0);
                    prop_assert!(err < 1e-6, "{p:?} k={k}: {fd} vs {}", g[k - 1]);
                }
            }
        }

        #[test]
        fn hessian_matches_finite_differences(x in path_strategy(5)) {
            let tg = TimeGrid::new(0.0, 1.0, 5).unwrap();
            for p in families() {
                let path = LatticePath::for_grid(&tg, x.clone()).unwrap();
                let hess = action_hessian(&path, &p, &tg, &nat()).unwrap();
                let h = 1e-5;
                for j in 1..5 {
                    let mut up = x.clone();
                    let mut dn = x.clone();
                    up[j] += h;
                    dn[j] -= h;
                    let gu = action_gradient(&LatticePath::for_grid(&tg, up).unwrap(), &p, &tg, &nat()).unwrap();
                    let gd = action_gradient(&LatticePath::for_grid(&tg, dn).unwrap(), &p, &tg, &nat()).unwrap();
                    for i in 1..5 {
                        let fd = (gu[i - 1] - gd[i - 1]) / (2.0 * h);
                        let exact = hess.get(i - 1, j - 1);
                        prop_assert!((fd - exact).abs() / exact.abs().max(1.0) < 1e-5);
                    }
                }
            }
        }

        #[test]
        fn free_translation_invariance(x in path_strategy(4), shift in -5.0f64..5.0) {
            let tg = TimeGrid::new(0.0, 1.0, 4).unwrap();
            let a = LatticePath::for_grid(&tg, x.clone()).unwrap();
            let b = LatticePath::for_grid(&tg, x.iter().map(|v| v + shift).collect()).unwrap();
            let sa = discrete_action(&a, &Potential::Free, &tg, &nat()).unwrap().value();
            let sb = discrete_action(&b, &Potential::Free, &tg, &nat()).unwrap().value();
            prop_assert!((sa - sb).abs() < 1e-12 * sa.abs().max(1.0));
        }
    }
}
