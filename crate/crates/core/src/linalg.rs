//! Small dense complex matrices and symmetric tridiagonal solvers.

use num_complex::Complex64;
use rayon::prelude::*;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex64 + Sync) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); rows * cols];
        data.par_chunks_mut(cols.max(1)).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// `self · diag(weights) · rhs`. Rows are computed in parallel, each with
    /// a fixed summation order, so results do not depend on the thread count.
    pub fn weighted_product(&self, weights: &[f64], rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        assert_eq!(weights.len(), self.cols, "weight length differs");
        let n = rhs.cols;
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows * n];
        out.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, orow)| {
            let arow = self.row(i);
            for (k, (&a, &w)) in arow.iter().zip(weights).enumerate() {
                if w == 0.0 {
                    continue;
                }
                let aw = a * w;
                for (o, &b) in orow.iter_mut().zip(rhs.row(k)) {
                    *o += aw * b;
                }
            }
        });
        CMatrix { rows: self.rows, cols: n, data: out }
    }

    /// `self · diag(weights) · v`.
    pub fn weighted_apply(&self, weights: &[f64], v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .into_par_iter()
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(weights)
                    .zip(v)
                    .fold(Complex64::new(0.0, 0.0), |acc, ((&a, &w), &x)| acc + a * (x * w))
            })
            .collect()
    }

    /// `vᵀ · diag(weights) · self`.
    pub fn weighted_apply_left(&self, weights: &[f64], v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (k, (&x, &w)) in v.iter().zip(weights).enumerate() {
            if w == 0.0 {
                continue;
            }
            let xw = x * w;
            for (o, &a) in out.iter_mut().zip(self.row(k)) {
                *o += xw * a;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples `i` and `i + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.apply(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Thomas algorithm. Returns `None` when a pivot vanishes.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.dim();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return Some(Vec::new());
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot == 0.0 || !pivot.is_finite() {
            return None;
        }
        d[0] = rhs[0] / pivot;
        if n > 1 {
            c[0] = self.off[0] / pivot;
        }
        for i in 1..n {
            pivot = self.diag[i] - self.off[i - 1] * c[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            if i + 1 < n {
                c[i] = self.off[i] / pivot;
            }
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Some(d)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let b2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
            if q == 0.0 {
                q = f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin bounds on the spectrum.
    pub fn spectrum_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Smallest eigenvalue by bisection on the Sturm count.
    pub fn smallest_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return f64::NAN;
        }
        let (mut lo, mut hi) = self.spectrum_bounds();
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// LDLᵀ pivots; all positive iff the matrix is positive definite.
    pub fn is_positive_definite(&self) -> bool {
        let mut pivot = 0.0;
        for i in 0..self.dim() {
            pivot = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.off[i - 1] * self.off[i - 1] / pivot
            };
            if !(pivot > 0.0) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_laplacian() {
        let n = 6;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
        let b = t.apply(&x);
        let y = t.solve(&b).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_spectrum() {
        let n = 9;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]);
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((t.smallest_eigenvalue() - exact).abs() < 1e-12);
        assert!(t.is_positive_definite());
        let shifted = SymTridiagonal::new(vec![2.0 - 0.5; n], vec![-1.0; n - 1]);
        assert!(!shifted.is_positive_definite());
        assert!(shifted.smallest_eigenvalue() < 0.0);
        assert_eq!(shifted.count_below(0.0), 2);
    }

    #[test]
    fn singular_pivot_detected() {
        let t = SymTridiagonal::new(vec![1.0, 1.0], vec![1.0]);
        assert!(t.solve(&[1.0, 1.0]).is_none());
    }

    #[test]
    fn weighted_products_agree() {
        let a = CMatrix::from_fn(3, 3, |i, j| Complex64::new(i as f64 + 1.0, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 2, |i, j| Complex64::new((i * j) as f64, 1.0));
        let w = [0.5, 1.0, 2.0];
        let ab = a.weighted_product(&w, &b);
        for j in 0..2 {
            let col = a.weighted_apply(&w, &b.column(j));
            for (i, c) in col.iter().enumerate() {
                assert!((ab.get(i, j) - c).norm() < 1e-14);
            }
        }
        let v = [Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0), Complex64::new(3.0, 0.0)];
        let left = a.weighted_apply_left(&w, &v);
        for (j, l) in left.iter().enumerate() {
            let direct: Complex64 = (0..3).map(|k| v[k] * w[k] * a.get(k, j)).sum();
            assert!((l - direct).norm() < 1e-14);
        }
    }
}
