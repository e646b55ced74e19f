//! Stable double-precision evaluation of oscillator eigenfunctions and their
//! Wronskian-deformed counterparts, used by every spectral sum.
//!
//! High orders are reached through the normalized recurrence
//! `h̃_{n+1} = (x·h̃_n − √n·h̃_{n−1})/√(n+1)` with `h̃_n = He_n/√(n!)`, whose
//! values stay O(1); Wronskians of normalized columns are evaluated as small
//! complex determinants per point instead of through exact coefficients,
//! which would overflow `f64` near n ≈ 200.

use crate::poly::TWO_PI;
use crate::wronskian::LevelSequence;
use num_complex::Complex64;

/// `h̃_0(x) … h̃_{n_max}(x)` with `h̃_n = He_n/√(n!)`.
pub fn hermite_tilde_row(x: Complex64, n_max: u32) -> Vec<Complex64> {
    let mut row = Vec::with_capacity(n_max as usize + 1);
    row.push(Complex64::new(1.0, 0.0));
    if n_max == 0 {
        return row;
    }
    row.push(x);
    for n in 1..n_max {
        let nf = n as f64;
        let next = (x * row[n as usize] - nf.sqrt() * row[n as usize - 1])
            / (nf + 1.0).sqrt();
        row.push(next);
    }
    row
}

/// Oscillator eigenfunctions `ψ_n(x) = (2π)^{-1/4}·e^{-x²/4}·h̃_n(x)` for
/// `n = 0 … n_max`.
pub fn psi_row(x: Complex64, n_max: u32) -> Vec<Complex64> {
    let gauss = (-x * x / 4.0).exp() * TWO_PI.powf(-0.25);
    hermite_tilde_row(x, n_max)
        .into_iter()
        .map(|h| h * gauss)
        .collect()
}

/// `√(l·(l−1)·…·(l−k+1))`, the derivative ladder factor of `h̃_l`; zero when
/// `k > l`.
fn falling_sqrt(l: u32, k: u32) -> f64 {
    if k > l {
        return 0.0;
    }
    let mut p = 1.0f64;
    for i in 0..k {
        p *= (l - i) as f64;
    }
    p.sqrt()
}

/// Determinant of a small complex matrix by Gaussian elimination with
/// partial pivoting. Consumes the matrix.
pub fn complex_det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| {
                a[i][k]
                    .norm_sqr()
                    .partial_cmp(&a[j][k].norm_sqr())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty range");
        if a[pivot][k].norm_sqr() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != k {
            a.swap(pivot, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let sub = f * a[k][j];
                a[i][j] -= sub;
            }
        }
    }
    det
}

/// Per-point data for evaluating σ-deformed eigenfunctions: the normalized
/// Hermite row, the Gaussian weight, and the σ-Wronskian determinant.
pub struct SigmaPoint {
    ht: Vec<Complex64>,
    gauss_quarter: Complex64,
    d_sigma: Complex64,
}

impl SigmaPoint {
    /// The normalized σ-Wronskian determinant at this point.
    pub fn d_sigma(&self) -> Complex64 {
        self.d_sigma
    }
}

/// Evaluator for the eigenfunctions of the σ-deformed oscillator,
/// `ψ_n^σ(x) = N_n·(2π)^{-1/4}·e^{-x²/4}·D̃_{σ∪n}(x)/D̃_σ(x)`,
/// where `D̃` are Wronskian determinants of normalized Hermite columns.
pub struct SigmaEigen {
    levels: Vec<u32>,
}

impl SigmaEigen {
    pub fn new(sigma: &LevelSequence) -> Self {
        SigmaEigen {
            levels: sigma.levels().to_vec(),
        }
    }

    /// Precomputes everything needed at `x` for eigenfunction indices up to
    /// `n_max`.
    pub fn prepare(&self, x: Complex64, n_max: u32) -> SigmaPoint {
        let top = self
            .levels
            .iter()
            .copied()
            .max()
            .unwrap_or(0)
            .max(n_max);
        let ht = hermite_tilde_row(x, top);
        let d_sigma = self.det_for(&ht, &self.levels);
        SigmaPoint {
            ht,
            gauss_quarter: (-x * x / 4.0).exp(),
            d_sigma,
        }
    }

    /// Wronskian determinant with normalized columns at the given levels:
    /// entry `(k, j) = √(l_j!/(l_j−k)!)·h̃_{l_j−k}`.
    fn det_for(&self, ht: &[Complex64], columns: &[u32]) -> Complex64 {
        let n = columns.len();
        if n == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let mat: Vec<Vec<Complex64>> = (0..n as u32)
            .map(|k| {
                columns
                    .iter()
                    .map(|&l| {
                        if k > l {
                            Complex64::new(0.0, 0.0)
                        } else {
                            falling_sqrt(l, k) * ht[(l - k) as usize]
                        }
                    })
                    .collect()
            })
            .collect();
        complex_det(mat)
    }

    fn union_columns(&self, n: u32) -> Vec<u32> {
        let mut cols = self.levels.clone();
        let pos = cols.partition_point(|&l| l < n);
        cols.insert(pos, n);
        cols
    }

    /// Squared normalization denominator `Π_j (σ[j] − n)` (signed), matching
    /// the exact paired convention.
    fn norm_product(&self, n: u32) -> f64 {
        self.levels
            .iter()
            .map(|&l| l as f64 - n as f64)
            .product()
    }

    /// Paired product `ψ_n^σ(x)·ψ_n^σ(y)`; exact-pair-consistent and well
    /// defined for any σ (no square roots of possibly negative products).
    /// The denominator carries the same `(−1)^{|σ|}` formal-normalization
    /// sign as the exact sum-rule pair, so spectral sums divide consistently.
    pub fn psi_pair(&self, px: &SigmaPoint, py: &SigmaPoint, n: u32) -> Complex64 {
        if self.levels.binary_search(&n).is_ok() {
            return Complex64::new(0.0, 0.0);
        }
        let cols = self.union_columns(n);
        let dx = self.det_for(&px.ht, &cols);
        let dy = self.det_for(&py.ht, &cols);
        let n2 = 1.0 / self.norm_product(n);
        let sign = if self.levels.len() % 2 == 0 { 1.0 } else { -1.0 };
        sign * n2 * TWO_PI.powf(-0.5) * px.gauss_quarter * py.gauss_quarter * dx * dy
            / (px.d_sigma * py.d_sigma)
    }

    /// Single eigenfunction value; requires a positive normalization product
    /// (guaranteed for Krein-Adler σ and `n ∉ σ`). Returns `None` when the
    /// normalization is imaginary or `n ∈ σ` maps to the zero function.
    pub fn psi_single(&self, p: &SigmaPoint, n: u32) -> Option<Complex64> {
        if self.levels.binary_search(&n).is_ok() {
            return Some(Complex64::new(0.0, 0.0));
        }
        let prod = self.norm_product(n);
        if prod <= 0.0 {
            return None;
        }
        let cols = self.union_columns(n);
        let d = self.det_for(&p.ht, &cols);
        Some(TWO_PI.powf(-0.25) / prod.sqrt() * p.gauss_quarter * d / p.d_sigma)
    }
}

/// Composite Simpson quadrature over `[a, b]` with an odd number of points.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> f64 {
    assert!(points >= 3 && points % 2 == 1, "Simpson needs an odd point count");
    let h = (b - a) / (points - 1) as f64;
    let mut acc = f(a) + f(b);
    for i in 1..points - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}
