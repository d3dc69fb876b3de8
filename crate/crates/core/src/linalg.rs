//! Dense symmetric-indefinite solves for the interpolation saddle systems.
//!
//! Backed by faer's Bunch-Kaufman LBLᵀ factorization. faer is built without
//! its rayon feature, so factorizations run single-threaded and give the
//! same bits no matter how the caller is parallelized.

use faer::linalg::solvers::{DenseSolveCore, Lblt, Solve};
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Factorization of a symmetric matrix together with its 1-norm.
pub(crate) struct SymmetricSolver {
    factor: Lblt<f64>,
    n: usize,
    norm1: f64,
}

fn one_norm(a: &Mat<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl SymmetricSolver {
    /// Factors `a`, which must be square and symmetric; only its lower
    /// triangle is read.
    pub(crate) fn new(a: &Mat<f64>) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols(), "square matrix expected");
        let norm1 = one_norm(a);
        if !norm1.is_finite() {
            return Err(Error::Conditioning { condition: f64::INFINITY });
        }
        Ok(Self {
            factor: a.lblt(Side::Lower),
            n: a.nrows(),
            norm1,
        })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.factor.solve_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    pub(crate) fn inverse(&self) -> Mat<f64> {
        self.factor.inverse()
    }

    /// `‖A‖₁ ‖A⁻¹‖₁` from an explicit inverse.
    pub(crate) fn condition_from_inverse(&self, inverse: &Mat<f64>) -> f64 {
        sanitize(self.norm1 * one_norm(inverse))
    }

    /// Hager's estimate of `‖A‖₁ ‖A⁻¹‖₁` with Higham's alternating-sign
    /// safeguard; a lower bound that is usually within a small factor.
    pub(crate) fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0f64;
        let mut last = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            est = est.max(l1(&y));
            if !est.is_finite() {
                return f64::INFINITY;
            }
            let sign: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            // A is symmetric, so A⁻ᵀ = A⁻¹
            let z = self.solve(&sign);
            let (j, zj) = z
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v.abs() > best.1 { (i, v.abs()) } else { best });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zj <= ztx || j == last {
                break;
            }
            last = j;
            x = vec![0.0; n];
            x[j] = 1.0;
        }
        let alt: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
            })
            .collect();
        est = est.max(2.0 * l1(&self.solve(&alt)) / (3.0 * n as f64));
        sanitize(self.norm1 * est)
    }
}

fn sanitize(c: f64) -> f64 {
    if c.is_nan() {
        f64::INFINITY
    } else {
        c
    }
}
