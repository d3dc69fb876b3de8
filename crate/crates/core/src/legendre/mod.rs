//! Legendre polynomials on [-1, 1].
//!
//! Values and derivatives come from Bonnet's three-term recurrence and its
//! k-fold derivative
//!
//! ```text
//! (n+1) P_{n+1}^{(k)} = (2n+1) (x P_n^{(k)} + k P_n^{(k-1)}) - n P_{n-1}^{(k)}
//! ```
//!
//! run forward in the degree. The exact polynomials from Rodrigues' formula
//! live in [`rodrigues`] and are only meant as a test oracle.

pub mod rodrigues;

pub use rodrigues::{rodrigues_coefficients, PolynomialCoefficients, N_EXACT_MAX};

use crate::error::{Error, Result};

fn check_abscissa(x: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("Legendre abscissa {x} outside [-1, 1]")))
    }
}

/// P_n(x).
pub fn legendre_eval(n: usize, x: f64) -> Result<f64> {
    check_abscissa(x)?;
    let mut rec = DerivativeRecurrence::new(x, 0);
    rec.advance_to(n);
    Ok(rec.current()[0])
}

/// The m-th derivative of P_n at x. Zero whenever m > n.
pub fn legendre_derivative_eval(n: usize, m: usize, x: f64) -> Result<f64> {
    check_abscissa(x)?;
    if m > n {
        return Ok(0.0);
    }
    let mut rec = DerivativeRecurrence::new(x, m);
    rec.advance_to(n);
    Ok(rec.current()[m])
}

/// L²([-1,1]) norm of P_n, `sqrt(2 / (2n+1))`.
pub fn legendre_norm(n: usize) -> f64 {
    (2.0 / (2 * n + 1) as f64).sqrt()
}

/// Dimension of the space of degree-`n` spherical harmonics on S^d.
///
/// Computed as the number of degree-`n` harmonic polynomials in d+1
/// variables, `C(n+d, d) - C(n+d-2, d)`, in exact integer arithmetic.
pub fn harmonic_dimension(d: u32, n: u32) -> Result<u64> {
    if d == 0 {
        return Err(Error::domain("sphere dimension must be at least 1"));
    }
    let (d, n) = (d as u64, n as u64);
    let upper = binomial(n + d, d)?;
    let lower = if n >= 2 { binomial(n + d - 2, d)? } else { 0 };
    Ok(upper - lower)
}

fn binomial(a: u64, k: u64) -> Result<u64> {
    let k = k.min(a - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (a - k + i) / i stays integral at every step
        acc = acc
            .checked_mul(a as u128 - k as u128 + i)
            .ok_or(Error::Overflow("harmonic dimension"))?
            / i;
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("harmonic dimension"))
}

/// Forward recurrence over the degree carrying P_n and its first `m` derivatives.
///
/// After construction the state is degree 0; every call to [`advance`]
/// moves one degree up. Used directly by the series evaluators, which
/// need every degree in turn.
///
/// [`advance`]: DerivativeRecurrence::advance
#[derive(Debug, Clone)]
pub struct DerivativeRecurrence {
    x: f64,
    degree: usize,
    prev: Vec<f64>,
    curr: Vec<f64>,
    next: Vec<f64>,
}

impl DerivativeRecurrence {
    /// Starts at degree 0. `x` is not range checked here.
    pub fn new(x: f64, max_order: usize) -> Self {
        let mut curr = vec![0.0; max_order + 1];
        curr[0] = 1.0;
        Self {
            x,
            degree: 0,
            prev: vec![0.0; max_order + 1],
            curr,
            next: vec![0.0; max_order + 1],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `[P_n(x), P_n'(x), ..., P_n^{(m)}(x)]` at the current degree n.
    pub fn current(&self) -> &[f64] {
        &self.curr
    }

    pub fn advance(&mut self) {
        let n = self.degree as f64;
        let a = 2.0 * n + 1.0;
        let inv = 1.0 / (n + 1.0);
        self.next[0] = (a * self.x * self.curr[0] - n * self.prev[0]) * inv;
        for k in 1..self.curr.len() {
            self.next[k] = (a * (self.x * self.curr[k] + k as f64 * self.curr[k - 1])
                - n * self.prev[k])
                * inv;
        }
        std::mem::swap(&mut self.prev, &mut self.curr);
        std::mem::swap(&mut self.curr, &mut self.next);
        self.degree += 1;
    }

    pub fn advance_to(&mut self, n: usize) {
        while self.degree < n {
            self.advance();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_values() {
        assert_eq!(legendre_eval(0, 0.3).unwrap(), 1.0);
        assert_eq!(legendre_eval(1, 0.37).unwrap(), 0.37);
        assert_eq!(legendre_eval(4, 1.0).unwrap(), 1.0);
        assert!((legendre_eval(3, 0.5).unwrap() + 0.4375).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        assert!((legendre_derivative_eval(2, 1, 0.3).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(legendre_derivative_eval(5, 6, 0.2).unwrap(), 0.0);
        assert_eq!(legendre_derivative_eval(6, 1, 1.0).unwrap(), 21.0);
        assert_eq!(
            legendre_derivative_eval(7, 0, -0.4).unwrap(),
            legendre_eval(7, -0.4).unwrap()
        );
    }

    #[test]
    fn rejects_abscissa_outside_interval() {
        assert!(matches!(legendre_eval(3, 1.0 + 1e-12), Err(Error::Domain(_))));
        assert!(matches!(legendre_derivative_eval(3, 1, -1.5), Err(Error::Domain(_))));
        assert!(legendre_eval(2, f64::NAN).is_err());
    }

    #[test]
    fn norms() {
        assert!((legendre_norm(0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((legendre_norm(1) - 0.816_496_580_927_726).abs() < 1e-15);
        assert!((legendre_norm(12) - 0.282_842_712_474_619).abs() < 1e-15);
    }

    // Z(d, n) straight from the Gamma-function expression, valid for d >= 2.
    fn gamma_dimension(d: u32, n: u32) -> f64 {
        let (d, n) = (d as f64, n as f64);
        let lg = |x: f64| libm::lgamma(x);
        (2.0 * n + d - 1.0) * (lg(n + d - 1.0) - lg(d) - lg(n + 1.0)).exp()
    }

    #[test]
    fn harmonic_dimension_examples() {
        assert_eq!(harmonic_dimension(2, 0).unwrap(), 1);
        assert_eq!(harmonic_dimension(2, 3).unwrap(), 7);
        assert_eq!(harmonic_dimension(3, 2).unwrap(), 9);
        assert_eq!(harmonic_dimension(1, 0).unwrap(), 1);
        assert_eq!(harmonic_dimension(1, 5).unwrap(), 2);
        for n in 0..40 {
            assert_eq!(harmonic_dimension(2, n).unwrap(), 2 * n as u64 + 1);
            assert_eq!(harmonic_dimension(3, n).unwrap(), (n as u64 + 1).pow(2));
        }
        for d in 2..8 {
            for n in 0..25 {
                let exact = harmonic_dimension(d, n).unwrap() as f64;
                let g = gamma_dimension(d, n);
                assert!((exact - g).abs() <= 1e-9 * g, "d={d} n={n}: {exact} vs {g}");
            }
        }
    }

    #[test]
    fn harmonic_dimension_overflow_is_reported() {
        assert!(matches!(harmonic_dimension(60, 4_000_000), Err(Error::Overflow(_))));
        assert!(harmonic_dimension(0, 3).is_err());
    }
}
