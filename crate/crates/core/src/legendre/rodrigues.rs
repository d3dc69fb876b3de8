//! Exact Legendre polynomials from Rodrigues' formula,
//! `P_n(x) = 1/(2^n n!) d^n/dx^n (x^2 - 1)^n`, in rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest degree accepted by [`rodrigues_coefficients`].
pub const N_EXACT_MAX: usize = 40;

/// A polynomial `c_0 + c_1 x + ... + c_n x^n` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCoefficients {
    coeffs: Vec<BigRational>,
}

impl PolynomialCoefficients {
    /// Trailing zero coefficients are trimmed; the zero polynomial keeps a single `0`.
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn derivative(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigInt::from(k))
            .collect();
        Self::new(c)
    }

    pub fn nth_derivative(&self, m: usize) -> Self {
        (0..m).fold(self.clone(), |p, _| p.derivative())
    }

    /// Exact value at a rational point (Horner).
    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Value at a double, computed exactly and rounded once.
    pub fn eval(&self, x: f64) -> f64 {
        let xr = BigRational::from_float(x).expect("finite abscissa");
        to_f64(&self.eval_exact(&xr))
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact coefficients of P_n.
pub fn rodrigues_coefficients(n: usize) -> Result<PolynomialCoefficients> {
    if n > N_EXACT_MAX {
        return Err(Error::Capability(format!(
            "exact Rodrigues expansion limited to degree {N_EXACT_MAX}, got {n}"
        )));
    }
    // (x^2 - 1)^n = sum_k C(n,k) (-1)^(n-k) x^(2k)
    let mut base = vec![BigRational::zero(); 2 * n + 1];
    let mut binom = BigInt::one();
    for k in 0..=n {
        let sign = if (n - k) % 2 == 0 { 1 } else { -1 };
        base[2 * k] = BigRational::from_integer(&binom * sign);
        binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
    }
    let mut scale = BigInt::one();
    for k in 1..=n {
        scale *= BigInt::from(2 * k); // 2^n n!
    }
    let poly = PolynomialCoefficients::new(base).nth_derivative(n);
    let scale = BigRational::from_integer(scale);
    Ok(PolynomialCoefficients::new(
        poly.coeffs.into_iter().map(|c| c / &scale).collect(),
    ))
}
