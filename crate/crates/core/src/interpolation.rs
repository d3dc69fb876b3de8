//! Kernel interpolation on the sphere with a polynomial tail and smoothing,
//! leave-one-out cross-validation, and the shape-parameter sweep.
//!
//! A fit solves the saddle system
//!
//! ```text
//! [ K_ε + σ²I  P ] [w]   [y]
//! [ Pᵀ         0 ] [b] = [0]
//! ```
//!
//! with `K_ε[i][j] = K(ε |x_i - x_j|)` and `P[i][j] = p_j(x_i)` the
//! monomials of total degree at most `degree` in `x, y, z`.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::linalg::SymmetricSolver;
use crate::points::{PointSet, SpherePoint};
use crate::sum::CompensatedSum;

/// Fits whose condition estimate exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e13;
/// Tail degree used when none is given: `1, x, y, z`.
pub const DEFAULT_POLY_DEGREE: i32 = 1;
/// Highest accepted tail degree.
pub const MAX_POLY_DEGREE: i32 = 12;

/// The scattered-data test function of Franke, on all of R³.
pub fn franke_eval(p: [f64; 3]) -> f64 {
    let (x, y, z) = (9.0 * p[0], 9.0 * p[1], 9.0 * p[2]);
    let sq = |v: f64| v * v;
    0.75 * (-(sq(x - 2.0) + sq(y - 2.0) + sq(z - 2.0)) / 4.0).exp()
        + 0.75 * (-sq(x + 1.0) / 49.0 - sq(y + 1.0) / 10.0 - sq(z + 1.0) / 10.0).exp()
        + 0.5 * (-(sq(x - 7.0) + sq(y - 3.0) + sq(z - 5.0)) / 4.0).exp()
        - 0.2 * (-sq(x - 4.0) / 4.0 - sq(y - 7.0) - sq(z - 5.0)).exp()
}

/// Exponents `[a, b, c]` of the monomials `x^a y^b z^c` with `a + b + c <=
/// degree`, graded by total degree; empty for degree -1.
pub fn monomial_exponents(degree: i32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for total in 0..=degree.max(-1) {
        let total = total as u32;
        for a in (0..=total).rev() {
            for b in (0..=total - a).rev() {
                out.push([a, b, total - a - b]);
            }
        }
    }
    out
}

/// Number of tail monomials, `C(degree + 3, 3)`.
pub fn tail_size(degree: i32) -> usize {
    if degree < 0 {
        0
    } else {
        let d = degree as usize;
        (d + 1) * (d + 2) * (d + 3) / 6
    }
}

fn monomials(exponents: &[[u32; 3]], p: [f64; 3]) -> impl Iterator<Item = f64> + '_ {
    exponents
        .iter()
        .map(move |e| p[0].powi(e[0] as i32) * p[1].powi(e[1] as i32) * p[2].powi(e[2] as i32))
}

/// Kernel, shape parameter, smoothing and tail degree of a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    pub kernel: KernelSpec,
    /// Shape parameter: the kernel is evaluated at `ε r`.
    pub epsilon: f64,
    /// Smoothing: `σ²` is added to the diagonal.
    pub sigma: f64,
    /// Tail degree, -1 for none.
    pub degree: i32,
}

impl FitParams {
    pub fn new(kernel: KernelSpec, epsilon: f64, sigma: f64, degree: i32) -> Self {
        Self {
            kernel,
            epsilon,
            sigma,
            degree,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::domain(format!("shape parameter must be positive, got {}", self.epsilon)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::domain(format!("smoothing must be non-negative, got {}", self.sigma)));
        }
        if !(-1..=MAX_POLY_DEGREE).contains(&self.degree) {
            return Err(Error::domain(format!(
                "tail degree must lie in -1..={MAX_POLY_DEGREE}, got {}",
                self.degree
            )));
        }
        if self.kernel.singular_at_antipode() {
            return Err(Error::Capability(format!(
                "kernel `{}` is singular at antipodes and cannot interpolate",
                self.kernel
            )));
        }
        if self.kernel.singular_at_coincidence() && self.sigma == 0.0 {
            return Err(Error::domain(format!(
                "kernel `{}` is singular at coincidence; its diagonal needs sigma > 0",
                self.kernel
            )));
        }
        Ok(())
    }

    /// `K(ε r)`, with the singular diagonal read as zero.
    fn kernel(&self, r: f64) -> f64 {
        if r == 0.0 && self.kernel.singular_at_coincidence() {
            0.0
        } else {
            self.kernel.value_at_scaled_chord(self.epsilon * r)
        }
    }
}

/// A fitted interpolant.
///
/// The JSON form carries the kernel name, parameters, centers and
/// coefficients; the training values are not serialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolantModel {
    pub kernel: KernelSpec,
    pub epsilon: f64,
    pub sigma: f64,
    pub degree: i32,
    pub centers: Vec<SpherePoint>,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl InterpolantModel {
    pub fn params(&self) -> FitParams {
        FitParams::new(self.kernel, self.epsilon, self.sigma, self.degree)
    }

    /// Checks parameter ranges and coefficient lengths.
    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if self.centers.is_empty() {
            return Err(Error::Validation("model has no centers".into()));
        }
        if self.w.len() != self.centers.len() {
            return Err(Error::Validation(format!(
                "{} kernel coefficients for {} centers",
                self.w.len(),
                self.centers.len()
            )));
        }
        if self.b.len() != tail_size(self.degree) {
            return Err(Error::Validation(format!(
                "{} tail coefficients for degree {}, expected {}",
                self.b.len(),
                self.degree,
                tail_size(self.degree)
            )));
        }
        if self.w.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite coefficient".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_distinct(centers: &[SpherePoint]) -> Result<()> {
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            if centers[i].chord(&centers[j]) == 0.0 {
                return Err(Error::domain(format!("duplicate centers {i} and {j}")));
            }
        }
    }
    Ok(())
}

/// The full saddle matrix.
fn saddle_matrix(centers: &[SpherePoint], params: &FitParams) -> Mat<f64> {
    let n = centers.len();
    let exponents = monomial_exponents(params.degree);
    let m = exponents.len();
    let diagonal = params.kernel(0.0) + params.sigma * params.sigma;
    let mut g = Mat::<f64>::zeros(n + m, n + m);
    for i in 0..n {
        g[(i, i)] = diagonal;
        for j in 0..i {
            let v = params.kernel(centers[i].chord(&centers[j]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
        for (k, v) in monomials(&exponents, centers[i].coords()).enumerate() {
            g[(i, n + k)] = v;
            g[(n + k, i)] = v;
        }
    }
    g
}

fn check_inputs(centers: &PointSet, y: &[f64], params: &FitParams) -> Result<()> {
    params.validate()?;
    if y.len() != centers.len() {
        return Err(Error::domain(format!(
            "{} values for {} centers",
            y.len(),
            centers.len()
        )));
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain(format!("non-finite data value {v}")));
    }
    check_distinct(centers.points())
}

fn rhs(y: &[f64], m: usize) -> Vec<f64> {
    let mut r = y.to_vec();
    r.resize(y.len() + m, 0.0);
    r
}

fn checked(condition: f64) -> Result<()> {
    if condition.is_finite() && condition <= MAX_CONDITION {
        Ok(())
    } else {
        Err(Error::Conditioning { condition })
    }
}

/// Estimated 1-norm condition number of the saddle matrix of a fit.
pub fn condition_estimate(centers: &PointSet, params: &FitParams) -> Result<f64> {
    check_inputs(centers, &vec![0.0; centers.len()], params)?;
    Ok(SymmetricSolver::new(&saddle_matrix(centers.points(), params))?.condition_estimate())
}

/// Solves the saddle system for the coefficients `w` and `b`.
pub fn fit_interpolant(centers: &PointSet, y: &[f64], params: &FitParams) -> Result<InterpolantModel> {
    check_inputs(centers, y, params)?;
    let n = centers.len();
    let m = tail_size(params.degree);
    let solver = SymmetricSolver::new(&saddle_matrix(centers.points(), params))?;
    checked(solver.condition_estimate())?;
    let c = solver.solve(&rhs(y, m));
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Conditioning { condition: f64::INFINITY });
    }
    Ok(InterpolantModel {
        kernel: params.kernel,
        epsilon: params.epsilon,
        sigma: params.sigma,
        degree: params.degree,
        centers: centers.points().to_vec(),
        w: c[..n].to_vec(),
        b: c[n..].to_vec(),
        values: y.to_vec(),
    })
}

/// `Σ w_i K(ε |p - x_i|) + Σ b_j p_j(p)`.
pub fn interpolant_eval(model: &InterpolantModel, p: &SpherePoint) -> f64 {
    let params = model.params();
    let mut acc = CompensatedSum::new();
    for (x, w) in model.centers.iter().zip(&model.w) {
        acc.add(w * params.kernel(p.chord(x)));
    }
    let exponents = monomial_exponents(model.degree);
    for (v, b) in monomials(&exponents, p.coords()).zip(&model.b) {
        acc.add(b * v);
    }
    acc.value()
}

/// Leave-one-out errors `y_v - f^(v)(x_v)` by refitting without each point.
///
/// An entry is `None` when the reduced fit fails numerically. Costs `N`
/// full fits; meant as a reference for [`loocv_errors_fast`].
pub fn loocv_errors_slow(centers: &PointSet, y: &[f64], params: &FitParams) -> Result<Vec<Option<f64>>> {
    check_inputs(centers, y, params)?;
    let n = centers.len();
    if n < 3 {
        return Err(Error::domain("cross-validation needs at least 3 centers"));
    }
    let pts = centers.points();
    (0..n)
        .into_par_iter()
        .map(|v| {
            let keep = |i: &usize| *i != v;
            let sub = PointSet::new((0..n).filter(keep).map(|i| pts[i]).collect())?;
            let sub_y: Vec<f64> = (0..n).filter(keep).map(|i| y[i]).collect();
            match fit_interpolant(&sub, &sub_y, params) {
                Ok(model) => Ok(Some(y[v] - interpolant_eval(&model, &pts[v]))),
                Err(e) if e.is_numerical() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Leave-one-out errors from one factorization: `e_v = c_v / (G⁻¹)_vv`.
pub fn loocv_errors_fast(centers: &PointSet, y: &[f64], params: &FitParams) -> Result<Vec<f64>> {
    check_inputs(centers, y, params)?;
    let n = centers.len();
    let m = tail_size(params.degree);
    let solver = SymmetricSolver::new(&saddle_matrix(centers.points(), params))?;
    let inverse = solver.inverse();
    checked(solver.condition_from_inverse(&inverse))?;
    let c = solver.solve(&rhs(y, m));
    let errors: Vec<f64> = (0..n).map(|v| c[v] / inverse[(v, v)]).collect();
    if errors.iter().any(|e| !e.is_finite()) {
        return Err(Error::Conditioning { condition: f64::INFINITY });
    }
    Ok(errors)
}

/// One row of an ε sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    /// Mean squared leave-one-out error; `None` when the fit failed.
    pub mse: Option<f64>,
    /// `ok`, or the reason the fit failed.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub best_epsilon: f64,
    pub best_mse: f64,
}

impl SweepReport {
    /// Index of the minimizing row.
    pub fn best_index(&self) -> usize {
        self.rows
            .iter()
            .position(|r| r.epsilon == self.best_epsilon)
            .expect("best row is part of the table")
    }
}

fn failure_status(e: &Error) -> String {
    match e {
        Error::Conditioning { .. } => "ill_conditioned".into(),
        Error::Singular { .. } | Error::SingularPair { .. } => "singular".into(),
        _ => "failed".into(),
    }
}

/// Fast-LOOCV mean squared error over a grid of shape parameters; ties go
/// to the first grid entry.
pub fn epsilon_sweep(centers: &PointSet, y: &[f64], params: &FitParams, grid: &[f64]) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::domain("empty shape-parameter grid"));
    }
    if let Some(e) = grid.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::domain(format!("shape parameters must be positive, got {e}")));
    }
    check_inputs(centers, y, params)?;
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&epsilon| match loocv_errors_fast(centers, y, &params.with_epsilon(epsilon)) {
            Ok(errors) => {
                let sq: CompensatedSum = errors.iter().map(|e| e * e).collect();
                SweepRow {
                    epsilon,
                    mse: Some(sq.value() / errors.len() as f64),
                    status: "ok".into(),
                }
            }
            Err(e) => SweepRow {
                epsilon,
                mse: None,
                status: failure_status(&e),
            },
        })
        .collect();
    let best = rows
        .iter()
        .filter_map(|r| r.mse.map(|m| (r.epsilon, m)))
        .fold(None, |best: Option<(f64, f64)>, (e, m)| match best {
            Some((_, bm)) if bm <= m => best,
            _ => Some((e, m)),
        });
    let (best_epsilon, best_mse) = best.ok_or_else(|| Error::Conditioning { condition: f64::INFINITY })?;
    Ok(SweepReport {
        rows,
        best_epsilon,
        best_mse,
    })
}
