//! The kernel catalog: closed forms with derivative orders, spectral symbols
//! and a truncated Legendre-series evaluator.
//!
//! Every kernel is zonal, i.e. a function of the dot product `t = ξ·η` of two
//! unit vectors, or equivalently of the chord `r = |ξ - η| = sqrt(2(1-t))`.
//! Internally the closed forms are written in terms of `r`; the dot-product
//! convention converts first, so both conventions agree bit for bit at
//! matching arguments.
//!
//! Derivative kernels are the t-derivatives of the base kernel with positive
//! constant factors dropped. Every consumer (greedy argmin, relative
//! comparison of discrepancies) is invariant under positive scaling.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::legendre::DerivativeRecurrence;

/// Highest derivative order with a closed form.
pub const MAX_CLOSED_FORM_ORDER: usize = 2;

const FOUR_PI: f64 = 4.0 * PI;

/// Kernel families of the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `-(1/4π) ln(e/2 (1-t))`, symbol `n(n+1)`.
    Pycke,
    /// `1 - 2 ln(1 + sqrt((1-t)/2))`, symbol `n(n+1)(2n+1)`.
    CuiFreeden,
    /// `1/2 - (2/π) sin(arccos t)`; odd modes absent.
    Gine,
    /// `1/4 - (1/2π) arccos t`; even modes absent.
    AjneBeran,
    /// `sign(s) |2(1-t)|^{-s/2}`, and `-ln 2(1-t)` for `s = 0`.
    Riesz { s: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Pycke => "pycke",
            Family::CuiFreeden => "cui-freeden",
            Family::Gine => "gine",
            Family::AjneBeran => "ajne",
            Family::Riesz { .. } => "riesz",
        }
    }
}

/// How the scalar argument of [`KernelSpec::eval`] is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// `t ∈ [-1, 1]`, the dot product.
    #[default]
    DotProduct,
    /// `r ∈ [0, 2]`, the Euclidean chord.
    Chordal,
}

/// A kernel family together with a derivative order and argument convention.
///
/// Serializes as its canonical name; the convention is not part of the name.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct KernelSpec {
    family: Family,
    order: usize,
    convention: Convention,
}

impl KernelSpec {
    pub fn new(family: Family, order: usize) -> Result<Self> {
        if order > MAX_CLOSED_FORM_ORDER {
            return Err(Error::Capability(format!(
                "closed-form kernels exist up to derivative order {MAX_CLOSED_FORM_ORDER}, got {order}"
            )));
        }
        if let Family::Riesz { s } = family {
            if !s.is_finite() {
                return Err(Error::domain(format!("Riesz exponent must be finite, got {s}")));
            }
            // below -2 the derivative constants change sign
            if order > 0 && s <= -2.0 {
                return Err(Error::Capability(format!(
                    "Riesz derivative kernels need s > -2, got {s}"
                )));
            }
        }
        Ok(Self {
            family,
            order,
            convention: Convention::DotProduct,
        })
    }

    pub fn pycke(order: usize) -> Result<Self> {
        Self::new(Family::Pycke, order)
    }

    pub fn cui_freeden(order: usize) -> Result<Self> {
        Self::new(Family::CuiFreeden, order)
    }

    pub fn riesz(s: f64, order: usize) -> Result<Self> {
        Self::new(Family::Riesz { s }, order)
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// The next derivative kernel of the same family.
    pub fn derivative(&self) -> Result<Self> {
        let mut next = Self::new(self.family, self.order + 1)?;
        next.convention = self.convention;
        Ok(next)
    }

    /// Whether the kernel has a pole at `t = 1` (coincident points).
    pub fn singular_at_coincidence(&self) -> bool {
        match self.family {
            Family::Pycke => true,
            Family::CuiFreeden | Family::Gine | Family::AjneBeran => self.order > 0,
            Family::Riesz { s } => self.order > 0 || s >= 0.0,
        }
    }

    /// Whether the kernel has a pole at `t = -1` (antipodal points).
    pub fn singular_at_antipode(&self) -> bool {
        matches!(self.family, Family::Gine | Family::AjneBeran) && self.order > 0
    }

    /// Evaluates at `t` or `r`, according to the spec's convention.
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self.convention {
            Convention::DotProduct => self.eval_t(x),
            Convention::Chordal => self.eval_chord(x),
        }
    }

    /// Evaluates at the dot product `t ∈ [-1, 1]`.
    pub fn eval_t(&self, t: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("dot product {t} outside [-1, 1]")));
        }
        self.eval_chord(chord_from_dot(t))
    }

    /// Evaluates at the chord `r ∈ [0, 2]`.
    pub fn eval_chord(&self, r: f64) -> Result<f64> {
        if !(0.0..=2.0).contains(&r) {
            return Err(Error::domain(format!("chord {r} outside [0, 2]")));
        }
        if (r == 0.0 && self.singular_at_coincidence()) || (r == 2.0 && self.singular_at_antipode()) {
            return Err(Error::Singular {
                kernel: self.to_string(),
                t: 1.0 - 0.5 * r * r,
            });
        }
        Ok(self.value_at_chord(r))
    }

    /// Closed form at a chord without domain or pole checks; poles give ±inf.
    #[inline]
    pub(crate) fn value_at_chord(&self, r: f64) -> f64 {
        closed_form(self.family, self.order, r)
    }

    /// A positive multiple of dK/dt at a chord, for descent directions.
    #[inline]
    pub(crate) fn slope_at_chord(&self, r: f64) -> f64 {
        closed_form(self.family, self.order + 1, r)
    }

    /// `K(x)` for a scaled chord `x = εr >= 0`.
    ///
    /// The log and power families extend naturally past `r = 2`; the Giné and
    /// Ajne forms live on `[0, 2]` and are clamped there.
    #[inline]
    pub(crate) fn value_at_scaled_chord(&self, x: f64) -> f64 {
        match self.family {
            Family::Gine | Family::AjneBeran => self.value_at_chord(x.min(2.0)),
            _ => self.value_at_chord(x),
        }
    }

    /// Whether the kernel is singular at chord `r` (only the endpoints can be).
    #[inline]
    pub(crate) fn singular_at_chord(&self, r: f64) -> bool {
        (r == 0.0 && self.singular_at_coincidence()) || (r >= 2.0 && self.singular_at_antipode())
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&kernel_label(self.family, self.order))
    }
}

/// Canonical name of a family at derivative order `m`, e.g. `riesz:s=1:d2`.
///
/// Unlike [`KernelSpec`]'s `Display`, `m` may exceed the closed-form cap,
/// which series-based reports need.
pub fn kernel_label(family: Family, m: usize) -> String {
    let mut label = family.name().to_string();
    if let Family::Riesz { s } = family {
        label.push_str(&format!(":s={s}"));
    }
    if m > 0 {
        label.push_str(&format!(":d{m}"));
    }
    label
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Parses names such as `pycke`, `cui-freeden:d1`, `riesz:s=1`, `riesz:s=0.5:d2`.
    fn from_str(text: &str) -> Result<Self> {
        let bad = Error::Domain;
        let mut parts = text.trim().split(':');
        let head = parts.next().unwrap_or_default().to_ascii_lowercase();
        let mut order: Option<usize> = None;
        let mut s: Option<f64> = None;
        for part in parts {
            if let Some(v) = part.strip_prefix("s=") {
                if s.is_some() {
                    return Err(bad(format!("duplicate exponent in kernel `{text}`")));
                }
                let v: f64 = v
                    .parse()
                    .map_err(|_| bad(format!("bad Riesz exponent `{v}` in `{text}`")))?;
                if !v.is_finite() {
                    return Err(bad(format!("Riesz exponent must be finite in `{text}`")));
                }
                s = Some(v);
            } else if let Some(v) = part.strip_prefix('d') {
                if order.is_some() {
                    return Err(bad(format!("duplicate derivative order in kernel `{text}`")));
                }
                order = Some(
                    v.parse()
                        .map_err(|_| bad(format!("bad derivative order `{v}` in `{text}`")))?,
                );
            } else {
                return Err(bad(format!("unknown kernel option `{part}` in `{text}`")));
            }
        }
        let family = match head.as_str() {
            "pycke" => Family::Pycke,
            "cui-freeden" | "cuifreeden" | "cf" => Family::CuiFreeden,
            "gine" => Family::Gine,
            "ajne" | "ajne-beran" => Family::AjneBeran,
            "riesz" => Family::Riesz {
                s: s.ok_or_else(|| bad(format!("Riesz kernel needs `:s=<value>` in `{text}`")))?,
            },
            other => return Err(bad(format!("unknown kernel family `{other}`"))),
        };
        if s.is_some() && !matches!(family, Family::Riesz { .. }) {
            return Err(bad(format!("exponent given for non-Riesz kernel `{text}`")));
        }
        KernelSpec::new(family, order.unwrap_or(0))
    }
}

impl From<KernelSpec> for String {
    fn from(spec: KernelSpec) -> String {
        spec.to_string()
    }
}

impl TryFrom<String> for KernelSpec {
    type Error = Error;
    fn try_from(name: String) -> Result<Self> {
        name.parse()
    }
}

/// `r = sqrt(2(1-t))`, the conversion used by the dot-product convention.
#[inline]
pub fn chord_from_dot(t: f64) -> f64 {
    (2.0 * (1.0 - t)).max(0.0).sqrt()
}

/// Closed forms for orders 0..=3 in terms of the chord.
///
/// Order 3 is internal: it is the slope of the order-2 kernel.
fn closed_form(family: Family, order: usize, r: f64) -> f64 {
    let w = 0.5 * r * r; // 1 - t
    match family {
        Family::Pycke => match order {
            0 => -(0.5 * E * w).ln() / FOUR_PI,
            1 => 1.0 / w,
            2 => 1.0 / (w * w),
            _ => 2.0 / (w * w * w),
        },
        Family::CuiFreeden => {
            let u = 0.5 * r;
            let v = 1.0 + u;
            match order {
                0 => 1.0 - 2.0 * u.ln_1p(),
                1 => 1.0 / (u * v),
                2 => (1.0 + 2.0 * u) / (u * u * u * v * v),
                _ => (3.0 + 9.0 * u + 8.0 * u * u) / (u.powi(5) * v * v * v),
            }
        }
        Family::Gine | Family::AjneBeran => {
            // t = 1 - r²/2 and sqrt(1 - t²) = 2u sqrt(1 - u²) with u = r/2
            let u = (0.5 * r).min(1.0);
            let t = 1.0 - w;
            let sin = 2.0 * u * (1.0 - u * u).sqrt();
            let q = sin * sin;
            match (family, order) {
                (Family::Gine, 0) => 0.5 - 2.0 / PI * sin,
                (Family::Gine, 1) => t / sin,
                (Family::Gine, 2) => 1.0 / (q * sin),
                (Family::Gine, _) => 3.0 * t / (q * q * sin),
                (_, 0) => 0.25 - u.asin() / PI,
                (_, 1) => 1.0 / sin,
                (_, 2) => t / (q * sin),
                (_, _) => (1.0 + 2.0 * t * t) / (q * q * sin),
            }
        }
        Family::Riesz { s } => {
            let v = r * r; // 2(1 - t)
            match order {
                0 if s == 0.0 => -v.ln(),
                0 => s.signum() * v.powf(-0.5 * s),
                k => v.powf(-0.5 * s - k as f64),
            }
        }
    }
}

/// The symbol sequence `A_n²` of a family, `n >= 1`.
///
/// `None` marks an absent mode (`A_n² = +∞`), which contributes nothing to
/// any series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolSequence {
    family: Family,
}

impl SymbolSequence {
    /// Fails for Riesz exponents outside (-2, 2), where the Legendre
    /// expansion of the kernel does not exist.
    pub fn new(family: Family) -> Result<Self> {
        if let Family::Riesz { s } = family {
            if !(s > -2.0 && s < 2.0) {
                return Err(Error::Capability(format!(
                    "Riesz symbols are defined for -2 < s < 2, got {s}"
                )));
            }
        }
        Ok(Self { family })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `A_n²`, or `None` when the mode is absent. Degree 0 is never present.
    pub fn squared(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        match self.family {
            Family::Pycke => Some(nf * (nf + 1.0)),
            Family::CuiFreeden => Some(nf * (nf + 1.0) * (2.0 * nf + 1.0)),
            Family::Gine => (n % 2 == 0).then(|| {
                let lr = libm::lgamma(0.5 * nf + 1.0) - libm::lgamma(0.5 * (nf + 1.0));
                (nf - 1.0) * (nf + 2.0) / 4.0 * (2.0 * lr).exp()
            }),
            Family::AjneBeran => (n % 2 == 1).then(|| {
                let lr = libm::lgamma(0.5 * (nf + 3.0)) - libm::lgamma(0.5 * (nf + 2.0));
                nf * nf * (2.0 * lr).exp()
            }),
            Family::Riesz { s } if s == 0.0 => Some(nf * (nf + 1.0) / FOUR_PI),
            Family::Riesz { s } => {
                // sign(s) cancels the sign of Γ(s/2) on (-2, 2), leaving
                // only log-magnitudes
                let lg = |x: f64| libm::lgamma_r(x).0;
                let log = (s - 2.0) * std::f64::consts::LN_2 + lg(0.5 * s) + lg(nf + 2.0 - 0.5 * s)
                    - lg(0.5 * s + nf)
                    - lg(1.0 - 0.5 * s);
                Some(log.exp() / PI)
            }
        }
    }

    /// Series weight `(2n+1) / (4π A_n²)`, zero for absent modes.
    pub fn weight(&self, n: usize) -> f64 {
        self.squared(n)
            .map_or(0.0, |a2| (2 * n + 1) as f64 / (FOUR_PI * a2))
    }
}

/// Result of a truncated series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Degree-weighted magnitude of the last terms; of the order of the
    /// remaining tail for terms decaying like `n^-2`.
    pub tail_estimate: f64,
    pub n_max: usize,
    /// Number of degrees that contributed.
    pub present_modes: usize,
}

impl SeriesValue {
    /// Heuristic: the tail estimate is small next to the value.
    pub fn appears_convergent(&self) -> bool {
        self.tail_estimate <= SERIES_TAIL_RATIO * self.value.abs().max(f64::MIN_POSITIVE)
    }
}

/// Ratio of tail estimate to value above which a series is reported as not converged.
pub const SERIES_TAIL_RATIO: f64 = 0.05;

/// Tracks the largest `n·|term|` over the final stretch of degrees.
#[derive(Debug, Clone)]
pub(crate) struct TailTracker {
    window_start: usize,
    worst: f64,
}

impl TailTracker {
    pub(crate) fn new(n_max: usize) -> Self {
        Self {
            window_start: n_max.saturating_sub((n_max / 10).max(8)).max(1),
            worst: 0.0,
        }
    }

    #[inline]
    pub(crate) fn observe(&mut self, n: usize, term: f64) {
        if n >= self.window_start {
            self.worst = self.worst.max(n as f64 * term.abs());
        }
    }

    pub(crate) fn estimate(&self) -> f64 {
        self.worst
    }
}

/// `Σ_{n=1}^{n_max} (2n+1)/(4π A_n²) P_n^{(m)}(t)` over present modes.
pub fn kernel_series_eval(family: Family, m: usize, t: f64, n_max: usize) -> Result<SeriesValue> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("dot product {t} outside [-1, 1]")));
    }
    if n_max == 0 {
        return Err(Error::domain("series truncation degree must be at least 1"));
    }
    let symbols = SymbolSequence::new(family)?;
    let mut rec = DerivativeRecurrence::new(t, m);
    let mut tail = TailTracker::new(n_max);
    let mut sum = crate::sum::CompensatedSum::new();
    let mut present = 0;
    for n in 1..=n_max {
        rec.advance();
        let w = symbols.weight(n);
        if w == 0.0 {
            continue;
        }
        present += 1;
        let term = w * rec.current()[m];
        sum.add(term);
        tail.observe(n, term);
    }
    Ok(SeriesValue {
        value: sum.value(),
        tail_estimate: tail.estimate(),
        n_max,
        present_modes: present,
    })
}

/// Affine map `closed ≈ slope · series + offset` relating a truncated series
/// to its closed form.
///
/// The series and the closed forms of the catalog differ by family-specific
/// constants (the `4π` of the addition theorem and the dropped `n = 0`
/// mode), so closed forms are compared with the series only after this
/// calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesCalibration {
    pub slope: f64,
    pub offset: f64,
}

impl SeriesCalibration {
    /// Least-squares fit over the probe abscissae (at least two, distinct).
    pub fn fit(spec: &KernelSpec, probes: &[f64], n_max: usize) -> Result<Self> {
        if probes.len() < 2 {
            return Err(Error::domain("calibration needs at least two probes"));
        }
        let pairs: Vec<(f64, f64)> = probes
            .iter()
            .map(|&t| {
                let series = kernel_series_eval(spec.family(), spec.order(), t, n_max)?.value;
                Ok((series, spec.eval_t(t)?))
            })
            .collect::<Result<_>>()?;
        let k = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            return Err(Error::domain("calibration probes give identical series values"));
        }
        let slope = sxy / sxx;
        Ok(Self {
            slope,
            offset: my - slope * mx,
        })
    }

    pub fn apply(&self, series: f64) -> f64 {
        self.slope * series + self.offset
    }
}
