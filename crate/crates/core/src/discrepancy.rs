//! Discrepancy and energy of point systems.
//!
//! All double sums run over the upper triangle in a fixed block layout (see
//! [`crate::sum`]), so every report is bit-identical regardless of the
//! number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_label, Family, KernelSpec, SymbolSequence, TailTracker, SERIES_TAIL_RATIO};
use crate::legendre::DerivativeRecurrence;
use crate::points::{PointSet, SpherePoint};
use crate::sum::{block_sum, CompensatedSum, BLOCK};

/// Highest derivative order accepted by the series methods.
pub const M_SERIES_MAX: usize = 4;

/// Flag: the sum under the square root was negative and clamped to zero.
pub const FLAG_NEGATIVE_SUM: &str = "negative_sum_clamped";
/// Flag: the series tail estimate is large next to the value.
pub const FLAG_NOT_CONVERGED: &str = "series_not_converged";
/// Flag: no symbol mode up to `n_max` is present.
pub const FLAG_EMPTY_SUM: &str = "empty_sum";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PairwiseRms,
    MeanPair,
    Series,
}

/// Whether the `i = j` terms enter a double sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalPolicy {
    Include,
    Exclude,
}

impl DiagonalPolicy {
    /// Include unless the kernel is singular at coincidence.
    pub fn natural_for(spec: &KernelSpec) -> Self {
        if spec.singular_at_coincidence() {
            DiagonalPolicy::Exclude
        } else {
            DiagonalPolicy::Include
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub kernel: String,
    pub m: usize,
    pub method: Method,
    pub diagonal: DiagonalPolicy,
    #[serde(rename = "N")]
    pub n: usize,
    pub n_max: Option<usize>,
    pub value: f64,
    pub flags: Vec<String>,
    /// Series tail estimate; not part of the serialized form.
    #[serde(skip)]
    pub tail_estimate: Option<f64>,
}

impl DiscrepancyReport {
    pub fn negative_sum_clamped(&self) -> bool {
        self.has_flag(FLAG_NEGATIVE_SUM)
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

/// Signed weights on a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    points: PointSet,
    weights: Vec<f64>,
}

impl WeightedMeasure {
    pub fn new(points: PointSet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != points.len() {
            return Err(Error::domain(format!(
                "{} weights for {} points",
                weights.len(),
                points.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::domain(format!("non-finite weight {w}")));
        }
        Ok(Self { points, weights })
    }

    /// The empirical measure: weight `1/N` on each point.
    pub fn uniform(points: PointSet) -> Self {
        let w = 1.0 / points.len() as f64;
        let weights = vec![w; points.len()];
        Self { points, weights }
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_charge(&self) -> f64 {
        self.weights.iter().copied().collect::<CompensatedSum>().value()
    }
}

fn kernel_at(spec: &KernelSpec, a: &SpherePoint, b: &SpherePoint, i: usize, j: usize) -> Result<f64> {
    let r = a.chord(b);
    if spec.singular_at_chord(r) {
        return Err(Error::SingularPair {
            kernel: spec.to_string(),
            i,
            j,
        });
    }
    Ok(spec.value_at_chord(r))
}

/// `Σ_i Σ_j K(|x_i - x_j|)`, with or without the diagonal.
fn pair_sum(pts: &PointSet, spec: &KernelSpec, policy: DiagonalPolicy) -> Result<f64> {
    let diagonal = match policy {
        DiagonalPolicy::Include if spec.singular_at_coincidence() => {
            return Err(Error::domain(format!(
                "kernel `{spec}` is singular at coincidence; the diagonal must be excluded"
            )))
        }
        DiagonalPolicy::Include => Some(spec.value_at_chord(0.0)),
        DiagonalPolicy::Exclude => None,
    };
    let p = pts.points();
    let s = block_sum(p.len(), |i, acc| {
        if let Some(d) = diagonal {
            acc.add(d);
        }
        for j in i + 1..p.len() {
            acc.add(2.0 * kernel_at(spec, &p[i], &p[j], i, j)?);
        }
        Ok::<(), Error>(())
    })?;
    if !s.is_finite() {
        return Err(Error::Overflow("kernel double sum"));
    }
    Ok(s)
}

fn closed_report(
    pts: &PointSet,
    spec: &KernelSpec,
    method: Method,
    diagonal: DiagonalPolicy,
    value: f64,
    flags: Vec<String>,
) -> DiscrepancyReport {
    DiscrepancyReport {
        kernel: spec.to_string(),
        m: spec.order(),
        method,
        diagonal,
        n: pts.len(),
        n_max: None,
        value,
        flags,
        tail_estimate: None,
    }
}

/// `(1/N) sqrt(max(0, S))` with `S` the filtered double sum of kernel values.
pub fn rms_discrepancy(pts: &PointSet, spec: &KernelSpec, policy: DiagonalPolicy) -> Result<DiscrepancyReport> {
    let s = pair_sum(pts, spec, policy)?;
    let mut flags = Vec::new();
    if s < 0.0 {
        flags.push(FLAG_NEGATIVE_SUM.to_string());
    }
    let value = s.max(0.0).sqrt() / pts.len() as f64;
    Ok(closed_report(pts, spec, Method::PairwiseRms, policy, value, flags))
}

/// `S / N²`, signed, with `S` the filtered double sum of kernel values.
pub fn mean_pair_discrepancy(
    pts: &PointSet,
    spec: &KernelSpec,
    policy: DiagonalPolicy,
) -> Result<DiscrepancyReport> {
    let value = mean_pair_value(pts, spec, policy)?;
    Ok(closed_report(pts, spec, Method::MeanPair, policy, value, Vec::new()))
}

fn mean_pair_value(pts: &PointSet, spec: &KernelSpec, policy: DiagonalPolicy) -> Result<f64> {
    let n = pts.len() as f64;
    Ok(pair_sum(pts, spec, policy)? / (n * n))
}

/// `(1/N²) Σ_{i≠j} K(x_i, x_j)`.
pub fn energy(pts: &PointSet, spec: &KernelSpec) -> Result<f64> {
    mean_pair_value(pts, spec, DiagonalPolicy::Exclude)
}

/// Per-degree sums `Σ_{i,j} P_n^{(m)}(x_i·x_j)` for `n = 0..=n_max`, diagonal included.
fn legendre_moments(pts: &PointSet, m: usize, n_max: usize) -> Vec<f64> {
    let p = pts.points();
    let n_pts = p.len();
    let blocks: Vec<Vec<CompensatedSum>> = (0..n_pts.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![CompensatedSum::new(); n_max + 1];
            for i in b * BLOCK..((b + 1) * BLOCK).min(n_pts) {
                for j in i + 1..n_pts {
                    let t = p[i].dot(&p[j]).clamp(-1.0, 1.0);
                    let mut rec = DerivativeRecurrence::new(t, m);
                    for slot in acc.iter_mut().skip(1) {
                        rec.advance();
                        slot.add(2.0 * rec.current()[m]);
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![CompensatedSum::new(); n_max + 1];
    for block in &blocks {
        for (t, b) in total.iter_mut().zip(block) {
            t.merge(b);
        }
    }
    let mut rec = DerivativeRecurrence::new(1.0, m);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    for t in total.iter_mut().skip(1) {
        rec.advance();
        t.add(n_pts as f64 * rec.current()[m]);
        out.push(t.value());
    }
    out
}

/// `(1/N) sqrt(max(0, Σ_n (2n+1)/(4π A_n²) Σ_{i,j} P_n^{(m)}(x_i·x_j)))`.
///
/// The diagonal is always included. The report carries a tail estimate and
/// is flagged when that estimate is large next to the inner sum.
pub fn series_generalized_discrepancy(
    pts: &PointSet,
    family: Family,
    m: usize,
    n_max: usize,
) -> Result<DiscrepancyReport> {
    if n_max == 0 {
        return Err(Error::domain("series truncation degree must be at least 1"));
    }
    if m > M_SERIES_MAX {
        return Err(Error::Capability(format!(
            "series discrepancy supports derivative orders up to {M_SERIES_MAX}, got {m}"
        )));
    }
    let symbols = SymbolSequence::new(family)?;
    let moments = legendre_moments(pts, m, n_max);
    let mut sum = CompensatedSum::new();
    let mut tail = TailTracker::new(n_max);
    let mut present = 0usize;
    for (n, moment) in moments.iter().enumerate().skip(1) {
        let w = symbols.weight(n);
        if w == 0.0 {
            continue;
        }
        present += 1;
        let term = w * moment;
        sum.add(term);
        tail.observe(n, term);
    }
    let s = sum.value();
    if !s.is_finite() {
        return Err(Error::Overflow("series discrepancy"));
    }
    let mut flags = Vec::new();
    if present == 0 {
        flags.push(FLAG_EMPTY_SUM.to_string());
    } else if tail.estimate() > SERIES_TAIL_RATIO * s.abs() {
        flags.push(FLAG_NOT_CONVERGED.to_string());
    }
    if s < 0.0 {
        flags.push(FLAG_NEGATIVE_SUM.to_string());
    }
    Ok(DiscrepancyReport {
        kernel: kernel_label(family, m),
        m,
        method: Method::Series,
        diagonal: DiagonalPolicy::Include,
        n: pts.len(),
        n_max: Some(n_max),
        value: s.max(0.0).sqrt() / pts.len() as f64,
        flags,
        tail_estimate: Some(tail.estimate()),
    })
}

/// The smallest series discrepancy over derivative orders `m_range`; ties go
/// to the smaller order.
pub fn min_generalized_discrepancy(
    pts: &PointSet,
    family: Family,
    m_range: &[usize],
    n_max: usize,
) -> Result<(usize, DiscrepancyReport)> {
    let mut orders = m_range.to_vec();
    orders.sort_unstable();
    orders.dedup();
    let mut best: Option<(usize, DiscrepancyReport)> = None;
    for m in orders {
        let report = series_generalized_discrepancy(pts, family, m, n_max)?;
        if best.as_ref().is_none_or(|(_, b)| report.value < b.value) {
            best = Some((m, report));
        }
    }
    best.ok_or_else(|| Error::domain("empty derivative-order range"))
}

/// `Q(a, b) = Σ_i Σ_j a_i b_j K(x_i·y_j)` over all pairs, coincidences included.
fn bilinear(a: &WeightedMeasure, b: &WeightedMeasure, spec: &KernelSpec) -> Result<f64> {
    let (pa, pb) = (a.points.points(), b.points.points());
    block_sum(pa.len(), |i, acc| {
        for (j, y) in pb.iter().enumerate() {
            acc.add(a.weights[i] * b.weights[j] * kernel_at(spec, &pa[i], y, i, j)?);
        }
        Ok::<(), Error>(())
    })
}

/// `sqrt(max(0, Q(μ,μ) + Q(ω,ω) - 2 Q(μ,ω)))`, the kernel distance between two measures.
pub fn signed_discrepancy(mu: &WeightedMeasure, omega: &WeightedMeasure, spec: &KernelSpec) -> Result<f64> {
    if spec.singular_at_coincidence() || spec.singular_at_antipode() {
        return Err(Error::Capability(format!(
            "measure discrepancy needs a kernel finite everywhere, such as `cui-freeden`; got `{spec}`"
        )));
    }
    let q = bilinear(mu, mu, spec)? + bilinear(omega, omega, spec)? - 2.0 * bilinear(mu, omega, spec)?;
    Ok(q.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::tetrahedron;

    fn cf() -> KernelSpec {
        KernelSpec::cui_freeden(0).unwrap()
    }

    fn single() -> PointSet {
        PointSet::from_coords(&[[0.0, 0.0, 1.0]]).unwrap()
    }

    fn antipodal() -> PointSet {
        PointSet::from_coords(&[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]).unwrap()
    }

    /// Direct double sum over the dot-product form, for comparison.
    fn brute(pts: &PointSet, spec: &KernelSpec, include: bool) -> f64 {
        let mut s = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for (j, b) in pts.iter().enumerate() {
                if i != j || include {
                    s += spec.eval_t(a.dot(b).clamp(-1.0, 1.0)).unwrap();
                }
            }
        }
        s
    }

    #[test]
    fn rms_examples() {
        assert_eq!(rms_discrepancy(&single(), &cf(), DiagonalPolicy::Include).unwrap().value, 1.0);
        let tet = tetrahedron();
        let want = brute(&tet, &cf(), true).sqrt() / 4.0;
        let got = rms_discrepancy(&tet, &cf(), DiagonalPolicy::Include).unwrap();
        assert!((got.value - want).abs() < 1e-14);
        assert!((got.value - 0.32347).abs() < 1e-5);
        assert!(!got.negative_sum_clamped());

        let r = rms_discrepancy(&antipodal(), &KernelSpec::pycke(0).unwrap(), DiagonalPolicy::Exclude).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.negative_sum_clamped());
    }

    #[test]
    fn mean_pair_and_energy_examples() {
        let riesz = KernelSpec::riesz(1.0, 0).unwrap();
        let r = mean_pair_discrepancy(&antipodal(), &riesz, DiagonalPolicy::Exclude).unwrap();
        assert!((r.value - 0.25).abs() < 1e-16);
        assert!((energy(&antipodal(), &riesz).unwrap() - 0.25).abs() < 1e-16);
        assert_eq!(energy(&single(), &riesz).unwrap(), 0.0);
        let tet = tetrahedron();
        let mp = mean_pair_discrepancy(&tet, &cf(), DiagonalPolicy::Exclude).unwrap();
        assert!((mp.value - brute(&tet, &cf(), false) / 16.0).abs() < 1e-14);
        assert!((mp.value + 0.145_364_2).abs() < 1e-6);
        assert_eq!(mp.value, energy(&tet, &cf()).unwrap());
    }

    #[test]
    fn singular_inputs() {
        let pycke = KernelSpec::pycke(0).unwrap();
        assert!(matches!(
            rms_discrepancy(&single(), &pycke, DiagonalPolicy::Include),
            Err(Error::Domain(_))
        ));
        let twice = PointSet::from_coords(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        match energy(&twice, &pycke) {
            Err(Error::SingularPair { i, j, .. }) => assert_eq!((i, j), (0, 2)),
            other => panic!("expected a singular pair, got {other:?}"),
        }
        let gine = KernelSpec::new(Family::Gine, 1).unwrap();
        assert!(energy(&antipodal(), &gine).is_err());
    }

    #[test]
    fn series_examples() {
        let r = series_generalized_discrepancy(&single(), Family::CuiFreeden, 0, 10_000).unwrap();
        assert!((r.value - (1.0 / (4.0 * std::f64::consts::PI)).sqrt()).abs() < 1e-4);
        assert!(r.flags.is_empty());

        let small = series_generalized_discrepancy(&single(), Family::Pycke, 0, 1_000).unwrap();
        let large = series_generalized_discrepancy(&single(), Family::Pycke, 0, 20_000).unwrap();
        assert!(large.value > small.value);
        assert!(large.has_flag(FLAG_NOT_CONVERGED));
        assert!(large.tail_estimate.unwrap() >= 0.9 * small.tail_estimate.unwrap());

        let empty = series_generalized_discrepancy(&single(), Family::Gine, 0, 1).unwrap();
        assert_eq!(empty.value, 0.0);
        assert!(empty.has_flag(FLAG_EMPTY_SUM));
        assert!(series_generalized_discrepancy(&single(), Family::Pycke, 5, 10).is_err());
    }

    #[test]
    fn series_matches_closed_form_on_antipodal_pair() {
        // the series carries the 1/(4π) of the addition theorem
        let series = series_generalized_discrepancy(&antipodal(), Family::CuiFreeden, 0, 10_000).unwrap();
        let closed = rms_discrepancy(&antipodal(), &cf(), DiagonalPolicy::Include).unwrap();
        let scaled = series.value * (4.0 * std::f64::consts::PI).sqrt();
        assert!((scaled - closed.value).abs() < 2e-3 * closed.value);
    }

    #[test]
    fn min_over_orders() {
        let tet = tetrahedron();
        let (m0, r0) = min_generalized_discrepancy(&tet, Family::CuiFreeden, &[0], 2000).unwrap();
        assert_eq!(m0, 0);
        assert_eq!(r0, series_generalized_discrepancy(&tet, Family::CuiFreeden, 0, 2000).unwrap());
        let (m, best) = min_generalized_discrepancy(&tet, Family::CuiFreeden, &[2, 1, 0], 2000).unwrap();
        for k in 0..3 {
            let r = series_generalized_discrepancy(&tet, Family::CuiFreeden, k, 2000).unwrap();
            assert!(best.value <= r.value);
            if k < m {
                assert!(r.value > best.value);
            }
        }
        assert!(min_generalized_discrepancy(&tet, Family::CuiFreeden, &[], 10).is_err());
    }

    #[test]
    fn signed_examples() {
        let x = PointSet::from_coords(&[[0.0, 1.0, 0.0]]).unwrap();
        let y = PointSet::from_coords(&[[0.0, -1.0, 0.0]]).unwrap();
        let dx = WeightedMeasure::uniform(x);
        let dy = WeightedMeasure::uniform(y);
        assert_eq!(signed_discrepancy(&dx, &dx, &cf()).unwrap(), 0.0);
        let d = signed_discrepancy(&dx, &dy, &cf()).unwrap();
        assert!((d - (4.0 * std::f64::consts::LN_2).sqrt()).abs() < 1e-12);
        assert!((d - 1.66511).abs() < 1e-5);

        let tet = tetrahedron();
        let mut shuffled = tet.points().to_vec();
        shuffled.rotate_left(1);
        let a = WeightedMeasure::uniform(tet);
        let b = WeightedMeasure::uniform(PointSet::new(shuffled).unwrap());
        assert!(signed_discrepancy(&a, &b, &cf()).unwrap() < 1e-7);
        assert!(matches!(
            signed_discrepancy(&a, &b, &KernelSpec::pycke(0).unwrap()),
            Err(Error::Capability(_))
        ));
        assert!(WeightedMeasure::new(a.points().clone(), vec![1.0]).is_err());
    }

    #[test]
    fn report_json_field_names() {
        let r = rms_discrepancy(&single(), &cf(), DiagonalPolicy::Include).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["N", "diagonal", "flags", "kernel", "m", "method", "n_max", "value"]);
        assert_eq!(v["method"], "pairwise_rms");
        assert_eq!(v["diagonal"], "include");
    }
}
