#![allow(dead_code)]

use sphere_eq::discrepancy::WeightedMeasure;
use sphere_eq::interpolation::{franke_eval, FitParams};
use sphere_eq::pointgen::random_unit_points;
use sphere_eq::{KernelSpec, PointSet, SpherePoint};

/// Rotation matrix of the unit quaternion along `q`.
pub fn rotation(q: [f64; 4]) -> [[f64; 3]; 3] {
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

pub fn rotate(pts: &PointSet, r: &[[f64; 3]; 3]) -> PointSet {
    let coords: Vec<[f64; 3]> = pts
        .iter()
        .map(|p| {
            let c = p.coords();
            r.map(|row| row[0] * c[0] + row[1] * c[1] + row[2] * c[2])
        })
        .collect();
    PointSet::new(coords.iter().map(|&c| SpherePoint::normalize(c).unwrap()).collect()).unwrap()
}

pub fn permute(pts: &PointSet, order: &[usize]) -> PointSet {
    PointSet::new(order.iter().map(|&i| pts.points()[i]).collect()).unwrap()
}

/// A permutation of `0..n` from a seed, by a Lehmer-style shuffle.
pub fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let j = ((state >> 33) % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    order
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `Q(ν, ν)` for the signed measure `ν = μ - ω`, summed directly over the
/// merged support.
pub fn direct_quadratic(mu: &WeightedMeasure, omega: &WeightedMeasure, spec: &KernelSpec) -> f64 {
    let support: Vec<(SpherePoint, f64)> = mu
        .points()
        .iter()
        .copied()
        .zip(mu.weights().iter().copied())
        .chain(omega.points().iter().copied().zip(omega.weights().iter().map(|w| -w)))
        .collect();
    let mut q = 0.0;
    for (p, a) in &support {
        for (r, b) in &support {
            q += a * b * spec.eval_chord(p.chord(r)).unwrap();
        }
    }
    q
}

pub fn random_measure(n: usize, seed: u64) -> WeightedMeasure {
    let pts = random_unit_points(n, seed).unwrap();
    let weights = (0..n)
        .map(|i| {
            let z = pts.points()[(i + 1) % n].coords()[2];
            0.1 + z.abs()
        })
        .collect();
    WeightedMeasure::new(pts, weights).unwrap()
}

/// One instance of the fast/slow cross-validation panel.
pub struct LoocvInstance {
    pub centers: PointSet,
    pub values: Vec<f64>,
    pub params: FitParams,
}

/// Twenty instances spanning N in 8..=40, σ in {0, 0.1}, tail degree in
/// {-1, 0, 1}.
pub fn loocv_panel() -> Vec<LoocvInstance> {
    let cf = KernelSpec::cui_freeden(0).unwrap();
    (0..20)
        .map(|i| {
            let n = 8 + (i * 7) % 33;
            let centers = random_unit_points(n, 100 + i as u64).unwrap();
            let values = franke_values(&centers);
            let sigma = if i % 2 == 0 { 0.0 } else { 0.1 };
            let degree = (i % 3) as i32 - 1;
            let epsilon = 0.5 + 0.25 * (i % 5) as f64;
            LoocvInstance {
                centers,
                values,
                params: FitParams::new(cf, epsilon, sigma, degree),
            }
        })
        .collect()
}

pub fn franke_values(pts: &PointSet) -> Vec<f64> {
    pts.iter().map(|p| franke_eval(p.coords())).collect()
}

pub fn max_fast_slow_gap(inst: &LoocvInstance) -> f64 {
    use sphere_eq::interpolation::{loocv_errors_fast, loocv_errors_slow};
    let fast = loocv_errors_fast(&inst.centers, &inst.values, &inst.params).unwrap();
    let slow = loocv_errors_slow(&inst.centers, &inst.values, &inst.params).unwrap();
    fast.iter()
        .zip(&slow)
        .map(|(f, s)| (f - s.expect("leave-one-out fit succeeds")).abs())
        .fold(0.0, f64::max)
}
