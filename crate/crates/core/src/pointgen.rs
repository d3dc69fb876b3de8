//! Point generation: seeded random sampling, greedy kernel-sum minimization
//! and nearest-neighbor Riesz refinement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::discrepancy::{mean_pair_discrepancy, DiagonalPolicy};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::points::{chord, dot, PointSet, SpherePoint};

/// Default size of the greedy candidate grid.
pub const DEFAULT_GRID_SIZE: usize = 8192;
/// Smallest accepted candidate grid.
pub const MIN_GRID_SIZE: usize = 16;

const POLISH_MIN_STEP: f64 = 1e-10;
const POLISH_MAX_STEP: f64 = 0.5;
const POLISH_MAX_ITERS: usize = 500;

fn draw_unit<R: Rng>(rng: &mut R) -> SpherePoint {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if let Ok(p) = SpherePoint::normalize(v) {
            return p;
        }
    }
}

/// `n` independent normalized standard normal draws.
pub fn random_unit_points(n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::domain("point count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n).map(|_| draw_unit(&mut rng)).collect();
    Ok(PointSet::new(points)?
        .with_seed(seed)
        .with_provenance("random"))
}

/// A spherical Fibonacci lattice, the search space of the greedy argmin.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    points: PointSet,
}

impl CandidateGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < MIN_GRID_SIZE {
            return Err(Error::domain(format!(
                "candidate grid needs at least {MIN_GRID_SIZE} points, got {m}"
            )));
        }
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let points = (0..m)
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / m as f64;
                let rho = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                SpherePoint::normalize([rho * phi.cos(), rho * phi.sin(), z])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            points: PointSet::new(points)?.with_provenance(format!("fibonacci:{m}")),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }
}

/// `M` Fibonacci lattice points; `M >= 16`.
pub fn candidate_grid(m: usize) -> Result<CandidateGrid> {
    CandidateGrid::new(m)
}

/// The seeded first point of a greedy sequence: one normalized Gaussian draw.
pub fn greedy_initial(seed: u64) -> SpherePoint {
    draw_unit(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn kernel_sum(spec: &KernelSpec, pts: &[SpherePoint], x: [f64; 3]) -> f64 {
    pts.iter()
        .map(|p| spec.value_at_chord(chord(x, p.coords())))
        .fold(0.0, |a, b| a + b)
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = dot(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Projected gradient descent on `Σ_i K(x·p_i)` with step doubling on
/// success and halving on failure.
fn polish(spec: &KernelSpec, pts: &[SpherePoint], start: [f64; 3], initial_step: f64) -> [f64; 3] {
    let mut x = start;
    let mut fx = kernel_sum(spec, pts, x);
    let mut step = initial_step;
    for _ in 0..POLISH_MAX_ITERS {
        // gradient of the objective in R³, up to a positive factor
        let mut g = [0.0; 3];
        for p in pts {
            let c = p.coords();
            let slope = spec.slope_at_chord(chord(x, c));
            for k in 0..3 {
                g[k] += slope * c[k];
            }
        }
        let radial = dot(g, x);
        let g = [g[0] - radial * x[0], g[1] - radial * x[1], g[2] - radial * x[2]];
        let gn = dot(g, g).sqrt();
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        loop {
            let y = normalized([
                x[0] - step * g[0] / gn,
                x[1] - step * g[1] / gn,
                x[2] - step * g[2] / gn,
            ]);
            let fy = kernel_sum(spec, pts, y);
            if fy < fx {
                x = y;
                fx = fy;
                step = (2.0 * step).min(POLISH_MAX_STEP);
                break;
            }
            step *= 0.5;
            if step < POLISH_MIN_STEP {
                return x;
            }
        }
    }
    x
}

/// Incremental greedy generation: keeps the kernel potential on the grid up
/// to date so each step costs one pass over the grid plus a local polish.
#[derive(Debug, Clone)]
pub struct GreedyGenerator {
    spec: KernelSpec,
    grid: CandidateGrid,
    potential: Vec<f64>,
    points: Vec<SpherePoint>,
}

impl GreedyGenerator {
    pub fn new(spec: KernelSpec, grid: CandidateGrid, first: SpherePoint) -> Self {
        let mut g = Self {
            spec,
            potential: vec![0.0; grid.len()],
            grid,
            points: Vec::new(),
        };
        g.push(first);
        g
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    fn push(&mut self, p: SpherePoint) {
        let spec = self.spec;
        let c = p.coords();
        self.potential
            .par_iter_mut()
            .zip(self.grid.points.points().par_iter())
            .for_each(|(v, g)| *v += spec.value_at_chord(chord(g.coords(), c)));
        self.points.push(p);
    }

    /// Appends and returns the next greedy point.
    pub fn step(&mut self) -> Result<SpherePoint> {
        let next = next_from_potential(&self.spec, &self.grid, &self.potential, &self.points)?;
        self.push(next);
        Ok(next)
    }

    pub fn into_points(self) -> Vec<SpherePoint> {
        self.points
    }
}

fn next_from_potential(
    spec: &KernelSpec,
    grid: &CandidateGrid,
    potential: &[f64],
    pts: &[SpherePoint],
) -> Result<SpherePoint> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in potential.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
            best = Some((j, v));
        }
    }
    let (j, _) = best.ok_or_else(|| {
        Error::Configuration(format!(
            "every candidate of the {}-point grid is singular for `{spec}`",
            grid.len()
        ))
    })?;
    let spacing = (4.0 * std::f64::consts::PI / grid.len() as f64).sqrt();
    let x = polish(spec, pts, grid.points.points()[j].coords(), spacing);
    SpherePoint::new(x).or_else(|_| SpherePoint::normalize(x))
}

/// The grid point minimizing `Σ_i K(η_i·η)`, refined by local descent.
pub fn greedy_next(pts: &PointSet, spec: &KernelSpec, grid: &CandidateGrid) -> Result<SpherePoint> {
    let potential: Vec<f64> = grid
        .points
        .points()
        .par_iter()
        .map(|g| {
            pts.iter()
                .fold(0.0, |a, p| a + spec.value_at_chord(chord(g.coords(), p.coords())))
        })
        .collect();
    next_from_potential(spec, grid, &potential, pts.points())
}

/// `n` greedy points started from [`greedy_initial`]; identical to repeated
/// [`greedy_next`] calls.
pub fn greedy_generate(n: usize, spec: &KernelSpec, seed: u64, grid_size: usize) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::domain("point count must be at least 1"));
    }
    let grid = CandidateGrid::new(grid_size)?;
    let mut gen = GreedyGenerator::new(*spec, grid, greedy_initial(seed));
    for _ in 1..n {
        gen.step()?;
    }
    Ok(PointSet::new(gen.into_points())?
        .with_seed(seed)
        .with_provenance(format!("greedy:{spec}:M={grid_size}")))
}

/// Indices of the `k` nearest other points of each point, nearest first,
/// ties to the lower index.
pub fn knn_indices(pts: &PointSet, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = pts.len();
    if k == 0 || k >= n {
        return Err(Error::domain(format!(
            "neighbor count must lie in 1..{n} for {n} points, got {k}"
        )));
    }
    let p = pts.points();
    Ok(p.par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut d: Vec<(f64, usize)> = p
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, y)| (x.chord(y), j))
                .collect();
            d.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect())
}

/// Parameters of the nearest-neighbor Riesz refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineParams {
    /// Neighbors per point, `K'`.
    pub k_neighbors: usize,
    /// Iteration count `T`.
    pub iterations: usize,
    /// Riesz exponent `s > 0` of the repulsion.
    pub riesz_s: f64,
    /// Step offset `C₂`: iteration `t` steps by `Δ/(t + C₂)`.
    pub offset: f64,
    /// Neighbor lists are rebuilt every this many iterations.
    pub refresh: usize,
    /// Seed for the random start of [`riesz_refine_random`].
    pub seed: u64,
}

impl Default for RefineParams {
    fn default() -> Self {
        Self {
            k_neighbors: 12,
            iterations: 200,
            riesz_s: 1.0,
            offset: 19.0,
            refresh: 10,
            seed: 0,
        }
    }
}

impl RefineParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k_neighbors == 0 || self.k_neighbors >= n {
            return Err(Error::domain(format!(
                "neighbor count must lie in 1..{n} for {n} points, got {}",
                self.k_neighbors
            )));
        }
        if self.iterations == 0 || self.refresh == 0 {
            return Err(Error::domain("iterations and refresh period must be positive"));
        }
        if !(self.riesz_s > 0.0 && self.riesz_s.is_finite()) {
            return Err(Error::domain(format!("Riesz exponent must be positive, got {}", self.riesz_s)));
        }
        if !(self.offset > 0.0 && self.offset.is_finite()) {
            return Err(Error::domain(format!("step offset must be positive, got {}", self.offset)));
        }
        Ok(())
    }
}

/// Refined points and the Cui-Freeden mean-pair discrepancy (diagonal
/// included) after each iteration.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub points: PointSet,
    pub history: Vec<f64>,
}

fn refine_point(x: [f64; 3], neighbors: &[usize], current: &[SpherePoint], s: f64, scale: f64) -> [f64; 3] {
    let mut g = [0.0; 3];
    let mut nearest = f64::INFINITY;
    for &j in neighbors {
        let y = current[j].coords();
        let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
        let r = dot(d, d).sqrt();
        nearest = nearest.min(r);
        let w = s / r.powf(s + 2.0);
        for k in 0..3 {
            g[k] += w * d[k];
        }
    }
    let gn = dot(g, g).sqrt();
    if gn == 0.0 || !gn.is_finite() {
        return x;
    }
    let step = nearest * scale / gn;
    normalized([x[0] + step * g[0], x[1] + step * g[1], x[2] + step * g[2]])
}

/// Moves every point along its normalized neighbor repulsion, Jacobi style,
/// by the nearest-neighbor distance over `t + C₂`.
pub fn riesz_refine(pts: &PointSet, params: &RefineParams) -> Result<Refinement> {
    params.validate(pts.len())?;
    let scorer = KernelSpec::cui_freeden(0)?;
    let mut current = pts.clone();
    let mut neighbors = Vec::new();
    let mut history = Vec::with_capacity(params.iterations);
    for t in 0..params.iterations {
        if t % params.refresh == 0 {
            neighbors = knn_indices(&current, params.k_neighbors)?;
        }
        if t == 0 {
            let p = current.points();
            for (i, row) in neighbors.iter().enumerate() {
                if p[i].chord(&p[row[0]]) == 0.0 {
                    return Err(Error::SingularPair {
                        kernel: format!("riesz:s={}", params.riesz_s),
                        i: i.min(row[0]),
                        j: i.max(row[0]),
                    });
                }
            }
        }
        let scale = 1.0 / (t as f64 + params.offset);
        let prev = current.points();
        let next: Vec<SpherePoint> = prev
            .par_iter()
            .zip(neighbors.par_iter())
            .map(|(x, nb)| {
                SpherePoint::from_raw_unchecked(refine_point(x.coords(), nb, prev, params.riesz_s, scale))
            })
            .collect();
        current = PointSet::new(next)?;
        history.push(mean_pair_discrepancy(&current, &scorer, DiagonalPolicy::Include)?.value);
    }
    let mut out = PointSet::new(current.into_points())?.with_provenance(format!(
        "riesz-refine:s={}:k={}:T={}",
        params.riesz_s, params.k_neighbors, params.iterations
    ));
    if let Some(seed) = pts.seed() {
        out = out.with_seed(seed);
    }
    Ok(Refinement { points: out, history })
}

/// Refines `n` random points drawn with `params.seed`.
pub fn riesz_refine_random(n: usize, params: &RefineParams) -> Result<Refinement> {
    riesz_refine(&random_unit_points(n, params.seed)?, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::tetrahedron;

    #[test]
    fn random_points_are_deterministic_and_unit() {
        assert_eq!(random_unit_points(1, 0).unwrap(), random_unit_points(1, 0).unwrap());
        let pts = random_unit_points(1000, 1).unwrap();
        assert!(pts.iter().all(|p| (dot(p.coords(), p.coords()).sqrt() - 1.0).abs() < 1e-12));
        let big = random_unit_points(10_000, 2).unwrap();
        let mut mean = [0.0; 3];
        for p in &big {
            for k in 0..3 {
                mean[k] += p.coords()[k] / 10_000.0;
            }
        }
        assert!(dot(mean, mean).sqrt() < 0.05);
        assert!(random_unit_points(0, 0).is_err());
    }

    #[test]
    fn grid() {
        let g = candidate_grid(16).unwrap();
        assert_eq!(g.len(), 16);
        let p = g.points().points();
        for i in 0..16 {
            for j in i + 1..16 {
                assert!(p[i].chord(&p[j]) > 0.3);
            }
        }
        assert!(candidate_grid(2).is_err());
        assert_eq!(candidate_grid(100).unwrap(), candidate_grid(100).unwrap());
    }

    #[test]
    fn initial_point() {
        assert_eq!(greedy_initial(0), greedy_initial(0));
        assert_ne!(greedy_initial(0), greedy_initial(1));
    }

    #[test]
    fn greedy_next_examples() {
        let grid = candidate_grid(4096).unwrap();
        let p = greedy_initial(3);
        let single = PointSet::new(vec![p]).unwrap();
        for m in [0, 2] {
            let q = greedy_next(&single, &KernelSpec::pycke(m).unwrap(), &grid).unwrap();
            assert!(q.chord(&p.antipode()) < 1e-6, "m={m}: {q:?}");
        }
        let pair = PointSet::new(vec![p, p.antipode()]).unwrap();
        let q = greedy_next(&pair, &KernelSpec::pycke(1).unwrap(), &grid).unwrap();
        assert!(q.dot(&p).abs() < 1e-6);
    }

    #[test]
    fn greedy_all_singular() {
        let grid = candidate_grid(16).unwrap();
        let pts = grid.points().clone();
        let e = greedy_next(&pts, &KernelSpec::pycke(0).unwrap(), &grid);
        assert!(matches!(e, Err(Error::Configuration(_))));
    }

    #[test]
    fn generator_matches_repeated_next() {
        let spec = KernelSpec::pycke(1).unwrap();
        let fast = greedy_generate(12, &spec, 9, 512).unwrap();
        let grid = candidate_grid(512).unwrap();
        let mut slow = vec![greedy_initial(9)];
        for _ in 1..12 {
            let set = PointSet::new(slow.clone()).unwrap();
            slow.push(greedy_next(&set, &spec, &grid).unwrap());
        }
        assert_eq!(fast.points(), &slow[..]);
    }

    #[test]
    fn knn_examples() {
        let tet = tetrahedron();
        let nb = knn_indices(&tet, 3).unwrap();
        for (i, row) in nb.iter().enumerate() {
            let mut r = row.clone();
            r.sort();
            let want: Vec<usize> = (0..4).filter(|&j| j != i).collect();
            assert_eq!(r, want);
        }
        let pair = PointSet::from_coords(&[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(knn_indices(&pair, 1).unwrap(), vec![vec![1], vec![0]]);
        assert!(knn_indices(&pair, 2).is_err());
    }

    #[test]
    fn refine_antipodal_pair_is_fixed() {
        let pair = PointSet::from_coords(&[[0.0, 0.6, 0.8], [0.0, -0.6, -0.8]]).unwrap();
        let params = RefineParams {
            k_neighbors: 1,
            iterations: 10,
            ..RefineParams::default()
        };
        let out = riesz_refine(&pair, &params).unwrap();
        for (a, b) in out.points.iter().zip(pair.iter()) {
            assert!(a.chord(b) < 1e-12);
        }
        assert_eq!(out.history.len(), 10);
    }

    #[test]
    fn refine_rejects_bad_params_and_duplicates() {
        let pts = random_unit_points(10, 1).unwrap();
        let bad = RefineParams {
            k_neighbors: 10,
            ..RefineParams::default()
        };
        assert!(riesz_refine(&pts, &bad).is_err());
        let dup = PointSet::from_coords(&[[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let p = RefineParams {
            k_neighbors: 1,
            ..RefineParams::default()
        };
        assert!(matches!(riesz_refine(&dup, &p), Err(Error::SingularPair { .. })));
    }
}
