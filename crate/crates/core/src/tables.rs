//! The two discrepancy tables: greedy nodes scored with the Cui-Freeden
//! kernel, and Riesz-refined random nodes scored with the Cui-Freeden
//! kernel and its derivatives.

use std::fmt::Write as _;

use crate::discrepancy::{mean_pair_discrepancy, rms_discrepancy, DiagonalPolicy};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::pointgen::{greedy_generate, random_unit_points, riesz_refine, RefineParams, DEFAULT_GRID_SIZE};

/// Point counts of both tables.
pub const TABLE_SIZES: [usize; 9] = [15, 43, 86, 151, 206, 313, 529, 719, 998];
/// Default seeds of the greedy table.
pub const TABLE1_SEEDS: [u64; 1] = [42];
/// Default seed panel of the refinement table.
pub const TABLE2_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// One cell: the median over seeds of a discrepancy.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub n: usize,
    pub kernel: String,
    pub d: f64,
}

pub fn format_table(rows: &[TableRow]) -> String {
    let mut out = String::from("N,kernel,D\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{:.16e}", r.n, r.kernel, r.d);
    }
    out
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn check(sizes: &[usize], seeds: &[u64]) -> Result<()> {
    if sizes.is_empty() || seeds.is_empty() {
        return Err(Error::domain("tables need at least one size and one seed"));
    }
    if sizes.contains(&0) {
        return Err(Error::domain("table sizes must be positive"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Config {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub grid_size: usize,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            sizes: TABLE_SIZES.to_vec(),
            seeds: TABLE1_SEEDS.to_vec(),
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

/// Greedy nodes of Pycke's kernel and its two derivatives, scored with the
/// Cui-Freeden rms discrepancy (diagonal included).
///
/// A greedy sequence of length `N` is a prefix of any longer one, so each
/// kernel and seed is generated once at the largest size.
pub fn run_table1(config: &Table1Config) -> Result<Vec<TableRow>> {
    check(&config.sizes, &config.seeds)?;
    let largest = *config.sizes.iter().max().expect("sizes checked non-empty");
    let scorer = KernelSpec::cui_freeden(0)?;
    let mut rows = Vec::new();
    let mut columns = Vec::new();
    for m in 0..=2 {
        let spec = KernelSpec::pycke(m)?;
        let sets = config
            .seeds
            .iter()
            .map(|&seed| greedy_generate(largest, &spec, seed, config.grid_size))
            .collect::<Result<Vec<_>>>()?;
        columns.push((spec, sets));
    }
    for &n in &config.sizes {
        for (spec, sets) in &columns {
            let values = sets
                .iter()
                .map(|s| Ok(rms_discrepancy(&s.prefix(n)?, &scorer, DiagonalPolicy::Include)?.value))
                .collect::<Result<Vec<_>>>()?;
            rows.push(TableRow {
                n,
                kernel: spec.to_string(),
                d: median(values),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Config {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub refine: RefineParams,
}

impl Default for Table2Config {
    fn default() -> Self {
        Self {
            sizes: TABLE_SIZES.to_vec(),
            seeds: TABLE2_SEEDS.to_vec(),
            refine: RefineParams::default(),
        }
    }
}

/// Random nodes refined by the neighbor Riesz iteration, scored by the
/// Cui-Freeden mean-pair discrepancy and its first and second derivative
/// kernels (diagonal included only where the kernel is finite).
pub fn run_table2(config: &Table2Config) -> Result<Vec<TableRow>> {
    check(&config.sizes, &config.seeds)?;
    let kernels = [
        KernelSpec::cui_freeden(0)?,
        KernelSpec::cui_freeden(1)?,
        KernelSpec::cui_freeden(2)?,
    ];
    let mut rows = Vec::new();
    for &n in &config.sizes {
        let mut values = vec![Vec::new(); kernels.len()];
        for &seed in &config.seeds {
            let refined = riesz_refine(&random_unit_points(n, seed)?, &config.refine)?.points;
            for (k, spec) in kernels.iter().enumerate() {
                let policy = DiagonalPolicy::natural_for(spec);
                values[k].push(mean_pair_discrepancy(&refined, spec, policy)?.value);
            }
        }
        for (spec, v) in kernels.iter().zip(values) {
            rows.push(TableRow {
                n,
                kernel: spec.to_string(),
                d: median(v),
            });
        }
    }
    Ok(rows)
}
