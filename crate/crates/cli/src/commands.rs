use std::io::Write;
use std::path::Path;

use sphere_eq::discrepancy::{
    mean_pair_discrepancy, min_generalized_discrepancy, rms_discrepancy, series_generalized_discrepancy,
    DiagonalPolicy,
};
use sphere_eq::interpolation::{epsilon_sweep, fit_interpolant, franke_eval, FitParams};
use sphere_eq::pointgen::{greedy_generate, random_unit_points, riesz_refine, RefineParams};
use sphere_eq::tables::{format_table, run_table1, run_table2, Table1Config, Table2Config};
use sphere_eq::{io, Error, KernelSpec, PointSet, Result};

use crate::{
    Command, ConvertArgs, Coordinates, Diagonal, FitArgs, Format, GenerateArgs, GenerateMethod, InterpolateArgs,
    RefineArgs, RefineParamsArgs, ScoreArgs, ScoreMethod, SweepArgs, Table1Args, Table2Args, TableArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Refine(a) => refine(a),
        Command::Score(a) => score(a),
        Command::Interpolate(a) => interpolate(a),
        Command::Sweep(a) => sweep(a),
        Command::Table1(a) => table1(a),
        Command::Table2(a) => table2(a),
        Command::Convert(a) => convert(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn kernel(name: &str) -> Result<KernelSpec> {
    name.parse()
}

fn format_points(pts: &PointSet, format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => io::format_pointset(pts),
        Format::Json => serde_json::to_string_pretty(pts.points())? + "\n",
    })
}

fn generate(a: GenerateArgs) -> Result<()> {
    let pts = match a.method {
        GenerateMethod::Greedy => greedy_generate(a.n, &kernel(&a.kernel)?, a.seed, a.grid)?,
        GenerateMethod::Random => random_unit_points(a.n, a.seed)?,
    };
    emit(a.output.out.as_deref(), &format_points(&pts, a.output.format)?)
}

fn refine_params(a: &RefineParamsArgs, seed: u64) -> RefineParams {
    RefineParams {
        k_neighbors: a.knn,
        iterations: a.iters,
        riesz_s: a.riesz_s,
        offset: a.offset,
        refresh: a.refresh,
        seed,
    }
}

fn refine(a: RefineArgs) -> Result<()> {
    let start = match (&a.input, a.n) {
        (Some(path), None) => io::read_pointset(path)?,
        (None, Some(n)) => random_unit_points(n, a.seed)?,
        _ => return Err(Error::Domain("give exactly one of --input and --n".into())),
    };
    let result = riesz_refine(&start, &refine_params(&a.params, a.seed))?;
    if let Some(path) = &a.history {
        std::fs::write(path, io::format_history(&result.history))?;
    }
    emit(a.output.out.as_deref(), &format_points(&result.points, a.output.format)?)
}

fn score(a: ScoreArgs) -> Result<()> {
    let pts = io::read_pointset(&a.input)?;
    let spec = kernel(&a.kernel)?;
    let policy = match a.diagonal {
        Some(Diagonal::Include) => DiagonalPolicy::Include,
        Some(Diagonal::Exclude) => DiagonalPolicy::Exclude,
        None => DiagonalPolicy::natural_for(&spec),
    };
    let series_order = || {
        if spec.order() > 0 && a.m > 0 {
            Err(Error::Domain("give the derivative order either in the kernel name or with --m".into()))
        } else {
            Ok(spec.order() + a.m)
        }
    };
    let report = match a.method {
        ScoreMethod::Rms => rms_discrepancy(&pts, &spec, policy)?,
        ScoreMethod::MeanPair => mean_pair_discrepancy(&pts, &spec, policy)?,
        ScoreMethod::Energy => mean_pair_discrepancy(&pts, &spec, DiagonalPolicy::Exclude)?,
        ScoreMethod::Series => series_generalized_discrepancy(&pts, spec.family(), series_order()?, a.nmax)?,
        ScoreMethod::MinSeries => {
            let orders: Vec<usize> = (0..=series_order()?).collect();
            min_generalized_discrepancy(&pts, spec.family(), &orders, a.nmax)?.1
        }
    };
    let text = match a.format {
        Format::Json => io::format_report_json(&report)?,
        Format::Csv => io::format_report_csv(&report),
    };
    emit(a.out.as_deref(), &text)
}

fn fit_params(fit: &FitArgs, epsilon: f64) -> Result<FitParams> {
    Ok(FitParams::new(kernel(&fit.kernel)?, epsilon, fit.sigma, fit.degree))
}

fn franke_values(pts: &PointSet) -> Vec<f64> {
    pts.iter().map(|p| franke_eval(p.coords())).collect()
}

fn interpolate(a: InterpolateArgs) -> Result<()> {
    let centers = io::read_pointset(&a.input)?;
    let model = fit_interpolant(&centers, &franke_values(&centers), &fit_params(&a.fit, a.epsilon)?)?;
    emit(a.out.as_deref(), &(model.to_json()? + "\n"))
}

fn sweep(a: SweepArgs) -> Result<()> {
    let grid = io::parse_epsilon_grid(&a.epsilon)?;
    let centers = match &a.input {
        Some(path) => io::read_pointset(path)?,
        None => greedy_generate(a.n, &KernelSpec::pycke(0)?, a.seed, a.grid)?,
    };
    let params = fit_params(&a.fit, grid[0])?;
    let report = epsilon_sweep(&centers, &franke_values(&centers), &params, &grid)?;
    log::info!("best epsilon {} with mse {:e}", report.best_epsilon, report.best_mse);
    emit(a.out.as_deref(), &io::format_sweep(&report))
}

fn sizes_and_seeds(t: &TableArgs, sizes: Vec<usize>, seeds: Vec<u64>) -> (Vec<usize>, Vec<u64>) {
    (
        if t.n.is_empty() { sizes } else { t.n.clone() },
        if t.seed.is_empty() { seeds } else { t.seed.clone() },
    )
}

fn table1(a: Table1Args) -> Result<()> {
    let defaults = Table1Config::default();
    let (sizes, seeds) = sizes_and_seeds(&a.table, defaults.sizes, defaults.seeds);
    let rows = run_table1(&Table1Config {
        sizes,
        seeds,
        grid_size: a.grid,
    })?;
    emit(a.table.out.as_deref(), &format_table(&rows))
}

fn table2(a: Table2Args) -> Result<()> {
    let defaults = Table2Config::default();
    let (sizes, seeds) = sizes_and_seeds(&a.table, defaults.sizes, defaults.seeds);
    let rows = run_table2(&Table2Config {
        sizes,
        seeds,
        refine: refine_params(&a.params, 0),
    })?;
    emit(a.table.out.as_deref(), &format_table(&rows))
}

fn convert(a: ConvertArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.input)?;
    let out = match a.to {
        Coordinates::Spherical => io::format_spherical(&io::parse_pointset(&text)?)?,
        Coordinates::Cartesian => io::format_pointset(&io::parse_spherical(&text)?),
    };
    emit(a.out.as_deref(), &out)
}
