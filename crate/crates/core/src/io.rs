//! File formats and coordinate conversion.
//!
//! Point sets are CSV with a `x,y,z` header and one point per row, written
//! with 17 significant digits so that a write/read cycle is bit-exact.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::discrepancy::DiscrepancyReport;
use crate::error::{Error, Result};
use crate::interpolation::SweepReport;
use crate::points::{norm, PointSet, SpherePoint, UNIT_TOLERANCE};

/// Rows whose norm is off by more than this are rejected on read.
pub const READ_REJECT_TOLERANCE: f64 = 1e-6;
/// Rows off by more than this are renormalized with a warning.
pub const READ_WARN_TOLERANCE: f64 = 1e-9;
/// Largest grid accepted by [`parse_epsilon_grid`].
pub const MAX_GRID_LEN: usize = 1_000_000;

/// `(sin θ cos φ, sin θ sin φ, cos θ)` for `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
pub fn spherical_to_cartesian(theta: f64, phi: f64) -> Result<SpherePoint> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::domain(format!("polar angle {theta} outside [0, π]")));
    }
    if !(0.0..TAU).contains(&phi) {
        return Err(Error::domain(format!("azimuth {phi} outside [0, 2π)")));
    }
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    SpherePoint::new([st * cp, st * sp, ct])
}

/// `(θ, φ)` of a unit vector; the azimuth of the poles is 0.
pub fn cartesian_to_spherical(p: [f64; 3]) -> Result<(f64, f64)> {
    let n = norm(p);
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::domain(format!("{p:?} is not a unit vector")));
    }
    let rho = p[0].hypot(p[1]);
    let theta = rho.atan2(p[2]);
    if rho == 0.0 {
        return Ok((theta, 0.0));
    }
    let mut phi = p[1].atan2(p[0]);
    if phi < 0.0 {
        phi += TAU;
    }
    if phi >= TAU {
        phi = 0.0;
    }
    Ok((theta, phi))
}

fn split_row(line: &str, lineno: usize, width: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != width {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected {width} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("`{f}` is not a number"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse {
                    line: lineno,
                    msg: format!("non-finite value `{f}`"),
                })
            }
        })
        .collect()
}

/// Data rows of a CSV with the given header, as `(line number, fields)`.
/// Blank lines and lines starting with `#` are skipped.
fn csv_rows(text: &str, header: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let width = header.split(',').count();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h.split(',').map(str::trim).eq(header.split(',')) => {}
        Some((n, h)) => {
            return Err(Error::Parse {
                line: n,
                msg: format!("expected header `{header}`, found `{h}`"),
            })
        }
        None => return Err(Error::Parse { line: 1, msg: format!("missing header `{header}`") }),
    }
    lines.map(|(n, l)| Ok((n, split_row(l, n, width)?))).collect()
}

/// Parses point-set CSV text.
///
/// Rows within [`UNIT_TOLERANCE`] of the sphere are kept bit for bit; rows
/// within [`READ_REJECT_TOLERANCE`] are renormalized (with a logged warning
/// beyond [`READ_WARN_TOLERANCE`]); anything else is a validation error.
pub fn parse_pointset(text: &str) -> Result<PointSet> {
    let mut points = Vec::new();
    for (line, v) in csv_rows(text, "x,y,z")? {
        let v = [v[0], v[1], v[2]];
        let dev = (norm(v) - 1.0).abs();
        if dev > READ_REJECT_TOLERANCE {
            return Err(Error::Validation(format!("line {line}: norm {} is not 1", norm(v))));
        }
        if dev > READ_WARN_TOLERANCE {
            log::warn!("line {line}: norm off by {dev:.2e}, renormalized");
        }
        points.push(match SpherePoint::new(v) {
            Ok(p) => p,
            Err(_) => SpherePoint::normalize(v)?,
        });
    }
    if points.is_empty() {
        return Err(Error::Validation("point set file has no rows".into()));
    }
    PointSet::new(points)
}

pub fn format_pointset(pts: &PointSet) -> String {
    let mut out = String::from("x,y,z\n");
    for p in pts {
        let [x, y, z] = p.coords();
        let _ = writeln!(out, "{x:.16e},{y:.16e},{z:.16e}");
    }
    out
}

pub fn read_pointset(path: impl AsRef<Path>) -> Result<PointSet> {
    parse_pointset(&fs::read_to_string(path)?)
}

pub fn write_pointset(path: impl AsRef<Path>, pts: &PointSet) -> Result<()> {
    Ok(fs::write(path, format_pointset(pts))?)
}

/// Parses a `theta,phi` CSV (radians) into unit vectors.
pub fn parse_spherical(text: &str) -> Result<PointSet> {
    let points = csv_rows(text, "theta,phi")?
        .into_iter()
        .map(|(line, v)| {
            spherical_to_cartesian(v[0], v[1]).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if points.is_empty() {
        return Err(Error::Validation("spherical file has no rows".into()));
    }
    PointSet::new(points)
}

pub fn format_spherical(pts: &PointSet) -> Result<String> {
    let mut out = String::from("theta,phi\n");
    for p in pts {
        let (t, f) = cartesian_to_spherical(p.coords())?;
        let _ = writeln!(out, "{t:.16e},{f:.16e}");
    }
    Ok(out)
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or a comma
/// separated list.
pub fn parse_epsilon_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::domain(format!("`{s}` is not a number in grid `{text}`")))?;
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(Error::domain(format!("grid values must be positive, got `{s}`")))
        }
    };
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::domain("empty grid"));
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if stop < start {
                return Err(Error::domain(format!("grid stop {stop} is below start {start}")));
            }
            let span = (stop - start) / step;
            if span >= MAX_GRID_LEN as f64 {
                return Err(Error::domain(format!("grid has more than {MAX_GRID_LEN} points")));
            }
            // tolerate rounding of the quotient so that 0.5:6:0.01 ends at 6
            let count = (span + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        [_] => {
            let v = text.split(',').map(num).collect::<Result<Vec<_>>>()?;
            if v.len() > MAX_GRID_LEN {
                return Err(Error::domain(format!("grid has more than {MAX_GRID_LEN} points")));
            }
            Ok(v)
        }
        _ => Err(Error::domain(format!("grid `{text}` is neither start:stop:step nor a list"))),
    }
}

pub fn format_sweep(report: &SweepReport) -> String {
    let mut out = String::from("epsilon,mse,status\n");
    for r in &report.rows {
        let mse = r.mse.map(|m| format!("{m:.16e}")).unwrap_or_default();
        let _ = writeln!(out, "{},{mse},{}", r.epsilon, r.status);
    }
    out
}

pub fn format_history(history: &[f64]) -> String {
    let mut out = String::from("iteration,discrepancy\n");
    for (i, d) in history.iter().enumerate() {
        let _ = writeln!(out, "{},{d:.16e}", i + 1);
    }
    out
}

pub fn format_report_json(report: &DiscrepancyReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

pub fn format_report_csv(report: &DiscrepancyReport) -> String {
    format!(
        "kernel,m,method,diagonal,N,n_max,value,flags\n{},{},{},{},{},{},{:.16e},{}\n",
        report.kernel,
        report.m,
        serde_plain(&report.method),
        serde_plain(&report.diagonal),
        report.n,
        report.n_max.map(|n| n.to_string()).unwrap_or_default(),
        report.value,
        report.flags.join(";")
    )
}

fn serde_plain<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}
