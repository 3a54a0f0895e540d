//! CSV artifacts. Floats are written with 17 significant digits so that
//! re-reading a file reproduces the in-memory values exactly.

use std::fs::File;
use std::path::Path;

use waveobs_core::{DiagnosticEntry, Grid1D, IterationReport, ScalarField, TimeSeries};

use crate::error::{CliError, CliResult};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn writer(path: &Path) -> CliResult<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// Writes `header` then `rows`, mapping every failure to an I/O error on
/// `path`.
pub fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::Data(format!("{}: {other:?}", path.display())),
    };
    let mut w = writer(path)?;
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `t,y` with `t = n dt`.
pub fn write_measurement(path: &Path, y: &TimeSeries) -> CliResult<()> {
    let rows = y.times().zip(y.values()).map(|(t, v)| vec![fmt_f64(t), fmt_f64(*v)]);
    write_rows(path, &["t", "y"], rows)
}

/// Reads a `t,y` file. Returns the time and value columns.
pub fn read_measurement(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let headers = r
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "y" {
        return Err(CliError::Data(format!(
            "{}: expected header `t,y`, found `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut t = Vec::new();
    let mut y = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let parse = |i: usize| {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Data(format!("{}: bad number on data row {}", path.display(), line + 1)))
        };
        t.push(parse(0)?);
        y.push(parse(1)?);
    }
    Ok((t, y))
}

/// `x,q_hat[,q_true]`.
pub fn write_estimate(path: &Path, grid: &Grid1D, q_hat: &ScalarField, q_true: Option<&ScalarField>) -> CliResult<()> {
    let rows = grid.nodes().enumerate().map(|(j, x)| {
        let mut row = vec![fmt_f64(x), fmt_f64(q_hat[j])];
        if let Some(q) = q_true {
            row.push(fmt_f64(q[j]));
        }
        row
    });
    let header: &[&str] = if q_true.is_some() {
        &["x", "q_hat", "q_true"]
    } else {
        &["x", "q_hat"]
    };
    write_rows(path, header, rows)
}

/// `iter,l2_err,h1_err,lyapunov,energy_residual,seconds`. The wall-clock
/// column is left empty unless `timing` is set, so that repeated runs give
/// identical bytes.
pub fn write_iterations(path: &Path, reports: &[IterationReport], timing: bool) -> CliResult<()> {
    let rows = reports.iter().map(|r| {
        vec![
            r.iteration.to_string(),
            fmt_opt(r.l2_err),
            fmt_opt(r.h1_err),
            fmt_opt(r.lyapunov),
            fmt_opt(r.energy_residual),
            if timing { fmt_f64(r.seconds) } else { String::new() },
        ]
    });
    write_rows(
        path,
        &["iter", "l2_err", "h1_err", "lyapunov", "energy_residual", "seconds"],
        rows,
    )
}

/// `iter,V` at the iteration boundaries.
pub fn write_lyapunov(path: &Path, reports: &[IterationReport]) -> CliResult<()> {
    let rows = reports
        .iter()
        .filter_map(|r| r.lyapunov.map(|v| vec![r.iteration.to_string(), fmt_f64(v)]));
    write_rows(path, &["iter", "V"], rows)
}

/// `check,value,threshold,pass`.
pub fn write_checks(path: &Path, entries: &[DiagnosticEntry]) -> CliResult<()> {
    let rows = entries.iter().map(|e| {
        vec![
            e.check.clone(),
            fmt_f64(e.value),
            fmt_f64(e.threshold),
            e.pass.to_string(),
        ]
    });
    write_rows(path, &["check", "value", "threshold", "pass"], rows)
}
