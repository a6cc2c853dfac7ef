//! CSV and JSON writers. Numbers use `{:.16e}` (17 significant digits), so
//! every value round-trips bit-exactly.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Domain, SampledFunction};
use crate::norms::{BandEntry, SymbolNormReport};

use super::experiments::{NormScanRow, RegionRow};

pub const SAMPLES_HEADER_TAIL: [&str; 2] = ["re", "im"];
pub const NORM_HEADER: [&str; 5] = ["piece", "j", "alpha0", "alpha1", "total"];
pub const NORM_SCAN_HEADER: [&str; 7] = ["s", "piece", "j", "alpha0", "alpha1", "total", "slope"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Numerical(format!("csv: {other:?}")),
    }
}

fn write_rows(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// `index, x1..xd, re, im` for a space-domain function on one block.
pub fn write_samples_csv(path: &Path, f: &SampledFunction) -> Result<()> {
    if f.domain() != Domain::Space || f.arity() != 1 {
        return Err(Error::config("output", "only single-block space samples are written"));
    }
    let grid = f.grid();
    let d = grid.dim();
    let mut header: Vec<String> = vec!["index".into()];
    header.extend((1..=d).map(|a| format!("x{a}")));
    header.extend(SAMPLES_HEADER_TAIL.iter().map(|s| s.to_string()));
    let mut x = vec![0.0; d];
    let rows = f.data().iter().enumerate().map(|(i, z)| {
        grid.coords(Domain::Space, 1, i, &mut x);
        let mut row = vec![i.to_string()];
        row.extend(x.iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(z.re));
        row.push(fmt_f64(z.im));
        row
    });
    write_rows(path, &header, rows.collect::<Vec<_>>())
}

fn norm_row(piece: &str, b: &BandEntry) -> Vec<String> {
    vec![
        piece.into(),
        b.j.to_string(),
        fmt_f64(b.alpha0),
        fmt_f64(b.alpha1),
        fmt_f64(b.total),
    ]
}

/// One `low` row (`j = -1`) followed by one `band` row per level.
pub fn write_norm_csv(path: &Path, report: &SymbolNormReport) -> Result<()> {
    let header: Vec<String> = NORM_HEADER.iter().map(|s| s.to_string()).collect();
    let rows = std::iter::once(norm_row("low", &report.low)).chain(report.bands.iter().map(|b| norm_row("band", b)));
    write_rows(path, &header, rows)
}

pub fn write_norm_scan_csv(path: &Path, scan: &[NormScanRow]) -> Result<()> {
    let header: Vec<String> = NORM_SCAN_HEADER.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for row in scan {
        let slope = row.slope.map(fmt_f64).unwrap_or_default();
        let entries = std::iter::once(("low", &row.report.low)).chain(row.report.bands.iter().map(|b| ("band", b)));
        for (piece, b) in entries {
            let mut r = vec![fmt_f64(row.s)];
            r.extend(norm_row(piece, b));
            r.push(slope.clone());
            rows.push(r);
        }
    }
    write_rows(path, &header, rows)
}

/// `x1..xn, in_a, in_b` with memberships as `inside`/`outside`/`boundary`.
pub fn write_region_csv(path: &Path, n: usize, rows: &[RegionRow]) -> Result<()> {
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.push("in_a".into());
    header.push("in_b".into());
    let body = rows.iter().map(|r| {
        let mut row: Vec<String> = r.coords.iter().map(|v| fmt_f64(*v)).collect();
        row.push(r.in_a.as_str().into());
        row.push(r.in_b.as_str().into());
        row
    });
    write_rows(path, &header, body)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(format!("json: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
