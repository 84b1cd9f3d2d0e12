//! CSV ingestion and emission for signals and energy profiles.
//!
//! Signal files carry a header of node ids followed by one row per time
//! instant. Energy files carry `node,energy` rows with one per-instant harvest
//! rate per node. Locations in error messages are 1-based.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::finish_csv;
use crate::signal::Signal;

pub fn ingest_signal(path: &Path) -> Result<Signal> {
    parse_signal(File::open(path)?)
}

pub fn parse_signal(reader: impl Read) -> Result<Signal> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let width = rdr.headers()?.len();
    if width == 0 {
        return Err(Error::invalid("signal file has an empty header"));
    }
    let mut rows = Vec::new();
    for (h, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::Csv(format!(
                "row {} has {} cells, header has {width}",
                h + 1,
                rec.len()
            )));
        }
        let mut row = Vec::with_capacity(width);
        for (j, cell) in rec.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::MissingMeasurement { row: h + 1, col: j + 1 });
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Csv(format!("non-numeric cell '{cell}' at ({}, {})", h + 1, j + 1)))?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::invalid("signal file has no measurements"));
    }
    Signal::from_rows(&rows)
}

/// Signal as CSV with header `n1..nN`; values use the shortest exact decimal form.
pub fn signal_to_csv(signal: &Signal) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record((1..=signal.nodes()).map(|j| format!("n{j}")))?;
    for h in 0..signal.instants() {
        w.write_record((0..signal.nodes()).map(|j| signal.get(h, j).to_string()))?;
    }
    finish_csv(w)
}

/// Per-node harvest rates from a `node,energy` file, in file order.
pub fn ingest_energy(path: &Path) -> Result<Vec<f64>> {
    parse_energy(File::open(path)?)
}

pub fn parse_energy(reader: impl Read) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let cell = rec
            .get(1)
            .ok_or_else(|| Error::Csv(format!("energy row {} lacks an energy column", i + 1)))?;
        let v: f64 = cell
            .parse()
            .map_err(|_| Error::Csv(format!("non-numeric energy '{cell}' on row {}", i + 1)))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::invalid("energy file lists no nodes"));
    }
    Ok(out)
}

pub fn energy_to_csv(rates: &[f64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["node", "energy"])?;
    for (j, e) in rates.iter().enumerate() {
        w.write_record([format!("n{}", j + 1), e.to_string()])?;
    }
    finish_csv(w)
}

/// Consecutive segments of `instants` rows; a trailing partial segment is dropped with a warning.
pub fn segment(signal: &Signal, instants: usize) -> Result<Vec<Signal>> {
    let (segments, dropped) = signal.segments(instants)?;
    if dropped > 0 {
        log::warn!(
            "dropping {dropped} trailing instants that do not fill a segment of {instants}"
        );
    }
    Ok(segments)
}
