//! Headerless CSV exchange of matrices, vectors and index lists.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{param, Result};
use crate::supports::IndexSet;

fn parse_rows<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, f)| {
                f.parse::<f64>().map_err(|_| {
                    crate::Error::Parameter(format!(
                        "row {}, column {}: '{f}' is not a number",
                        r + 1,
                        c + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads an `m × n` matrix, one row per line.
pub fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let rows = parse_rows(reader)?;
    let Some(n) = rows.first().map(Vec::len) else {
        return param("matrix file is empty");
    };
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return param(format!(
            "row {} has {} entries, expected {n}",
            bad + 1,
            rows[bad].len()
        ));
    }
    Ok(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

/// Reads a vector written either as one column or as one row.
pub fn read_vector<R: Read>(reader: R) -> Result<Vec<f64>> {
    let rows = parse_rows(reader)?;
    match rows.as_slice() {
        [] => Ok(Vec::new()),
        [single] => Ok(single.clone()),
        _ if rows.iter().all(|r| r.len() == 1) => Ok(rows.into_iter().map(|r| r[0]).collect()),
        _ => param("vector file must hold a single row or a single column"),
    }
}

/// Reads non-negative integer indices in any row/column layout.
pub fn read_indices<R: Read>(reader: R) -> Result<IndexSet> {
    let vals: Vec<f64> = parse_rows(reader)?.into_iter().flatten().collect();
    vals.into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v < usize::MAX as f64 {
                Ok(v as usize)
            } else {
                param(format!("'{v}' is not an index"))
            }
        })
        .collect::<Result<Vec<usize>>>()
        .map(IndexSet::from)
}

pub fn write_matrix<W: Write>(writer: W, a: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for i in 0..a.nrows() {
        w.write_record(a.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// One value per line.
pub fn write_vector<W: Write>(writer: W, v: &[f64]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for x in v {
        w.write_record([x.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    read_matrix(File::open(path)?)
}

pub fn load_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    read_vector(File::open(path)?)
}

pub fn load_indices(path: impl AsRef<Path>) -> Result<IndexSet> {
    read_indices(File::open(path)?)
}
