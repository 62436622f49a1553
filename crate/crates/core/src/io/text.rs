//! Delimited-text ingestion: CSV embeddings and score/rating columns.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::EmbeddingSet;
use crate::scalar::Scalar;

fn records(bytes: &[u8], path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    reader
        .records()
        .filter(|r| !matches!(r, Ok(rec) if rec.iter().all(str::is_empty)))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::format(path, e.to_string()))
}

fn parse_row(rec: &csv::StringRecord) -> Option<Vec<f64>> {
    rec.iter().map(|c| c.parse::<f64>().ok()).collect()
}

/// One sample per row, numeric cells only. A first row that does not parse
/// as numbers is taken as a header and skipped.
pub fn decode_csv<T: Scalar>(bytes: &[u8], path: &Path) -> Result<EmbeddingSet<T>> {
    let recs = records(bytes, path)?;
    if recs.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let skip = usize::from(parse_row(&recs[0]).is_none());
    let body = &recs[skip..];
    if body.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let dim = body[0].len();
    let mut data = Vec::with_capacity(body.len() * dim);
    for (i, rec) in body.iter().enumerate() {
        let line = i + skip + 1;
        if rec.len() != dim {
            return Err(Error::RaggedRows {
                path: path.to_path_buf(),
                row: line,
                expected: dim,
                got: rec.len(),
            });
        }
        let row = parse_row(rec)
            .ok_or_else(|| Error::format(path, format!("row {line} has a non-numeric cell")))?;
        for (col, v) in row.into_iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col });
            }
            data.push(T::narrow(v));
        }
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    EmbeddingSet::new(label, dim, data)
}

/// A column of values, optionally labelled: each row is `value` or
/// `label,value`. A non-numeric first row is treated as a header.
pub fn decode_labelled_values(bytes: &[u8], path: &Path) -> Result<Vec<(Option<String>, f64)>> {
    let recs = records(bytes, path)?;
    let value_of = |rec: &csv::StringRecord| rec.iter().next_back().and_then(|c| c.parse::<f64>().ok());
    let skip = usize::from(recs.first().is_some_and(|r| value_of(r).is_none()));
    let mut out = Vec::with_capacity(recs.len());
    for (i, rec) in recs.iter().enumerate().skip(skip) {
        let line = i + 1;
        let value = value_of(rec)
            .ok_or_else(|| Error::format(path, format!("row {line}: last cell is not a number")))?;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                row: i - skip,
                col: rec.len() - 1,
            });
        }
        let label = match rec.len() {
            1 => None,
            2 => Some(rec[0].to_string()),
            got => {
                return Err(Error::RaggedRows {
                    path: path.to_path_buf(),
                    row: line,
                    expected: 2,
                    got,
                })
            }
        };
        out.push((label, value));
    }
    if out.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok(out)
}
