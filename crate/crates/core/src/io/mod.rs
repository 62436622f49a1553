//! Embedding ingestion (NPY v1.0, CSV) and report serialization.

pub mod extended_float;
pub mod npy;
pub mod report;
pub mod text;

use std::fs;
use std::path::Path;

pub use report::{
    render_report, write_report, CsvRow, Report, ReportDocument, ReportFormat, TOOL_VERSION,
};

use crate::error::{Error, Result};
use crate::geometry::EmbeddingSet;
use crate::scalar::Scalar;

/// Loads an embedding matrix, choosing NPY or CSV by the file's magic bytes.
pub fn read_embeddings<T: Scalar>(path: impl AsRef<Path>) -> Result<EmbeddingSet<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(npy::MAGIC) {
        npy::decode_npy(&bytes, path)
    } else if bytes.is_empty() {
        Err(Error::EmptyFile(path.to_path_buf()))
    } else {
        text::decode_csv(&bytes, path)
    }
}

/// Writes `set` as NPY v1.0 with the dtype of its storage scalar.
pub fn write_npy<T: Scalar>(set: &EmbeddingSet<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, npy::encode_npy(set)).map_err(|e| Error::io(path, e))
}

/// Reads a `value` or `label,value` column file.
pub fn read_labelled_values(path: impl AsRef<Path>) -> Result<Vec<(Option<String>, f64)>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    text::decode_labelled_values(&bytes, path)
}
