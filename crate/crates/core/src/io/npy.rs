//! NPY v1.0 reading and writing for 2-D little-endian float arrays.
//!
//! Layout: the magic `\x93NUMPY`, version bytes `1 0`, a little-endian `u16`
//! header length, an ASCII Python dict literal padded with spaces and a
//! trailing newline so the data starts on a 64-byte boundary, then the raw
//! C-order data.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::EmbeddingSet;
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const PREAMBLE: usize = 10;
const ALIGN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dtype {
    F4,
    F8,
}

#[derive(Debug, Clone, PartialEq)]
enum Literal {
    Str(String),
    Bool(bool),
    Tuple(Vec<usize>),
}

/// Minimal parser for the header dict: string keys mapping to strings,
/// booleans or tuples of non-negative integers.
struct HeaderParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> HeaderParser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> std::result::Result<(), String> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!(
                "expected `{}` at header offset {}",
                c as char, self.pos
            ))
        }
    }

    fn string(&mut self) -> std::result::Result<String, String> {
        let quote = match self.peek() {
            Some(q @ (b'\'' | b'"')) => q,
            _ => return Err(format!("expected a string at header offset {}", self.pos)),
        };
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos] != quote {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Err("unterminated string in header".into());
        }
        let s = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        self.pos += 1;
        Ok(s)
    }

    fn value(&mut self) -> std::result::Result<Literal, String> {
        match self.peek() {
            Some(b'\'' | b'"') => Ok(Literal::Str(self.string()?)),
            Some(b'(') => {
                self.pos += 1;
                let mut dims = Vec::new();
                loop {
                    match self.peek() {
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        Some(b',') => self.pos += 1,
                        Some(c) if c.is_ascii_digit() => {
                            let start = self.pos;
                            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                                self.pos += 1;
                            }
                            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                            // Python 2 headers may carry an `L` suffix.
                            if self.src.get(self.pos) == Some(&b'L') {
                                self.pos += 1;
                            }
                            dims.push(text.parse().map_err(|e| format!("bad shape entry: {e}"))?);
                        }
                        _ => return Err("malformed shape tuple".into()),
                    }
                }
                Ok(Literal::Tuple(dims))
            }
            _ => {
                let rest = &self.src[self.pos..];
                if rest.starts_with(b"True") {
                    self.pos += 4;
                    Ok(Literal::Bool(true))
                } else if rest.starts_with(b"False") {
                    self.pos += 5;
                    Ok(Literal::Bool(false))
                } else {
                    Err(format!("unsupported header value at offset {}", self.pos))
                }
            }
        }
    }

    fn dict(mut self) -> std::result::Result<Vec<(String, Literal)>, String> {
        self.expect(b'{')?;
        let mut entries = Vec::new();
        loop {
            match self.peek() {
                Some(b'}') => break,
                Some(b',') => {
                    self.pos += 1;
                }
                Some(_) => {
                    let key = self.string()?;
                    self.expect(b':')?;
                    let value = self.value()?;
                    entries.push((key, value));
                }
                None => return Err("unterminated header dict".into()),
            }
        }
        Ok(entries)
    }
}

/// Decodes an NPY byte buffer into an embedding set.
pub fn decode_npy<T: Scalar>(bytes: &[u8], path: &Path) -> Result<EmbeddingSet<T>> {
    let fail = |msg: String| Error::format(path, msg);
    if bytes.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    if bytes.len() < PREAMBLE || &bytes[..6] != MAGIC {
        return Err(fail("missing NPY magic string".into()));
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(fail(format!(
            "unsupported NPY version {major}.{minor}, expected 1.0"
        )));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_start = PREAMBLE + header_len;
    if bytes.len() < data_start {
        return Err(fail("truncated header".into()));
    }
    let header = std::str::from_utf8(&bytes[PREAMBLE..data_start])
        .map_err(|_| fail("header is not ASCII".into()))?;
    let entries = HeaderParser::new(header).dict().map_err(fail)?;
    let lookup = |key: &str| entries.iter().find(|(k, _)| k == key).map(|(_, v)| v);

    let dtype = match lookup("descr") {
        Some(Literal::Str(s)) if s == "<f4" => Dtype::F4,
        Some(Literal::Str(s)) if s == "<f8" => Dtype::F8,
        Some(Literal::Str(s)) => {
            return Err(fail(format!(
                "unsupported dtype `{s}`, expected `<f4` or `<f8`"
            )))
        }
        _ => return Err(fail("header has no `descr` string".into())),
    };
    match lookup("fortran_order") {
        Some(Literal::Bool(false)) => {}
        Some(Literal::Bool(true)) => {
            return Err(fail("Fortran-ordered arrays are not supported".into()))
        }
        _ => return Err(fail("header has no `fortran_order` flag".into())),
    }
    let (n, d) = match lookup("shape") {
        Some(Literal::Tuple(dims)) if dims.len() == 2 => (dims[0], dims[1]),
        Some(Literal::Tuple(dims)) => {
            return Err(fail(format!(
                "expected a 2-D array (rank 2), got rank {} shape {:?}",
                dims.len(),
                dims
            )))
        }
        _ => return Err(fail("header has no `shape` tuple".into())),
    };

    let width = match dtype {
        Dtype::F4 => 4,
        Dtype::F8 => 8,
    };
    let expected = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(width))
        .ok_or_else(|| fail("shape overflows".into()))?;
    let payload = &bytes[data_start..];
    if payload.len() != expected {
        return Err(fail(format!(
            "data section holds {} bytes, shape ({n}, {d}) needs {expected}",
            payload.len()
        )));
    }
    let data: Vec<T> = match dtype {
        Dtype::F4 => payload
            .chunks_exact(4)
            .map(|c| T::narrow(f32::from_le_slice(c) as f64))
            .collect(),
        Dtype::F8 => payload
            .chunks_exact(8)
            .map(|c| T::narrow(f64::from_le_slice(c)))
            .collect(),
    };
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    EmbeddingSet::new(label, d, data)
}

/// Encodes a set as NPY v1.0 using the storage scalar's dtype.
pub fn encode_npy<T: Scalar>(set: &EmbeddingSet<T>) -> Vec<u8> {
    let mut header = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': ({}, {}), }}",
        T::NPY_DESCR,
        set.len(),
        set.dim()
    );
    let unpadded = PREAMBLE + header.len() + 1;
    let padding = (ALIGN - unpadded % ALIGN) % ALIGN;
    header.extend(std::iter::repeat_n(' ', padding));
    header.push('\n');

    let mut out = Vec::with_capacity(PREAMBLE + header.len() + set.as_slice().len() * T::BYTES);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for v in set.as_slice() {
        v.extend_le(&mut out);
    }
    out
}
