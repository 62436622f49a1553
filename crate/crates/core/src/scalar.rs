//! Storage scalar abstraction.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point type an [`EmbeddingSet`](crate::EmbeddingSet) can store.
///
/// Geometry is always computed after widening to `f64`, so an `f32` set and
/// its `f64` widening produce identical counts.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// NPY dtype descriptor for the little-endian encoding of this type.
    const NPY_DESCR: &'static str;
    /// Encoded width in bytes.
    const BYTES: usize;

    fn widen(self) -> f64;

    fn narrow(v: f64) -> Self;

    fn from_le_slice(bytes: &[u8]) -> Self;

    fn extend_le(self, out: &mut Vec<u8>);
}

impl Scalar for f32 {
    const NPY_DESCR: &'static str = "<f4";
    const BYTES: usize = 4;

    #[inline]
    fn widen(self) -> f64 {
        self as f64
    }

    #[inline]
    fn narrow(v: f64) -> Self {
        v as f32
    }

    fn from_le_slice(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4-byte chunk"))
    }

    fn extend_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}

impl Scalar for f64 {
    const NPY_DESCR: &'static str = "<f8";
    const BYTES: usize = 8;

    #[inline]
    fn widen(self) -> f64 {
        self
    }

    #[inline]
    fn narrow(v: f64) -> Self {
        v
    }

    fn from_le_slice(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8-byte chunk"))
    }

    fn extend_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
}
