//! Exact k-NN structure and the hypersphere capture predicates.
//!
//! Every sample `s` of a set owns a closed ball centred on `s` whose radius is
//! the Euclidean distance to its k-th nearest *other* sample of the same set.
//! A point is captured by `s` when it lies inside that ball (boundary
//! included), and it is covered by the set when at least one ball captures it.
//!
//! Neighbors are ordered by ascending distance, ties broken by ascending
//! index, which makes the structure a pure function of the input rows.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An ordered collection of `n >= 2` finite vectors of common dimension `d >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet<T> {
    label: String,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> EmbeddingSet<T> {
    /// Wraps a row-major buffer of `n * dim` values.
    pub fn new(label: impl Into<String>, dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: data.len() % dim,
            });
        }
        let n = data.len() / dim;
        if n < 2 {
            return Err(Error::MinSamples { n, k: 1 });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self {
            label: label.into(),
            dim,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[T]>>(label: impl Into<String>, rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if rows.len() < 2 {
            return Err(Error::MinSamples {
                n: rows.len(),
                k: 1,
            });
        }
        Self::new(label, dim, data)
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false; a valid set has at least two rows.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Converts the storage scalar. Narrowing to `f32` may round.
    pub fn cast<U: Scalar>(&self) -> EmbeddingSet<U> {
        EmbeddingSet {
            label: self.label.clone(),
            dim: self.dim,
            data: self.data.iter().map(|v| U::narrow(v.widen())).collect(),
        }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }
}

/// Euclidean distance evaluated in `f64`.
///
/// The summation order only depends on the coordinate index, so
/// `distance(a, b) == distance(b, a)` bit for bit.
#[inline]
pub fn distance<A: Scalar, B: Scalar>(a: &[A], b: &[B]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let diff = x.widen() - y.widen();
            diff * diff
        })
        .sum::<f64>()
        .sqrt()
}

/// k-NN lists and hypersphere radii for one [`EmbeddingSet`].
#[derive(Debug, Clone)]
pub struct Geometry<'a, T> {
    source: &'a EmbeddingSet<T>,
    k: usize,
    neighbors: Vec<usize>,
    radii: Vec<f64>,
}

/// Builds the exact k-NN structure of `set`.
///
/// Fails with [`Error::MinSamples`] unless `1 <= k < n`.
pub fn build_geometry<T: Scalar>(set: &EmbeddingSet<T>, k: usize) -> Result<Geometry<'_, T>> {
    let n = set.len();
    if k == 0 || k >= n {
        return Err(Error::MinSamples { n, k });
    }
    let per_row: Vec<Vec<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| nearest_others(set, i, k))
        .collect();

    let mut neighbors = Vec::with_capacity(n * k);
    let mut radii = Vec::with_capacity(n);
    for row in per_row {
        radii.push(row[k - 1].0);
        neighbors.extend(row.into_iter().map(|(_, j)| j));
    }
    Ok(Geometry {
        source: set,
        k,
        neighbors,
        radii,
    })
}

fn nearest_others<T: Scalar>(set: &EmbeddingSet<T>, i: usize, k: usize) -> Vec<(f64, usize)> {
    let center = set.row(i);
    let mut cand: Vec<(f64, usize)> = set
        .rows()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, row)| (distance(center, row), j))
        .collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, order);
        cand.truncate(k);
    }
    cand.sort_unstable_by(order);
    cand
}

impl<'a, T: Scalar> Geometry<'a, T> {
    pub fn source(&self) -> &'a EmbeddingSet<T> {
        self.source
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// The k nearest other samples of sample `i`, nearest first.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i * self.k..(i + 1) * self.k]
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Geometry of the same set at a smaller neighbor count.
    ///
    /// The neighbor order is total, so the first `k` entries of a longer list
    /// are exactly the k-NN list; no distances are recomputed.
    pub fn with_k(&self, k: usize) -> Result<Geometry<'a, T>> {
        if k == 0 || k > self.k {
            return Err(Error::Domain(format!(
                "cannot derive k = {k} from a geometry built with k = {}",
                self.k
            )));
        }
        let n = self.len();
        let mut neighbors = Vec::with_capacity(n * k);
        let mut radii = Vec::with_capacity(n);
        for i in 0..n {
            let list = &self.neighbors(i)[..k];
            neighbors.extend_from_slice(list);
            radii.push(distance(self.source.row(i), self.source.row(list[k - 1])));
        }
        Ok(Geometry {
            source: self.source,
            k,
            neighbors,
            radii,
        })
    }

    /// True iff `x` lies in the closed hypersphere of sample `center`.
    pub fn capture_by(&self, x: &[T], center: usize) -> Result<bool> {
        self.source.check_dim(x.len())?;
        if center >= self.len() {
            return Err(Error::Domain(format!(
                "center index {center} out of range for {} samples",
                self.len()
            )));
        }
        Ok(self.captures(x, center))
    }

    #[inline]
    fn captures<U: Scalar>(&self, x: &[U], center: usize) -> bool {
        distance(x, self.source.row(center)) <= self.radii[center]
    }

    /// True iff at least one hypersphere of the set captures `x`.
    pub fn covered(&self, x: &[T]) -> Result<bool> {
        self.source.check_dim(x.len())?;
        Ok(self.covers(x))
    }

    #[inline]
    fn covers<U: Scalar>(&self, x: &[U]) -> bool {
        (0..self.len()).any(|c| self.captures(x, c))
    }

    /// Number of rows of `xs` covered by this set.
    pub fn count_covered(&self, xs: &EmbeddingSet<T>) -> Result<usize> {
        self.source.check_dim(xs.dim())?;
        Ok((0..xs.len())
            .into_par_iter()
            .filter(|&i| self.covers(xs.row(i)))
            .count())
    }

    /// Cross-set capture tallies between this geometry and `other`.
    pub fn cross_coverage(&self, other: &Geometry<'_, T>) -> Result<CrossCoverage> {
        self.source.check_dim(other.source.dim())?;
        let (captured, covered): (Vec<usize>, Vec<bool>) = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let s = self.source.row(i);
                let r = self.radii[i];
                let mut count = 0usize;
                let mut covered = false;
                for (j, o) in other.source.rows().enumerate() {
                    let d = distance(s, o);
                    if d <= r {
                        count += 1;
                    }
                    if d <= other.radii[j] {
                        covered = true;
                    }
                }
                (count, covered)
            })
            .unzip();
        Ok(CrossCoverage {
            captured_per_center: captured,
            covered,
        })
    }
}

/// Free-function form of [`Geometry::capture_by`].
pub fn capture_by<T: Scalar>(x: &[T], center: usize, geom: &Geometry<'_, T>) -> Result<bool> {
    geom.capture_by(x, center)
}

/// Free-function form of [`Geometry::covered`].
pub fn covered<T: Scalar>(x: &[T], geom: &Geometry<'_, T>) -> Result<bool> {
    geom.covered(x)
}

/// Free-function form of [`Geometry::count_covered`].
pub fn count_covered<T: Scalar>(xs: &EmbeddingSet<T>, geom: &Geometry<'_, T>) -> Result<usize> {
    geom.count_covered(xs)
}

/// Per-sample view of one set against another.
///
/// Indexed by the samples of the geometry `cross_coverage` was called on:
/// `captured_per_center[i]` counts the other set's rows inside sample i's
/// hypersphere, `covered[i]` says whether sample i sits inside any hypersphere
/// of the other set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossCoverage {
    pub captured_per_center: Vec<usize>,
    pub covered: Vec<bool>,
}

impl CrossCoverage {
    pub fn total_captured(&self) -> usize {
        self.captured_per_center.iter().sum()
    }

    pub fn covered_count(&self) -> usize {
        self.covered.iter().filter(|&&c| c).count()
    }
}
