//! Mark-recapture scoring of embedding sets.
//!
//! A reference set and an evaluation set are treated as one closed population.
//! Each sample owns a hypersphere reaching its k-th nearest same-set neighbor,
//! and membership in those hyperspheres plays the role of "capture". Three
//! classic population-size estimators (Petersen, Schnabel and the null model
//! of Program CAPTURE) are run over the pair; the relative error of the
//! estimate against the known population `|S| + |S'|` becomes a score in
//! `[0, 1]`.
//!
//! The crate also carries the usual baselines (k-NN precision/recall and the
//! Fréchet distance), a seeded synthetic-experiment harness, rank
//! correlations and file I/O for NPY/CSV embeddings and JSON/CSV reports.
//!
//! Core types are generic over the storage scalar ([`Scalar`], implemented
//! for `f32` and `f64`); distances and all derived statistics are evaluated
//! in `f64`.

pub mod analysis;
pub mod baselines;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod io;
pub mod scalar;

pub use error::{Error, Result};
pub use estimators::{
    accuracy_loss, capture_counts, capture_estimate, capture_loglik, me_quality_diversity,
    me_score, petersen_counts, petersen_estimate, schnabel_counts, schnabel_estimate,
    CaptureCounts, Counts, Estimate, EstimatorKind, PetersenCounts, SchnabelCounts, SchnabelStep,
    SetPair,
};
pub use geometry::{build_geometry, EmbeddingSet, Geometry};
pub use scalar::Scalar;

/// Embedding set stored in single precision (the usual encoder output).
pub type EmbeddingSetF32 = EmbeddingSet<f32>;
/// Embedding set stored in double precision.
pub type EmbeddingSetF64 = EmbeddingSet<f64>;
/// Capture geometry over a single-precision set.
pub type GeometryF32<'a> = Geometry<'a, f32>;
/// Capture geometry over a double-precision set.
pub type GeometryF64<'a> = Geometry<'a, f64>;

/// Default neighbor count for every estimator.
pub const DEFAULT_K: usize = 1;
