//! Closed-population estimators over a pair of embedding sets.
//!
//! The population is the disjoint union of `S` and `S'` (even when the two
//! sets hold identical vectors), so its true size is always `|S| + |S'|`.
//! Each estimator produces an [`Estimate`] whose score is one minus the
//! clamped relative error of the estimated size.

mod capture;
mod petersen;
mod schnabel;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_geometry, CrossCoverage, EmbeddingSet, Geometry};
use crate::io::extended_float;
use crate::scalar::Scalar;

pub use capture::{capture_loglik, CaptureCounts, CaptureSearch};
pub use petersen::PetersenCounts;
pub use schnabel::{SchnabelCounts, SchnabelStep};

/// Clamped relative error `min(|P_hat - P| / P, 1)`; infinite or NaN
/// estimates count as a total loss.
pub fn accuracy_loss(true_population: usize, estimate: f64) -> f64 {
    assert!(true_population >= 1, "population must be positive");
    if !estimate.is_finite() {
        return 1.0;
    }
    let p = true_population as f64;
    ((estimate - p).abs() / p).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Petersen,
    Schnabel,
    Capture,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [Self::Petersen, Self::Schnabel, Self::Capture];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Petersen => "petersen",
            Self::Schnabel => "schnabel",
            Self::Capture => "capture",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "petersen" => Ok(Self::Petersen),
            "schnabel" => Ok(Self::Schnabel),
            "capture" => Ok(Self::Capture),
            _ => Err(Error::UnknownEstimator(s.to_string())),
        }
    }
}

/// Estimator-specific tallies carried by an [`Estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Counts {
    Petersen(PetersenCounts),
    Schnabel(SchnabelCounts),
    Capture(CaptureCounts),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimator: EstimatorKind,
    pub k: usize,
    pub true_population: usize,
    /// `+inf` when no recaptures were observed.
    #[serde(with = "extended_float")]
    pub estimated_population: f64,
    pub accuracy_loss: f64,
    pub score: f64,
    pub counts: Counts,
    /// Present for CAPTURE only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<CaptureSearch>,
}

impl Estimate {
    fn new(
        estimator: EstimatorKind,
        k: usize,
        true_population: usize,
        estimated_population: f64,
        counts: Counts,
    ) -> Self {
        let accuracy_loss = accuracy_loss(true_population, estimated_population);
        Self {
            estimator,
            k,
            true_population,
            estimated_population,
            accuracy_loss,
            score: 1.0 - accuracy_loss,
            counts,
            search: None,
        }
    }
}

/// `C * M / R`, or `+inf` without recaptures.
pub(crate) fn ratio_estimate(captured: usize, marked: usize, recaptured: usize) -> f64 {
    if recaptured == 0 {
        f64::INFINITY
    } else {
        captured as f64 * marked as f64 / recaptured as f64
    }
}

/// Both geometries of an `(S, S')` pair plus their cross-capture tallies.
///
/// Building this once and asking it for several estimators avoids repeating
/// the quadratic distance passes.
#[derive(Debug, Clone)]
pub struct SetPair<'a, T> {
    first: Geometry<'a, T>,
    second: Geometry<'a, T>,
    /// Indexed by samples of `S`.
    first_view: CrossCoverage,
    /// Indexed by samples of `S'`.
    second_view: CrossCoverage,
}

impl<'a, T: Scalar> SetPair<'a, T> {
    pub fn new(s: &'a EmbeddingSet<T>, s_prime: &'a EmbeddingSet<T>, k: usize) -> Result<Self> {
        if s.dim() != s_prime.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                got: s_prime.dim(),
            });
        }
        let first = build_geometry(s, k)?;
        let second = build_geometry(s_prime, k)?;
        Self::from_geometries(first, second)
    }

    pub fn from_geometries(first: Geometry<'a, T>, second: Geometry<'a, T>) -> Result<Self> {
        if first.k() != second.k() {
            return Err(Error::Domain(format!(
                "geometries built with different k ({} vs {})",
                first.k(),
                second.k()
            )));
        }
        let first_view = first.cross_coverage(&second)?;
        let second_view = second.cross_coverage(&first)?;
        Ok(Self {
            first,
            second,
            first_view,
            second_view,
        })
    }

    /// The same pair with the roles of `S` and `S'` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            first: self.second.clone(),
            second: self.first.clone(),
            first_view: self.second_view.clone(),
            second_view: self.first_view.clone(),
        }
    }

    pub fn k(&self) -> usize {
        self.first.k()
    }

    pub fn first(&self) -> &Geometry<'a, T> {
        &self.first
    }

    pub fn second(&self) -> &Geometry<'a, T> {
        &self.second
    }

    /// Tallies for the samples of `S` against `S'`.
    pub fn first_view(&self) -> &CrossCoverage {
        &self.first_view
    }

    /// Tallies for the samples of `S'` against `S`.
    pub fn second_view(&self) -> &CrossCoverage {
        &self.second_view
    }

    /// `|S| + |S'|`.
    pub fn population(&self) -> usize {
        self.first.len() + self.second.len()
    }

    pub fn estimate(&self, kind: EstimatorKind) -> Estimate {
        match kind {
            EstimatorKind::Petersen => self.petersen(),
            EstimatorKind::Schnabel => self.schnabel(),
            EstimatorKind::Capture => self.capture(),
        }
    }

    pub fn petersen(&self) -> Estimate {
        let counts = self.petersen_counts();
        Estimate::new(
            EstimatorKind::Petersen,
            self.k(),
            self.population(),
            counts.estimate(),
            Counts::Petersen(counts),
        )
    }

    pub fn schnabel(&self) -> Estimate {
        let counts = self.schnabel_counts();
        Estimate::new(
            EstimatorKind::Schnabel,
            self.k(),
            self.population(),
            counts.estimate(),
            Counts::Schnabel(counts),
        )
    }

    pub fn capture(&self) -> Estimate {
        let counts = self.capture_counts();
        let search = counts.maximize(capture::p_max(self.population()));
        let mut est = Estimate::new(
            EstimatorKind::Capture,
            self.k(),
            self.population(),
            search.argmax as f64,
            Counts::Capture(counts),
        );
        est.search = Some(search);
        est
    }

    /// Schnabel scores in both directions: `(quality, diversity)` when `S`
    /// is the reference and `S'` the evaluation set.
    pub fn quality_diversity(&self) -> (f64, f64) {
        let quality = self.schnabel().score;
        let diversity = self.swapped().schnabel().score;
        (quality, diversity)
    }
}

pub fn petersen_counts<T: Scalar>(
    s: &EmbeddingSet<T>,
    s_prime: &EmbeddingSet<T>,
    k: usize,
) -> Result<PetersenCounts> {
    Ok(SetPair::new(s, s_prime, k)?.petersen_counts())
}

pub fn petersen_estimate<T: Scalar>(
    s: &EmbeddingSet<T>,
    s_prime: &EmbeddingSet<T>,
    k: usize,
) -> Result<Estimate> {
    Ok(SetPair::new(s, s_prime, k)?.petersen())
}

pub fn schnabel_counts<T: Scalar>(
    s: &EmbeddingSet<T>,
    s_prime: &EmbeddingSet<T>,
    k: usize,
) -> Result<SchnabelCounts> {
    Ok(SetPair::new(s, s_prime, k)?.schnabel_counts())
}

pub fn schnabel_estimate<T: Scalar>(
    s: &EmbeddingSet<T>,
    s_prime: &EmbeddingSet<T>,
    k: usize,
) -> Result<Estimate> {
    Ok(SetPair::new(s, s_prime, k)?.schnabel())
}

pub fn capture_counts<T: Scalar>(
    s: &EmbeddingSet<T>,
    s_prime: &EmbeddingSet<T>,
    k: usize,
) -> Result<CaptureCounts> {
    Ok(SetPair::new(s, s_prime, k)?.capture_counts())
}

pub fn capture_estimate<T: Scalar>(
    s: &EmbeddingSet<T>,
    s_prime: &EmbeddingSet<T>,
    k: usize,
) -> Result<Estimate> {
    Ok(SetPair::new(s, s_prime, k)?.capture())
}

/// Schnabel `(quality, diversity)` of an evaluation set against a reference.
pub fn me_quality_diversity<T: Scalar>(
    reference: &EmbeddingSet<T>,
    evaluation: &EmbeddingSet<T>,
    k: usize,
) -> Result<(f64, f64)> {
    Ok(SetPair::new(reference, evaluation, k)?.quality_diversity())
}

pub fn me_score<T: Scalar>(
    kind: EstimatorKind,
    s: &EmbeddingSet<T>,
    s_prime: &EmbeddingSet<T>,
    k: usize,
) -> Result<Estimate> {
    Ok(SetPair::new(s, s_prime, k)?.estimate(kind))
}
