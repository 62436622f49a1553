//! Null model (equal capture probability) of Program CAPTURE.
//!
//! Every sample of both sets is one capture occasion. On the occasion of
//! sample `c`, the captures are `c` with its k same-set neighbors plus every
//! sample of the other set inside the hypersphere of `c`. The population
//! estimate maximizes the null-model log-likelihood over integer sizes.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::SetPair;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Upper bound on the likelihood search, as a multiple of the true population.
pub const SEARCH_FACTOR: usize = 10;

pub(crate) fn p_max(population: usize) -> usize {
    SEARCH_FACTOR * population
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptureCounts {
    pub occasions: usize,
    pub unique_marked: usize,
    pub total_captures: usize,
}

/// Outcome of the grid search over candidate population sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureSearch {
    pub argmax: usize,
    pub log_likelihood: f64,
    pub p_max: usize,
    /// The maximum sat on the search bound; the estimate may be truncated.
    pub boundary_hit: bool,
}

#[inline]
fn x_ln_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Log-likelihood of population size `population` under the null model:
///
/// `ln(P!/(P-M)!) + C ln C + (TP - C) ln(TP - C) - TP ln(TP)`
///
/// with `M` unique marked samples, `C` total captures and `T` occasions.
pub fn capture_loglik(population: usize, counts: &CaptureCounts) -> Result<f64> {
    let m = counts.unique_marked;
    if population < m {
        return Err(Error::Domain(format!(
            "population {population} is below the {m} marked samples"
        )));
    }
    let tp = counts.occasions as f64 * population as f64;
    let c = counts.total_captures as f64;
    if tp < c {
        return Err(Error::Domain(format!(
            "{} captures exceed occasions x population = {tp}",
            counts.total_captures
        )));
    }
    let p = population as f64;
    let falling = ln_gamma(p + 1.0) - ln_gamma((population - m) as f64 + 1.0);
    Ok(falling + x_ln_x(c) + x_ln_x(tp - c) - x_ln_x(tp))
}

impl CaptureCounts {
    /// Integer argmax of [`capture_loglik`] over `[unique_marked, p_max]`,
    /// ties resolved toward the smaller size.
    pub fn maximize(&self, p_max: usize) -> CaptureSearch {
        let lo = self.unique_marked;
        let hi = p_max.max(lo);
        let mut best = (lo, f64::NEG_INFINITY);
        for p in lo..=hi {
            // Domain errors cannot occur for p >= M when C <= T * M.
            let ll = capture_loglik(p, self).unwrap_or(f64::NEG_INFINITY);
            if ll > best.1 {
                best = (p, ll);
            }
        }
        CaptureSearch {
            argmax: best.0,
            log_likelihood: best.1,
            p_max: hi,
            boundary_hit: best.0 == hi && hi > lo,
        }
    }
}

impl<T: Scalar> SetPair<'_, T> {
    pub fn capture_counts(&self) -> CaptureCounts {
        let group = self.k() + 1;
        let side = |view: &crate::geometry::CrossCoverage| {
            view.total_captured() + group * view.captured_per_center.len()
        };
        let population = self.population();
        CaptureCounts {
            occasions: population,
            unique_marked: population,
            total_captures: side(self.first_view()) + side(self.second_view()),
        }
    }
}
