//! Multiple markings and recaptures.
//!
//! After the Petersen-style marking step (all of `S` plus every `s'` covered by
//! `S`), the samples of `S'` are visited in input order. Visiting `s'_i`
//! captures `s'_i`, its k same-set neighbors, and every `s` inside the
//! hypersphere of `s'_i`. The `S` members are always recaptures (all of `S`
//! is marked from the start); the `{s'_i} ∪ neighbors` group contributes the
//! members already marked before this visit, and is marked afterwards.

use serde::{Deserialize, Serialize};

use super::{ratio_estimate, SetPair};
use crate::scalar::Scalar;

/// One recapture occasion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchnabelStep {
    /// 1-based position of the visited `s'`.
    pub iteration: usize,
    pub captures: usize,
    pub recaptures: usize,
    /// Size of the marked set after this visit.
    pub marked_after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchnabelCounts {
    pub total_marked: usize,
    pub total_captured: usize,
    pub total_recaptured: usize,
    /// Marked-set size after the initial marking step.
    pub initially_marked: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<SchnabelStep>,
}

impl SchnabelCounts {
    pub fn estimate(&self) -> f64 {
        ratio_estimate(
            self.total_captured,
            self.total_marked,
            self.total_recaptured,
        )
    }
}

impl<T: Scalar> SetPair<'_, T> {
    pub fn schnabel_counts(&self) -> SchnabelCounts {
        let k = self.k();
        let s_len = self.first().len();
        let geom = self.second();
        let view = self.second_view();

        let mut marked = view.covered.clone();
        let mut marked_count = s_len + view.covered_count();
        let initially_marked = marked_count;

        let mut trace = Vec::with_capacity(geom.len());
        let (mut total_captured, mut total_recaptured) = (0, 0);
        for i in 0..geom.len() {
            let from_s = view.captured_per_center[i];
            let group = std::iter::once(i).chain(geom.neighbors(i).iter().copied());
            let mut already = 0;
            for j in group {
                if marked[j] {
                    already += 1;
                } else {
                    marked[j] = true;
                    marked_count += 1;
                }
            }
            let step = SchnabelStep {
                iteration: i + 1,
                captures: k + 1 + from_s,
                recaptures: from_s + already,
                marked_after: marked_count,
            };
            total_captured += step.captures;
            total_recaptured += step.recaptures;
            trace.push(step);
        }
        debug_assert_eq!(marked_count, self.population());

        SchnabelCounts {
            total_marked: marked_count,
            total_captured,
            total_recaptured,
            initially_marked,
            trace,
        }
    }
}
