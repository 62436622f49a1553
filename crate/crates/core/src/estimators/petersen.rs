//! Single mark / single recapture.

use serde::{Deserialize, Serialize};

use super::{ratio_estimate, SetPair};
use crate::scalar::Scalar;

/// `marked = |S| + #{s' covered by S}`, `captured = |S'| + #{s covered by S'}`,
/// `recaptured` = both coverage counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetersenCounts {
    pub marked: usize,
    pub captured: usize,
    pub recaptured: usize,
}

impl PetersenCounts {
    pub fn estimate(&self) -> f64 {
        ratio_estimate(self.captured, self.marked, self.recaptured)
    }
}

impl<T: Scalar> SetPair<'_, T> {
    pub fn petersen_counts(&self) -> PetersenCounts {
        let s_prime_covered = self.second_view().covered_count();
        let s_covered = self.first_view().covered_count();
        PetersenCounts {
            marked: self.first().len() + s_prime_covered,
            captured: self.second().len() + s_covered,
            recaptured: s_prime_covered + s_covered,
        }
    }
}
