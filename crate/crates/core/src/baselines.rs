//! Baseline metrics: k-NN precision/recall and the Fréchet distance between
//! Gaussian fits.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::SetPair;
use crate::geometry::EmbeddingSet;
use crate::scalar::Scalar;

/// Fraction of evaluation samples covered by the reference manifold
/// (precision) and of reference samples covered by the evaluation manifold
/// (recall).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
}

impl PrecisionRecall {
    /// Reads the coverage tallies of a pair built as `(reference, evaluation)`.
    pub fn from_pair<T: Scalar>(pair: &SetPair<'_, T>) -> Self {
        let n_ref = pair.first().len() as f64;
        let n_eval = pair.second().len() as f64;
        Self {
            precision: pair.second_view().covered_count() as f64 / n_eval,
            recall: pair.first_view().covered_count() as f64 / n_ref,
        }
    }
}

pub fn impar<T: Scalar>(
    reference: &EmbeddingSet<T>,
    evaluation: &EmbeddingSet<T>,
    k: usize,
) -> Result<PrecisionRecall> {
    Ok(PrecisionRecall::from_pair(&SetPair::new(
        reference, evaluation, k,
    )?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub mean: DVector<f64>,
    /// Unbiased (`1/(n-1)`) sample covariance.
    pub covariance: DMatrix<f64>,
}

pub fn fit_gaussian<T: Scalar>(set: &EmbeddingSet<T>) -> Result<GaussianFit> {
    let n = set.len();
    if n < 2 {
        return Err(Error::MinSamples { n, k: 1 });
    }
    let d = set.dim();
    let mut mean = DVector::<f64>::zeros(d);
    for row in set.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v.widen();
        }
    }
    mean /= n as f64;

    let mut centered = DMatrix::<f64>::zeros(n, d);
    for (i, row) in set.rows().enumerate() {
        for (j, v) in row.iter().enumerate() {
            centered[(i, j)] = v.widen() - mean[j];
        }
    }
    let mut covariance = centered.transpose() * &centered;
    covariance /= (n - 1) as f64;
    // Exact symmetry keeps the eigen-solver on the symmetric path.
    let covariance = (&covariance + covariance.transpose()) * 0.5;
    Ok(GaussianFit { mean, covariance })
}

const EIGEN_EPS: f64 = 1e-14;
const EIGEN_MAX_ITER: usize = 10_000;

fn eigenvalues(m: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m, EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::NumericalFailure("symmetric eigendecomposition did not converge".into())
    })
}

/// Principal square root of a positive-semidefinite matrix, with rounding
/// negatives in the spectrum clamped to zero.
fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = eigenvalues(m.clone())?;
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// Squared Fréchet distance between two Gaussian fits:
/// `|mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2})`.
///
/// The trace of the cross term is taken as the sum of square roots of the
/// eigenvalues of `S_a^{1/2} S_b S_a^{1/2}`, which is symmetric and shares
/// the spectrum of `S_a S_b`.
pub fn frechet_distance(a: &GaussianFit, b: &GaussianFit) -> Result<f64> {
    if a.mean.len() != b.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: a.mean.len(),
            got: b.mean.len(),
        });
    }
    let root_a = psd_sqrt(&a.covariance)?;
    let inner = &root_a * &b.covariance * &root_a;
    let inner = (&inner + inner.transpose()) * 0.5;
    let spectrum = eigenvalues(inner)?.eigenvalues;
    let cross_trace: f64 = spectrum.iter().map(|l| l.max(0.0).sqrt()).sum();
    let mean_term = (&a.mean - &b.mean).norm_squared();
    let value = mean_term + a.covariance.trace() + b.covariance.trace() - 2.0 * cross_trace;
    Ok(value.max(0.0))
}

pub fn fid<T: Scalar>(reference: &EmbeddingSet<T>, evaluation: &EmbeddingSet<T>) -> Result<f64> {
    if reference.dim() != evaluation.dim() {
        return Err(Error::DimensionMismatch {
            expected: reference.dim(),
            got: evaluation.dim(),
        });
    }
    frechet_distance(&fit_gaussian(reference)?, &fit_gaussian(evaluation)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> EmbeddingSet<f64> {
        EmbeddingSet::new("line", 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn impar_examples() {
        let pr = impar(&line(&[0.0, 1.0]), &line(&[1.0, 10.0]), 1).unwrap();
        assert_eq!(
            pr,
            PrecisionRecall {
                precision: 0.5,
                recall: 1.0
            }
        );
        let s = line(&[0.0, 1.0, 3.0]);
        assert_eq!(
            impar(&s, &s.clone(), 1).unwrap(),
            PrecisionRecall {
                precision: 1.0,
                recall: 1.0
            }
        );
        let pr = impar(&line(&[0.0, 1.0]), &line(&[10.0, 11.0]), 1).unwrap();
        assert_eq!(
            pr,
            PrecisionRecall {
                precision: 0.0,
                recall: 0.0
            }
        );
    }

    #[test]
    fn gaussian_moments() {
        let fit = fit_gaussian(&line(&[-1.0, 1.0])).unwrap();
        assert_eq!(fit.mean[0], 0.0);
        assert_eq!(fit.covariance[(0, 0)], 2.0);

        let same = EmbeddingSet::from_rows("same", &[[2.0, 3.0]; 4]).unwrap();
        let fit = fit_gaussian(&same).unwrap();
        assert!(fit.covariance.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gaussian_matches_direct_sums() {
        let rows = [[0.3, -1.2], [2.5, 0.7], [-0.4, 1.9]];
        let set = EmbeddingSet::from_rows("r", &rows).unwrap();
        let fit = fit_gaussian(&set).unwrap();
        let mean: Vec<f64> = (0..2)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / 3.0)
            .collect();
        for a in 0..2 {
            assert!((fit.mean[a] - mean[a]).abs() < 1e-15);
            for b in 0..2 {
                let cov: f64 = rows
                    .iter()
                    .map(|r| (r[a] - mean[a]) * (r[b] - mean[b]))
                    .sum::<f64>()
                    / 2.0;
                assert!((fit.covariance[(a, b)] - cov).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fid_identity_and_1d_closed_form() {
        let a = line(&[0.1, 0.9, 2.3, -0.7, 1.4]);
        assert!(fid(&a, &a.clone()).unwrap() < 1e-8);

        let b = line(&[3.0, 5.5, 4.1, 7.2]);
        let fa = fit_gaussian(&a).unwrap();
        let fb = fit_gaussian(&b).unwrap();
        let (m1, s1) = (fa.mean[0], fa.covariance[(0, 0)].sqrt());
        let (m2, s2) = (fb.mean[0], fb.covariance[(0, 0)].sqrt());
        let expected = (m1 - m2).powi(2) + (s1 - s2).powi(2);
        assert!((fid(&a, &b).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn fid_diagonal_2d_is_sum_of_axes() {
        // Symmetric sign patterns zero out the off-diagonal covariance.
        let a = EmbeddingSet::from_rows("a", &[[1.0, 2.0], [1.0, -2.0], [-1.0, 2.0], [-1.0, -2.0]])
            .unwrap();
        let b = EmbeddingSet::from_rows("b", &[[5.0, 0.5], [5.0, -0.5], [3.0, 0.5], [3.0, -0.5]])
            .unwrap();
        let fa = fit_gaussian(&a).unwrap();
        let fb = fit_gaussian(&b).unwrap();
        assert_eq!(fa.covariance[(0, 1)], 0.0);
        assert_eq!(fb.covariance[(0, 1)], 0.0);
        let expected: f64 = (0..2)
            .map(|j| {
                (fa.mean[j] - fb.mean[j]).powi(2)
                    + (fa.covariance[(j, j)].sqrt() - fb.covariance[(j, j)].sqrt()).powi(2)
            })
            .sum();
        assert!((fid(&a, &b).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn fid_is_symmetric() {
        let a = EmbeddingSet::from_rows(
            "a",
            &[
                [0.1, 2.0, 0.3],
                [1.0, -0.2, 0.5],
                [-1.1, 0.7, 2.2],
                [0.4, 0.4, -0.9],
            ],
        )
        .unwrap();
        let b =
            EmbeddingSet::from_rows("b", &[[1.1, 0.0, 0.3], [2.0, 1.2, -0.5], [0.9, -0.7, 1.2]])
                .unwrap();
        let ab = fid(&a, &b).unwrap();
        let ba = fid(&b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-8);
        assert!(ab >= 0.0);
    }

    #[test]
    fn fid_dimension_mismatch() {
        let a = line(&[0.0, 1.0]);
        let b = EmbeddingSet::from_rows("b", &[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(fid(&a, &b), Err(Error::DimensionMismatch { .. })));
    }
}
