//! Pearson, Spearman and Kendall (tau-b) correlations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn validate<T: Scalar>(x: &[T], y: &[T]) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "need at least 3 paired values, got {}",
            x.len()
        )));
    }
    let widen = |v: &[T]| -> Result<Vec<f64>> {
        v.iter()
            .enumerate()
            .map(|(i, a)| {
                let a = a.widen();
                if a.is_finite() {
                    Ok(a)
                } else {
                    Err(Error::NonFinite { row: i, col: 0 })
                }
            })
            .collect()
    };
    Ok((widen(x)?, widen(y)?))
}

fn pearson_f64(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<f64> {
    let (x, y) = validate(x, y)?;
    pearson_f64(&x, &y)
}

/// 1-based ranks; tied values share the average of their positions.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<f64> {
    let (x, y) = validate(x, y)?;
    pearson_f64(&average_ranks(&x), &average_ranks(&y))
}

/// Kendall's tau-b: `(C - D) / sqrt((C + D + Tx) (C + D + Ty))`, where pairs
/// tied in both variables are left out of every count.
pub fn kendall<T: Scalar>(x: &[T], y: &[T]) -> Result<f64> {
    let (x, y) = validate(x, y)?;
    let (mut concordant, mut discordant, mut tied_x, mut tied_y) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i].partial_cmp(&x[j]).expect("finite") as i8;
            let dy = y[i].partial_cmp(&y[j]).expect("finite") as i8;
            match (dx, dy) {
                (0, 0) => {}
                (0, _) => tied_x += 1,
                (_, 0) => tied_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let base = concordant + discordant;
    let denom = ((base + tied_x) as f64 * (base + tied_y) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::DegenerateInput("all pairs are tied".into()));
    }
    Ok(((concordant as f64 - discordant as f64) / denom).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Pearson,
    Kendall,
    Spearman,
}

impl CorrelationMethod {
    pub const ALL: [CorrelationMethod; 3] = [Self::Pearson, Self::Kendall, Self::Spearman];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pearson => "pearson",
            Self::Kendall => "kendall",
            Self::Spearman => "spearman",
        }
    }

    pub fn apply<T: Scalar>(self, x: &[T], y: &[T]) -> Result<f64> {
        match self {
            Self::Pearson => pearson(x, y),
            Self::Kendall => kendall(x, y),
            Self::Spearman => spearman(x, y),
        }
    }
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(Self::Pearson),
            "kendall" => Ok(Self::Kendall),
            "spearman" => Ok(Self::Spearman),
            other => Err(Error::Domain(format!(
                "unknown correlation method `{other}`"
            ))),
        }
    }
}

/// Metric scores paired with external ratings, one entry per system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub labels: Vec<String>,
    pub scores: Vec<f64>,
    pub ratings: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(labels: Vec<String>, scores: Vec<f64>, ratings: Vec<f64>) -> Result<Self> {
        if scores.len() != ratings.len() || labels.len() != scores.len() {
            return Err(Error::DimensionMismatch {
                expected: scores.len(),
                got: ratings.len(),
            });
        }
        if scores.len() < 3 {
            return Err(Error::DegenerateInput(format!(
                "need at least 3 systems, got {}",
                scores.len()
            )));
        }
        Ok(Self {
            labels,
            scores,
            ratings,
        })
    }

    pub fn correlate(&self, method: CorrelationMethod) -> Result<f64> {
        method.apply(&self.scores, &self.ratings)
    }
}
