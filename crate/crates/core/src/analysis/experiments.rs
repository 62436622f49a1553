//! Metric evaluation over a pair of sets and the synthetic experiment sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::mixture::{child_seed, gen_mixture, sample_modes, standard_normal_like, MixtureSpec};
use crate::baselines::{fid, PrecisionRecall};
use crate::error::{Error, Result};
use crate::estimators::{Estimate, EstimatorKind, SetPair};
use crate::geometry::{build_geometry, EmbeddingSet};
use crate::io::extended_float;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Petersen,
    Schnabel,
    Capture,
    Impar,
    Fid,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Self::Petersen,
        Self::Schnabel,
        Self::Capture,
        Self::Impar,
        Self::Fid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Petersen => "petersen",
            Self::Schnabel => "schnabel",
            Self::Capture => "capture",
            Self::Impar => "impar",
            Self::Fid => "fid",
        }
    }

    /// Parses a metric name; `all` expands to every metric.
    pub fn parse_list(s: &str) -> Result<Vec<Metric>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                out.extend(Self::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(Error::Domain("empty metric list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "petersen" => Ok(Self::Petersen),
            "schnabel" => Ok(Self::Schnabel),
            "capture" => Ok(Self::Capture),
            "impar" => Ok(Self::Impar),
            "fid" => Ok(Self::Fid),
            other => Err(Error::UnknownEstimator(other.to_string())),
        }
    }
}

/// Schnabel in both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchnabelScores {
    pub quality: f64,
    pub diversity: f64,
    /// `(reference, evaluation)` direction.
    pub quality_estimate: Estimate,
    /// `(evaluation, reference)` direction.
    pub diversity_estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidScore {
    pub fid: f64,
}

/// Every requested metric for one `(reference, evaluation)` pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub petersen: Option<Estimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schnabel: Option<SchnabelScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture: Option<Estimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impar: Option<PrecisionRecall>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fid: Option<FidScore>,
}

impl ScoreReport {
    /// Flat `(series name, value)` view used by the sweeps and the CSV writer.
    pub fn values(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        if let Some(e) = &self.petersen {
            out.push(("petersen".to_string(), e.score));
        }
        if let Some(s) = &self.schnabel {
            out.push(("schnabel_quality".to_string(), s.quality));
            out.push(("schnabel_diversity".to_string(), s.diversity));
        }
        if let Some(e) = &self.capture {
            out.push(("capture".to_string(), e.score));
        }
        if let Some(pr) = &self.impar {
            out.push(("impar_precision".to_string(), pr.precision));
            out.push(("impar_recall".to_string(), pr.recall));
        }
        if let Some(f) = &self.fid {
            out.push(("fid".to_string(), f.fid));
        }
        out
    }

    /// Drops the per-iteration Schnabel records.
    pub fn without_traces(mut self) -> Self {
        if let Some(s) = self.schnabel.as_mut() {
            for e in [&mut s.quality_estimate, &mut s.diversity_estimate] {
                if let crate::estimators::Counts::Schnabel(c) = &mut e.counts {
                    c.trace.clear();
                }
            }
        }
        self
    }
}

/// Evaluates `metrics` on a reference/evaluation pair at neighbor count `k`.
pub fn score_pair<T: Scalar>(
    reference: &EmbeddingSet<T>,
    evaluation: &EmbeddingSet<T>,
    k: usize,
    metrics: &[Metric],
) -> Result<ScoreReport> {
    let mut report = ScoreReport::default();
    let needs_pair = metrics.iter().any(|m| *m != Metric::Fid);
    if needs_pair {
        let pair = SetPair::new(reference, evaluation, k)?;
        for m in metrics {
            match m {
                Metric::Petersen => report.petersen = Some(pair.petersen()),
                Metric::Capture => report.capture = Some(pair.capture()),
                Metric::Impar => report.impar = Some(PrecisionRecall::from_pair(&pair)),
                Metric::Schnabel => {
                    let quality_estimate = pair.schnabel();
                    let diversity_estimate = pair.swapped().schnabel();
                    report.schnabel = Some(SchnabelScores {
                        quality: quality_estimate.score,
                        diversity: diversity_estimate.score,
                        quality_estimate,
                        diversity_estimate,
                    });
                }
                Metric::Fid => {}
            }
        }
    }
    if metrics.contains(&Metric::Fid) {
        report.fid = Some(FidScore {
            fid: fid(reference, evaluation)?,
        });
    }
    Ok(report)
}

/// Record of one sweep: an axis and one series per metric output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub axis_label: String,
    pub axis: Vec<f64>,
    /// Series name to one value per axis point. Values are means over repeats.
    #[serde(with = "extended_float::series")]
    pub series: BTreeMap<String, Vec<f64>>,
    /// Master seed of every repeat.
    pub seeds: Vec<u64>,
    pub config: BTreeMap<String, Value>,
}

impl ExperimentReport {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series.get(name).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub k: usize,
    pub metrics: Vec<Metric>,
    /// Independent repetitions averaged into each series value.
    pub repeats: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            k: crate::DEFAULT_K,
            metrics: Metric::ALL.to_vec(),
            repeats: 1,
        }
    }
}

impl ExperimentOptions {
    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Domain("repeats must be at least 1".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Domain("no metrics requested".into()));
        }
        Ok(())
    }
}

/// Averages per-(repeat, axis point) score reports into series.
fn collect_series(grid: Vec<Vec<ScoreReport>>, axis_len: usize) -> BTreeMap<String, Vec<f64>> {
    let repeats = grid.len() as f64;
    let mut series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for run in &grid {
        for (a, report) in run.iter().enumerate() {
            for (name, v) in report.values() {
                series.entry(name).or_insert_with(|| vec![0.0; axis_len])[a] += v;
            }
        }
    }
    for values in series.values_mut() {
        values.iter_mut().for_each(|v| *v /= repeats);
    }
    series
}

fn base_config(base: &MixtureSpec, opts: &ExperimentOptions) -> BTreeMap<String, Value> {
    let mut config = BTreeMap::new();
    config.insert("k".into(), json!(opts.k));
    config.insert("repeats".into(), json!(opts.repeats));
    config.insert("modes".into(), json!(base.modes.len()));
    config.insert("samples_per_mode".into(), json!(base.samples_per_mode));
    config.insert("n_per_side".into(), json!(base.total_samples()));
    config.insert("d".into(), json!(base.dim));
    config.insert("seed".into(), json!(base.seed));
    config.insert(
        "metrics".into(),
        json!(opts.metrics.iter().map(|m| m.as_str()).collect::<Vec<_>>()),
    );
    config
}

/// Splits `n` samples evenly over the first `survivors` modes.
fn survivor_counts(n: usize, modes: usize, survivors: usize) -> Vec<usize> {
    (0..modes)
        .map(|m| {
            if m < survivors {
                n / survivors + usize::from(m < n % survivors)
            } else {
                0
            }
        })
        .collect()
}

/// Drops 0, 1, ..., `modes - 1` modes (highest index first) from the
/// evaluation set while the reference keeps every mode.
///
/// The evaluation set is refilled with fresh draws from the surviving modes,
/// so `|S_e| == |S_r|` at every axis point. Repeat `r` uses master seed
/// `child_seed(base.seed, r)`; its reference is drawn from stream 0 and the
/// evaluation set at axis point `a` from stream `a + 1`.
pub fn mode_collapse_experiment(
    base: &MixtureSpec,
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    base.validate()?;
    opts.validate()?;
    let modes = base.modes.len();
    if modes < 2 {
        return Err(Error::Domain(
            "mode collapse needs at least two modes".into(),
        ));
    }
    let n = base.total_samples();
    let seeds: Vec<u64> = (0..opts.repeats as u64)
        .map(|r| child_seed(base.seed, r))
        .collect();

    let grid = seeds
        .par_iter()
        .map(|&master| -> Result<Vec<ScoreReport>> {
            let reference = gen_mixture(&base.with_seed(child_seed(master, 0)))?.set;
            (0..modes)
                .into_par_iter()
                .map(|dropped| {
                    let counts = survivor_counts(n, modes, modes - dropped);
                    let eval_seed = child_seed(master, dropped as u64 + 1);
                    let evaluation = sample_modes(base, &counts, eval_seed)?.set;
                    score_pair(&reference, &evaluation, opts.k, &opts.metrics)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ExperimentReport {
        experiment: "mode-collapse".into(),
        axis_label: "dropped_modes".into(),
        axis: (0..modes).map(|m| m as f64).collect(),
        series: collect_series(grid, modes),
        seeds,
        config: base_config(base, opts),
    })
}

/// Adds isotropic Gaussian noise of growing stddev to the evaluation set.
///
/// Within a repeat, every axis point perturbs the same evaluation draw
/// (stream 1) with the same unit-normal matrix (stream 2) scaled by sigma,
/// so the curves differ only through sigma. The reference is stream 0.
pub fn noise_sweep_experiment(
    base: &MixtureSpec,
    sigmas: &[f64],
    opts: &ExperimentOptions,
) -> Result<ExperimentReport> {
    base.validate()?;
    opts.validate()?;
    if sigmas.first() != Some(&0.0) {
        return Err(Error::Domain("noise sweep must start at sigma = 0".into()));
    }
    if sigmas.windows(2).any(|w| w[0] >= w[1]) || sigmas.iter().any(|s| !s.is_finite()) {
        return Err(Error::Domain(
            "sigmas must be finite and strictly ascending".into(),
        ));
    }
    let seeds: Vec<u64> = (0..opts.repeats as u64)
        .map(|r| child_seed(base.seed, r))
        .collect();

    let grid = seeds
        .par_iter()
        .map(|&master| -> Result<Vec<ScoreReport>> {
            let reference = gen_mixture(&base.with_seed(child_seed(master, 0)))?.set;
            let clean = gen_mixture(&base.with_seed(child_seed(master, 1)))?.set;
            let noise = standard_normal_like(&clean, child_seed(master, 2));
            sigmas
                .par_iter()
                .map(|&sigma| {
                    let data = clean
                        .as_slice()
                        .iter()
                        .zip(&noise)
                        .map(|(v, z)| v + sigma * z)
                        .collect();
                    let evaluation = EmbeddingSet::new("noisy", clean.dim(), data)?;
                    score_pair(&reference, &evaluation, opts.k, &opts.metrics)
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut config = base_config(base, opts);
    config.insert("sigmas".into(), json!(sigmas));
    Ok(ExperimentReport {
        experiment: "noise".into(),
        axis_label: "sigma".into(),
        axis: sigmas.to_vec(),
        series: collect_series(grid, sigmas.len()),
        seeds,
        config,
    })
}

/// Estimated population and score of every estimator at each `k`.
///
/// Series: `<estimator>_p_hat` and `<estimator>_score` for
/// `(S, S')`, plus `schnabel_diversity` for the reversed direction. The k-NN
/// lists are computed once at the largest `k` and truncated.
pub fn k_sweep<T: Scalar>(
    s: &EmbeddingSet<T>,
    s_prime: &EmbeddingSet<T>,
    k_values: &[usize],
) -> Result<ExperimentReport> {
    let k_max = *k_values
        .iter()
        .max()
        .ok_or_else(|| Error::Domain("no k values given".into()))?;
    if s.dim() != s_prime.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: s_prime.dim(),
        });
    }
    let full_s = build_geometry(s, k_max)?;
    let full_sp = build_geometry(s_prime, k_max)?;

    let rows = k_values
        .par_iter()
        .map(|&k| -> Result<Vec<(String, f64)>> {
            let pair = SetPair::from_geometries(full_s.with_k(k)?, full_sp.with_k(k)?)?;
            let mut out = Vec::new();
            for kind in EstimatorKind::ALL {
                let e = pair.estimate(kind);
                out.push((format!("{kind}_p_hat"), e.estimated_population));
                out.push((format!("{kind}_score"), e.score));
            }
            out.push(("schnabel_diversity".into(), pair.swapped().schnabel().score));
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in rows {
        for (name, v) in row {
            series.entry(name).or_default().push(v);
        }
    }
    let mut config = BTreeMap::new();
    config.insert("k_values".into(), json!(k_values));
    config.insert("n_s".into(), json!(s.len()));
    config.insert("n_s_prime".into(), json!(s_prime.len()));
    config.insert("d".into(), json!(s.dim()));
    Ok(ExperimentReport {
        experiment: "k-sweep".into(),
        axis_label: "k".into(),
        axis: k_values.iter().map(|&k| k as f64).collect(),
        series,
        seeds: Vec::new(),
        config,
    })
}
