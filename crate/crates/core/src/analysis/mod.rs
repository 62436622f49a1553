//! Synthetic experiments, seeded data generation and rank correlations.

pub mod correlation;
pub mod experiments;
pub mod mixture;

pub use correlation::{average_ranks, kendall, pearson, spearman, CorrelationMethod, ScoreSeries};
pub use experiments::{
    k_sweep, mode_collapse_experiment, noise_sweep_experiment, score_pair, ExperimentOptions,
    ExperimentReport, FidScore, Metric, SchnabelScores, ScoreReport,
};
pub use mixture::{child_seed, gen_mixture, sample_modes, Mixture, MixtureSpec, Mode};
