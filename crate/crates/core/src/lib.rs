//! Chi-square type and discrete EDF goodness-of-fit statistics for
//! multinomial data, their null distributions, and a Monte Carlo power study
//! against ordered trend alternatives.
//!
//! ```
//! use gofpower::{evaluate, NullModel, ObservedCounts, StatisticKind};
//!
//! let model = NullModel::uniform(4, 4).unwrap();
//! let obs = ObservedCounts::new(vec![4, 0, 0, 0]);
//! let t = evaluate(StatisticKind::Pearson, &obs, &model).unwrap();
//! assert_eq!(t.get(), 12.0);
//! ```

pub mod distributions;
pub mod error;
pub mod null_dist;
pub mod power;
pub mod report;
pub mod stats;

pub use distributions::{
    builtin_alternative, builtin_alternatives, load_alternatives, normalize, parse_alternatives,
    sample_batch, sample_batch_at, sample_multinomial, AlternativeSpec, MultinomialSampler,
    SeedSpec, GENERATOR_ID,
};
pub use error::{Error, Result};
pub use null_dist::{
    composition_count, critical_bracket, exact_null_distribution, exact_null_distributions,
    mc_null_distribution, mc_null_distributions, survival_at, CacheKey, CriticalBracket, NullCache,
    NullDistribution, NullSource, DEFAULT_EXACT_BUDGET,
};
pub use power::{
    interpolated_power, power_at_cutoff, rank_powers, rank_statistics, run_study, PowerEstimate,
    Ranking, StudyConfig, StudyResult, DEFAULT_SAMPLE_SIZES, DEFAULT_TIE_THRESHOLD,
};
pub use report::{emit_csv, emit_json, emit_svg_figure, FigureSpec};
pub use stats::{
    evaluate, evaluate_all, partial_deviation_sums, DeviationSums, Evaluator, NullModel,
    ObservedCounts, StatValue, StatisticKind,
};
