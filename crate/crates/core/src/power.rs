//! Power estimation at the bracketing cutoffs, interpolation to the nominal
//! level, the full study grid, and per-slice rankings.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::distributions::{
    builtin_alternatives, AlternativeSpec, MultinomialSampler, SeedSpec, GENERATOR_ID,
};
use crate::error::{Error, Result};
use crate::null_dist::{
    composition_count, critical_bracket, evaluate_replications, exact_null_distributions,
    mc_null_distributions, CacheKey, CriticalBracket, NullCache, NullDistribution, NullSource,
    DEFAULT_EXACT_BUDGET,
};
use crate::stats::{Evaluator, NullModel, StatValue, StatisticKind};

pub const DEFAULT_TIE_THRESHOLD: f64 = 0.01;
pub const DEFAULT_SAMPLE_SIZES: [u64; 6] = [10, 20, 30, 50, 100, 200];

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub kinds: Vec<StatisticKind>,
    pub alternatives: Vec<AlternativeSpec>,
    pub sample_sizes: Vec<u64>,
    pub k: usize,
    pub reps_power: u64,
    pub reps_null: u64,
    pub alpha: f64,
    pub master_seed: u64,
    /// Largest composition count for which the null is enumerated exactly.
    pub exact_threshold: u128,
    pub cache_dir: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            kinds: StatisticKind::STUDY.to_vec(),
            alternatives: builtin_alternatives()
                .into_iter()
                .filter(|a| a.name != "uniform")
                .collect(),
            sample_sizes: DEFAULT_SAMPLE_SIZES.to_vec(),
            k: 10,
            reps_power: 10_000,
            reps_null: 10_000,
            alpha: 0.05,
            master_seed: 0,
            exact_threshold: DEFAULT_EXACT_BUDGET,
            cache_dir: None,
        }
    }
}

impl StudyConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        if self.k < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 cells, got {}",
                self.k
            )));
        }
        if self.reps_power == 0 {
            return Err(Error::Domain("reps_power must be positive".into()));
        }
        if let Some(n) = self.sample_sizes.iter().find(|&&n| n == 0) {
            return Err(Error::Domain(format!("invalid sample size {n}")));
        }
        if let Some(a) = self.alternatives.iter().find(|a| a.p.len() != self.k) {
            return Err(Error::Dimension {
                expected: self.k,
                actual: a.p.len(),
            });
        }
        Ok(())
    }

    fn sorted_sizes(&self) -> Vec<u64> {
        let mut sizes = self.sample_sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
    }

    fn sorted_kinds(&self) -> Vec<StatisticKind> {
        let mut kinds = self.kinds.clone();
        kinds.sort_unstable();
        kinds.dedup();
        kinds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub statistic: StatisticKind,
    pub alternative: String,
    pub n: u64,
    pub reps: u64,
    pub bracket: CriticalBracket,
    pub power_liberal: f64,
    pub power_conservative: f64,
    pub power_interpolated: f64,
    pub std_err: f64,
    pub null_source: NullSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeRecord {
    pub name: String,
    pub raw: Vec<f64>,
    pub raw_sum: f64,
    pub normalized: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullRecord {
    pub statistic: StatisticKind,
    pub n: u64,
    pub source: NullSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub task: String,
    pub stream_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub software_version: String,
    pub generator: String,
    pub master_seed: u64,
    pub k: usize,
    pub alpha: f64,
    pub reps_power: u64,
    pub reps_null: u64,
    pub exact_threshold: u128,
    pub sample_sizes: Vec<u64>,
    pub statistics: Vec<StatisticKind>,
    pub normalization: Vec<AlternativeRecord>,
    pub null_distributions: Vec<NullRecord>,
    pub streams: Vec<StreamRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub provenance: Provenance,
    /// Ordered by alternative (configuration order), then `n`, then statistic.
    pub grid: Vec<PowerEstimate>,
}

impl StudyResult {
    pub fn get(&self, kind: StatisticKind, alternative: &str, n: u64) -> Option<&PowerEstimate> {
        self.grid
            .iter()
            .find(|e| e.statistic == kind && e.alternative == alternative && e.n == n)
    }

    /// Interpolated power, panicking if the grid has no such entry.
    pub fn power(&self, kind: StatisticKind, alternative: &str, n: u64) -> f64 {
        self.get(kind, alternative, n)
            .unwrap_or_else(|| panic!("no entry for {kind} / {alternative} / n = {n}"))
            .power_interpolated
    }

    pub fn slice(&self, alternative: &str, n: u64) -> Vec<&PowerEstimate> {
        self.grid
            .iter()
            .filter(|e| e.alternative == alternative && e.n == n)
            .collect()
    }
}

/// Fraction of `reps` alternative samples whose statistic lies strictly above
/// `cutoff`.
pub fn power_at_cutoff(
    kind: StatisticKind,
    alt: &AlternativeSpec,
    model: &NullModel,
    cutoff: StatValue,
    reps: u64,
    seed: &SeedSpec,
) -> Result<f64> {
    if reps == 0 {
        return Err(Error::Domain("reps must be positive".into()));
    }
    let evaluator = Evaluator::new(model, &[kind])?;
    let sampler = MultinomialSampler::new(&alt.p, model.n())?;
    let column = evaluate_replications(&evaluator, &sampler, seed, reps)
        .pop()
        .expect("one column");
    Ok(rejection_rate(&column, cutoff))
}

fn rejection_rate(values: &[StatValue], cutoff: StatValue) -> f64 {
    let rejected = values.iter().filter(|v| v.exceeds(cutoff)).count();
    rejected as f64 / values.len() as f64
}

/// Linear interpolation in attained size between the powers at the two
/// bracketing cutoffs.
pub fn interpolated_power(
    bracket: &CriticalBracket,
    power_liberal: f64,
    power_conservative: f64,
    alpha: f64,
) -> Result<f64> {
    if bracket.exact_hit {
        return Ok(power_liberal);
    }
    let width = bracket.alpha_liberal - bracket.alpha_conservative;
    if width <= 0.0 {
        return Err(Error::Bracket {
            target: alpha,
            reason: "attained sizes coincide without an exact hit".into(),
        });
    }
    if alpha < bracket.alpha_conservative || alpha > bracket.alpha_liberal {
        return Err(Error::Bracket {
            target: alpha,
            reason: format!(
                "level outside [{}, {}]",
                bracket.alpha_conservative, bracket.alpha_liberal
            ),
        });
    }
    let t = (alpha - bracket.alpha_conservative) / width;
    Ok(power_conservative + t * (power_liberal - power_conservative))
}

fn null_stream(cfg: &StudyConfig, n: u64) -> (String, SeedSpec) {
    let task = format!("null/k={}/n={n}", cfg.k);
    let seed = SeedSpec::for_task(cfg.master_seed, &task);
    (task, seed)
}

fn alternative_stream(cfg: &StudyConfig, alt: &AlternativeSpec, n: u64) -> (String, SeedSpec) {
    let task = format!("alternative/{}/k={}/n={n}", alt.name, cfg.k);
    let seed = SeedSpec::for_task(cfg.master_seed, &task);
    (task, seed)
}

fn null_distributions_for(
    cfg: &StudyConfig,
    kinds: &[StatisticKind],
    model: &NullModel,
    cache: Option<&NullCache>,
) -> Result<Vec<NullDistribution>> {
    let exact = composition_count(model.n(), model.k()) <= cfg.exact_threshold;
    let mc = (!exact).then(|| (cfg.reps_null, null_stream(cfg, model.n()).1));
    let keys: Vec<CacheKey> = kinds.iter().map(|&k| CacheKey::new(k, model, mc)).collect();
    if let Some(cache) = cache {
        let cached: Option<Vec<_>> = keys
            .iter()
            .map(|key| cache.load(key))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .collect();
        if let Some(dists) = cached {
            return Ok(dists);
        }
    }
    let dists = match mc {
        None => exact_null_distributions(kinds, model, cfg.exact_threshold)?,
        Some((reps, seed)) => mc_null_distributions(kinds, model, reps, &seed)?,
    };
    if let Some(cache) = cache {
        for (key, dist) in keys.iter().zip(&dists) {
            cache.store(key, dist)?;
        }
    }
    Ok(dists)
}

/// Runs the whole grid: null distributions and brackets once per `(kind, N)`,
/// then one shared alternative batch per `(alternative, N)` evaluated under
/// every statistic.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let kinds = cfg.sorted_kinds();
    let sizes = cfg.sorted_sizes();
    let cache = cfg.cache_dir.as_ref().map(NullCache::new).transpose()?;

    let mut null_records = Vec::new();
    let mut streams = Vec::new();
    // brackets[size index][kind index]
    let mut brackets: Vec<Vec<(CriticalBracket, NullSource)>> = Vec::new();
    for &n in &sizes {
        let model = NullModel::uniform(cfg.k, n)?;
        if kinds.is_empty() {
            brackets.push(Vec::new());
            continue;
        }
        let dists = null_distributions_for(cfg, &kinds, &model, cache.as_ref())
            .map_err(|e| e.in_cell(format!("null distribution at n = {n}")))?;
        if matches!(dists[0].source, NullSource::MonteCarlo { .. }) {
            let (task, seed) = null_stream(cfg, n);
            streams.push(StreamRecord {
                task,
                stream_id: seed.stream_id,
            });
        }
        let mut row = Vec::with_capacity(kinds.len());
        for dist in dists {
            let bracket = critical_bracket(&dist, cfg.alpha)
                .map_err(|e| e.in_cell(format!("{} at n = {n}", dist.statistic)))?;
            null_records.push(NullRecord {
                statistic: dist.statistic,
                n,
                source: dist.source.clone(),
            });
            row.push((bracket, dist.source));
        }
        brackets.push(row);
    }

    let mut grid = Vec::with_capacity(kinds.len() * sizes.len() * cfg.alternatives.len());
    for alt in &cfg.alternatives {
        for (&n, row) in sizes.iter().zip(&brackets) {
            if kinds.is_empty() {
                continue;
            }
            let model = NullModel::uniform(cfg.k, n)?;
            let (task, seed) = alternative_stream(cfg, alt, n);
            streams.push(StreamRecord {
                task,
                stream_id: seed.stream_id,
            });
            let context = |kind: Option<StatisticKind>| match kind {
                Some(kind) => format!("{kind} / {} / n = {n}", alt.name),
                None => format!("{} / n = {n}", alt.name),
            };
            let evaluator = Evaluator::new(&model, &kinds).map_err(|e| e.in_cell(context(None)))?;
            let sampler =
                MultinomialSampler::new(&alt.p, n).map_err(|e| e.in_cell(context(None)))?;
            let columns = evaluate_replications(&evaluator, &sampler, &seed, cfg.reps_power);
            for ((&kind, column), (bracket, source)) in kinds.iter().zip(columns).zip(row) {
                let power_liberal = rejection_rate(&column, bracket.c_liberal);
                let power_conservative = rejection_rate(&column, bracket.c_conservative);
                let power_interpolated =
                    interpolated_power(bracket, power_liberal, power_conservative, cfg.alpha)
                        .map_err(|e| e.in_cell(context(Some(kind))))?;
                let std_err = (power_interpolated * (1.0 - power_interpolated)
                    / cfg.reps_power as f64)
                    .sqrt();
                grid.push(PowerEstimate {
                    statistic: kind,
                    alternative: alt.name.clone(),
                    n,
                    reps: cfg.reps_power,
                    bracket: *bracket,
                    power_liberal,
                    power_conservative,
                    power_interpolated,
                    std_err,
                    null_source: source.clone(),
                });
            }
        }
    }

    let provenance = Provenance {
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        generator: GENERATOR_ID.to_string(),
        master_seed: cfg.master_seed,
        k: cfg.k,
        alpha: cfg.alpha,
        reps_power: cfg.reps_power,
        reps_null: cfg.reps_null,
        exact_threshold: cfg.exact_threshold,
        sample_sizes: sizes,
        statistics: kinds,
        normalization: cfg
            .alternatives
            .iter()
            .map(|a| AlternativeRecord {
                name: a.name.clone(),
                raw: a.raw.clone(),
                raw_sum: a.raw_sum(),
                normalized: a.p.clone(),
            })
            .collect(),
        null_distributions: null_records,
        streams,
    };
    Ok(StudyResult { provenance, grid })
}

/// Kinds ordered by descending power, split into groups of near-equal power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub alternative: String,
    pub n: u64,
    pub tie_threshold: f64,
    pub groups: Vec<Vec<(StatisticKind, f64)>>,
}

impl Ranking {
    /// One-based rank of `kind`, if present.
    pub fn rank_of(&self, kind: StatisticKind) -> Option<usize> {
        self.groups
            .iter()
            .position(|g| g.iter().any(|(k, _)| *k == kind))
            .map(|i| i + 1)
    }

    pub fn kinds(&self) -> Vec<Vec<StatisticKind>> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|(k, _)| *k).collect())
            .collect()
    }
}

/// Sorts by descending power and merges neighbours whose powers differ by at
/// most `tie_threshold`. Equal powers keep statistic order.
pub fn rank_powers(
    entries: &[(StatisticKind, f64)],
    tie_threshold: f64,
) -> Vec<Vec<(StatisticKind, f64)>> {
    let mut sorted = entries.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut groups: Vec<Vec<(StatisticKind, f64)>> = Vec::new();
    for (kind, power) in sorted {
        match groups.last_mut() {
            Some(group) if group.last().unwrap().1 - power <= tie_threshold + 1e-12 => {
                group.push((kind, power))
            }
            _ => groups.push(vec![(kind, power)]),
        }
    }
    groups
}

pub fn rank_statistics(
    result: &StudyResult,
    alternative: &str,
    n: u64,
    tie_threshold: f64,
) -> Result<Ranking> {
    let entries: Vec<(StatisticKind, f64)> = result
        .slice(alternative, n)
        .into_iter()
        .map(|e| (e.statistic, e.power_interpolated))
        .collect();
    if entries.is_empty() {
        return Err(Error::Lookup {
            alternative: alternative.to_string(),
            n,
        });
    }
    Ok(Ranking {
        alternative: alternative.to_string(),
        n,
        tie_threshold,
        groups: rank_powers(&entries, tie_threshold),
    })
}
