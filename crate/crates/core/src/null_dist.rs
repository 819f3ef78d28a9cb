//! Null distributions of the statistics and the critical values that bracket
//! a target level.
//!
//! A distribution is stored as its distinct support values together with the
//! survival function `P(T > v)` at each of them. Values that agree to within
//! [`TIE_RELATIVE_TOLERANCE`](crate::stats::TIE_RELATIVE_TOLERANCE) are one
//! atom. The rejection rule everywhere is the strict `T > c`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{MultinomialSampler, SeedSpec};
use crate::error::{Error, Result};
use crate::stats::{Evaluator, NullModel, StatValue, StatisticKind};

/// Default cap on the number of compositions enumerated for an exact null.
/// Admits `N <= 20` at `k = 10`.
pub const DEFAULT_EXACT_BUDGET: u128 = 20_000_000;

/// Attained sizes within this distance of the target count as an exact hit.
const EXACT_HIT_TOLERANCE: f64 = 1e-12;

/// Chunks (indexed by the first cell's count) merged per parallel round.
/// Fixed so that results do not depend on the worker count.
const CHUNKS_PER_ROUND: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NullSource {
    MonteCarlo { reps: u64, seed: SeedSpec },
    Exact { compositions: u64 },
}

impl NullSource {
    pub fn label(&self) -> &'static str {
        match self {
            NullSource::MonteCarlo { .. } => "monte_carlo",
            NullSource::Exact { .. } => "exact",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    pub statistic: StatisticKind,
    /// Strictly ascending support values; may end with `inf`.
    pub values: Vec<StatValue>,
    /// `survival[j] = P(T > values[j])`.
    pub survival: Vec<f64>,
    pub source: NullSource,
    pub model: NullModel,
}

impl NullDistribution {
    /// Builds the distribution from atoms sorted by value. Survival is the
    /// tail mass above each merged atom divided by `total`.
    fn from_sorted_atoms(
        statistic: StatisticKind,
        atoms: impl IntoIterator<Item = (StatValue, f64)>,
        total: f64,
        source: NullSource,
        model: NullModel,
    ) -> Self {
        let mut values: Vec<StatValue> = Vec::new();
        let mut mass: Vec<f64> = Vec::new();
        for (v, w) in atoms {
            match values.last() {
                Some(&last) if !v.exceeds(last) => *mass.last_mut().unwrap() += w,
                _ => {
                    values.push(v);
                    mass.push(w);
                }
            }
        }
        let mut survival = vec![0.0; values.len()];
        let mut tail = Neumaier::default();
        for j in (0..values.len()).rev() {
            survival[j] = tail.total() / total;
            tail.add(mass[j]);
        }
        NullDistribution {
            statistic,
            values,
            survival,
            source,
            model,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `P(T > c)` under the step-function distribution.
pub fn survival_at(dist: &NullDistribution, c: StatValue) -> f64 {
    // First atom lying strictly above c.
    let j = dist.values.partition_point(|v| !v.exceeds(c));
    if j == 0 {
        1.0
    } else {
        dist.survival[j - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalBracket {
    pub c_liberal: StatValue,
    pub alpha_liberal: f64,
    pub c_conservative: StatValue,
    pub alpha_conservative: f64,
    pub exact_hit: bool,
}

/// Finds the adjacent pair of attainable cutoffs whose sizes straddle
/// `target`.
pub fn critical_bracket(dist: &NullDistribution, target: f64) -> Result<CriticalBracket> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Bracket {
            target,
            reason: "target level must lie in (0, 1)".into(),
        });
    }
    if dist.values.len() < 2 {
        return Err(Error::Bracket {
            target,
            reason: format!(
                "null distribution of {} has a single support value",
                dist.statistic
            ),
        });
    }
    if let Some(j) = dist
        .survival
        .iter()
        .position(|s| (s - target).abs() <= EXACT_HIT_TOLERANCE)
    {
        return Ok(CriticalBracket {
            c_liberal: dist.values[j],
            alpha_liberal: dist.survival[j],
            c_conservative: dist.values[j],
            alpha_conservative: dist.survival[j],
            exact_hit: true,
        });
    }
    let j = dist
        .survival
        .iter()
        .position(|&s| s < target)
        .expect("survival at the largest value is zero");
    if j == 0 {
        return Err(Error::Bracket {
            target,
            reason: format!(
                "{} puts mass {} on its smallest value",
                dist.statistic,
                1.0 - dist.survival[0]
            ),
        });
    }
    Ok(CriticalBracket {
        c_liberal: dist.values[j - 1],
        alpha_liberal: dist.survival[j - 1],
        c_conservative: dist.values[j],
        alpha_conservative: dist.survival[j],
        exact_hit: false,
    })
}

pub fn mc_null_distribution(
    kind: StatisticKind,
    model: &NullModel,
    reps: u64,
    seed: &SeedSpec,
) -> Result<NullDistribution> {
    Ok(mc_null_distributions(&[kind], model, reps, seed)?
        .pop()
        .expect("one distribution per kind"))
}

/// Monte Carlo null distributions for several statistics from one shared
/// batch of null samples.
pub fn mc_null_distributions(
    kinds: &[StatisticKind],
    model: &NullModel,
    reps: u64,
    seed: &SeedSpec,
) -> Result<Vec<NullDistribution>> {
    if reps < 100 {
        return Err(Error::Domain(format!(
            "Monte Carlo null needs at least 100 replications, got {reps}"
        )));
    }
    let evaluator = Evaluator::new(model, kinds)?;
    let sampler = MultinomialSampler::new(model.probabilities(), model.n())?;
    let columns = evaluate_replications(&evaluator, &sampler, seed, reps);
    let source = NullSource::MonteCarlo { reps, seed: *seed };
    Ok(kinds
        .iter()
        .zip(columns)
        .map(|(&kind, mut column)| {
            column.sort_unstable();
            NullDistribution::from_sorted_atoms(
                kind,
                column.into_iter().map(|v| (v, 1.0)),
                reps as f64,
                source.clone(),
                model.clone(),
            )
        })
        .collect())
}

/// Draws replications `0..reps` and evaluates every configured statistic.
/// Returns one column of values per kind, in replication order.
pub(crate) fn evaluate_replications(
    evaluator: &Evaluator,
    sampler: &MultinomialSampler,
    seed: &SeedSpec,
    reps: u64,
) -> Vec<Vec<StatValue>> {
    let width = evaluator.kinds().len();
    let rows: Vec<Vec<StatValue>> = (0..reps)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(counts, scratch), rep| {
                let mut rng = seed.rng_for(rep);
                sampler.sample_into(&mut rng, counts);
                let mut row = vec![StatValue::ZERO; width];
                evaluator.evaluate_into(counts, scratch, &mut row);
                row
            },
        )
        .collect();
    let mut columns = vec![Vec::with_capacity(rows.len()); width];
    for row in rows {
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    columns
}

/// `C(n + k - 1, k - 1)`, the number of compositions of `n` into `k`
/// nonnegative parts. Saturates at `u128::MAX`.
pub fn composition_count(n: u64, k: usize) -> u128 {
    if k == 0 {
        return u128::from(n == 0);
    }
    let r = (k - 1) as u128;
    let top = u128::from(n) + r;
    let mut acc: u128 = 1;
    for i in 1..=r {
        // acc * (top - r + i) / i stays integral at every step.
        match acc.checked_mul(top - r + i) {
            Some(x) => acc = x / i,
            None => return u128::MAX,
        }
    }
    acc
}

pub fn exact_null_distribution(
    kind: StatisticKind,
    model: &NullModel,
    budget: u128,
) -> Result<NullDistribution> {
    Ok(exact_null_distributions(&[kind], model, budget)?
        .pop()
        .expect("one distribution per kind"))
}

/// Exact null distributions by enumerating every composition of `N` into `k`
/// cells, weighted by its multinomial probability.
pub fn exact_null_distributions(
    kinds: &[StatisticKind],
    model: &NullModel,
    budget: u128,
) -> Result<Vec<NullDistribution>> {
    let count = composition_count(model.n(), model.k());
    if count > budget {
        return Err(Error::Capacity { count, budget });
    }
    let evaluator = Evaluator::new(model, kinds)?;
    let source = NullSource::Exact {
        compositions: u64::try_from(count).unwrap_or(u64::MAX),
    };
    Ok(kinds
        .iter()
        .zip(exact_atoms(&evaluator, count, budget)?)
        .map(|(&kind, atoms)| {
            NullDistribution::from_sorted_atoms(kind, atoms, 1.0, source.clone(), model.clone())
        })
        .collect())
}

/// Probability atoms per configured statistic, sorted by value. Atoms are
/// keyed by exact bit pattern; near-ties are merged later.
fn exact_atoms(
    evaluator: &Evaluator,
    count: u128,
    budget: u128,
) -> Result<Vec<Vec<(StatValue, f64)>>> {
    if count > budget {
        return Err(Error::Capacity { count, budget });
    }
    let model = evaluator.model();
    let n = model.n();
    let ln_p: Vec<f64> = model.probabilities().iter().map(|p| p.ln()).collect();
    let ln_fact: Vec<f64> = (0..=n)
        .scan(0.0, |acc, i| {
            if i > 0 {
                *acc += (i as f64).ln();
            }
            Some(*acc)
        })
        .collect();

    let mut totals: Vec<HashMap<u64, Neumaier>> = vec![HashMap::new(); evaluator.kinds().len()];
    let first_counts: Vec<u64> = (0..=n).collect();
    for round in first_counts.chunks(CHUNKS_PER_ROUND) {
        let partials: Vec<Vec<HashMap<u64, Neumaier>>> = round
            .par_iter()
            .map(|&first| enumerate_chunk(evaluator, &ln_p, &ln_fact, first))
            .collect();
        for chunk in partials {
            for (total, part) in totals.iter_mut().zip(chunk) {
                for (bits, acc) in part {
                    total.entry(bits).or_default().add_partial(&acc);
                }
            }
        }
    }

    Ok(totals
        .into_iter()
        .map(|atoms| {
            let mut atoms: Vec<(StatValue, f64)> = atoms
                .into_iter()
                .map(|(bits, acc)| (StatValue::new(f64::from_bits(bits)), acc.total()))
                .collect();
            atoms.sort_unstable_by_key(|a| a.0);
            atoms
        })
        .collect())
}

/// All compositions whose first cell holds `first`, visited depth-first with
/// the log-probability carried down the recursion.
fn enumerate_chunk(
    evaluator: &Evaluator,
    ln_p: &[f64],
    ln_fact: &[f64],
    first: u64,
) -> Vec<HashMap<u64, Neumaier>> {
    let kinds = evaluator.kinds().len();
    let k = ln_p.len();
    let n = evaluator.model().n();
    let mut state = ChunkState {
        evaluator,
        ln_p,
        ln_fact,
        counts: vec![0; k],
        scratch: Vec::with_capacity(k),
        out: vec![StatValue::ZERO; kinds],
        atoms: vec![HashMap::new(); kinds],
    };
    let log_w = ln_fact[n as usize] + cell_log_weight(ln_p[0], ln_fact, first);
    if log_w > f64::NEG_INFINITY {
        state.counts[0] = first;
        state.descend(1, n - first, log_w);
    }
    state.atoms
}

struct ChunkState<'a> {
    evaluator: &'a Evaluator,
    ln_p: &'a [f64],
    ln_fact: &'a [f64],
    counts: Vec<u64>,
    scratch: Vec<f64>,
    out: Vec<StatValue>,
    atoms: Vec<HashMap<u64, Neumaier>>,
}

impl ChunkState<'_> {
    fn descend(&mut self, cell: usize, remaining: u64, log_w: f64) {
        let last = self.counts.len() - 1;
        if cell == last {
            let log_w = log_w + cell_log_weight(self.ln_p[cell], self.ln_fact, remaining);
            if log_w == f64::NEG_INFINITY {
                return;
            }
            self.counts[cell] = remaining;
            self.evaluator
                .evaluate_into(&self.counts, &mut self.scratch, &mut self.out);
            let w = log_w.exp();
            for (atoms, v) in self.atoms.iter_mut().zip(&self.out) {
                atoms.entry(v.get().to_bits()).or_default().add(w);
            }
            return;
        }
        for o in 0..=remaining {
            let next = log_w + cell_log_weight(self.ln_p[cell], self.ln_fact, o);
            if next == f64::NEG_INFINITY {
                continue;
            }
            self.counts[cell] = o;
            self.descend(cell + 1, remaining - o, next);
        }
    }
}

/// `o * ln p - ln o!`, with `0 * ln 0 = 0`.
fn cell_log_weight(ln_p: f64, ln_fact: &[f64], o: u64) -> f64 {
    if o == 0 {
        0.0
    } else {
        o as f64 * ln_p - ln_fact[o as usize]
    }
}

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn add_partial(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Identifies a cached null distribution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub statistic: StatisticKind,
    pub k: usize,
    pub n: u64,
    pub p0_hash: u64,
    /// `None` for an exact distribution.
    pub monte_carlo: Option<(u64, SeedSpec)>,
}

impl CacheKey {
    pub fn new(
        statistic: StatisticKind,
        model: &NullModel,
        monte_carlo: Option<(u64, SeedSpec)>,
    ) -> Self {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for p in model.probabilities() {
            for b in p.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        CacheKey {
            statistic,
            k: model.k(),
            n: model.n(),
            p0_hash: h,
            monte_carlo,
        }
    }

    pub fn file_name(&self) -> String {
        let source = match &self.monte_carlo {
            None => "exact".to_string(),
            Some((reps, seed)) => format!("mc{reps}_s{}_{:016x}", seed.master_seed, seed.stream_id),
        };
        format!(
            "{}_k{}_n{}_{:016x}_{}.json",
            self.statistic, self.k, self.n, self.p0_hash, source
        )
    }
}

/// Directory of serialized null distributions.
#[derive(Debug, Clone)]
pub struct NullCache {
    dir: PathBuf,
}

impl NullCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        std::fs::create_dir_all(dir.as_ref())?;
        Ok(NullCache {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    pub fn load(&self, key: &CacheKey) -> Result<Option<NullDistribution>> {
        let path = self.dir.join(key.file_name());
        if !path.exists() {
            return Ok(None);
        }
        let dist = NullDistribution::from_json(&std::fs::read_to_string(path)?)?;
        Ok(Some(dist))
    }

    pub fn store(&self, key: &CacheKey, dist: &NullDistribution) -> Result<()> {
        std::fs::write(self.dir.join(key.file_name()), dist.to_json()?)?;
        Ok(())
    }
}
