//! Goodness-of-fit statistics for multinomial frequency vectors.
//!
//! Thirteen statistics are supported: the four classical chi-square type
//! statistics, four variants that replace the per-cell expected count by its
//! mean, and five statistics built on the partial sums of observed-minus-
//! expected counts (discrete analogues of the EDF tests).
//!
//! Zero cells follow one convention throughout: `0 * ln(0 / x)` is zero, while
//! any `x / 0` or `ln(x / 0)` term makes the whole statistic `+inf`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance used when two statistic values should be treated as the same
/// atom of a discrete distribution.
pub const TIE_RELATIVE_TOLERANCE: f64 = 1e-9;

/// A statistic value: finite and nonnegative, or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatValue(f64);

impl StatValue {
    pub const ZERO: StatValue = StatValue(0.0);
    pub const INFINITY: StatValue = StatValue(f64::INFINITY);

    /// Panics on NaN. Negative rounding residue (e.g. a log-likelihood
    /// statistic at a perfect fit) is clamped to zero.
    pub fn new(value: f64) -> Self {
        assert!(!value.is_nan(), "statistic value is NaN");
        if value <= 0.0 {
            assert!(value > -1e-6, "statistic value {value} is negative");
            StatValue(0.0)
        } else {
            StatValue(value)
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Absolute slack around `self` inside which other values count as ties.
    pub fn tie_slack(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            TIE_RELATIVE_TOLERANCE * self.0.max(1.0)
        }
    }

    /// Whether `self` lies strictly above the cutoff `c` once ties are merged.
    /// This is the rejection rule `T > c`.
    pub fn exceeds(self, c: StatValue) -> bool {
        if c.is_infinite() {
            return false;
        }
        self.0 > c.0 + c.tie_slack()
    }

    /// Whether `self` and `other` belong to the same distribution atom.
    pub fn ties_with(self, other: StatValue) -> bool {
        let (lo, hi) = if self <= other {
            (self, other)
        } else {
            (other, self)
        };
        !hi.exceeds(lo)
    }
}

impl Eq for StatValue {}

impl PartialOrd for StatValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for StatValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for StatValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for StatValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" {
            return Ok(StatValue::INFINITY);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("invalid statistic value `{s}`")))?;
        if v.is_nan() || v < 0.0 {
            return Err(Error::Parse(format!("invalid statistic value `{s}`")));
        }
        Ok(StatValue::new(v))
    }
}

impl Serialize for StatValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for StatValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Token(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) if v >= 0.0 => Ok(StatValue::new(v)),
            Repr::Num(v) => Err(serde::de::Error::custom(format!("negative statistic {v}"))),
            Repr::Token(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    Pearson,
    Neyman,
    Wilks,
    Kullback,
    NewPearson,
    NewNeyman,
    NewWilks,
    NewKullback,
    #[serde(rename = "discrete_ks")]
    DiscreteKS,
    #[serde(rename = "discrete_cvm")]
    DiscreteCVM,
    DiscreteWatson,
    #[serde(rename = "discrete_ad")]
    DiscreteAD,
    #[serde(rename = "nominal_ks")]
    NominalKS,
}

use StatisticKind::*;

impl StatisticKind {
    pub const ALL: [StatisticKind; 13] = [
        Pearson,
        Neyman,
        Wilks,
        Kullback,
        NewPearson,
        NewNeyman,
        NewWilks,
        NewKullback,
        DiscreteKS,
        DiscreteCVM,
        DiscreteWatson,
        DiscreteAD,
        NominalKS,
    ];

    /// The ten statistics compared in the power study, in legend order.
    pub const STUDY: [StatisticKind; 10] = [
        Pearson,
        NewPearson,
        NewNeyman,
        NewWilks,
        NewKullback,
        DiscreteKS,
        DiscreteCVM,
        DiscreteWatson,
        DiscreteAD,
        NominalKS,
    ];

    /// Command-line / file token.
    pub fn name(self) -> &'static str {
        match self {
            Pearson => "pearson",
            Neyman => "neyman",
            Wilks => "wilks",
            Kullback => "kullback",
            NewPearson => "new_pearson",
            NewNeyman => "new_neyman",
            NewWilks => "new_wilks",
            NewKullback => "new_kullback",
            DiscreteKS => "discrete_ks",
            DiscreteCVM => "discrete_cvm",
            DiscreteWatson => "discrete_watson",
            DiscreteAD => "discrete_ad",
            NominalKS => "nominal_ks",
        }
    }

    /// Human-readable label used in figures.
    pub fn label(self) -> &'static str {
        match self {
            Pearson => "Chi-Square",
            Neyman => "Neyman",
            Wilks => "Wilks",
            Kullback => "Kullback",
            NewPearson => "New Pearson",
            NewNeyman => "New Neyman",
            NewWilks => "New Wilks",
            NewKullback => "New Kullback",
            DiscreteKS => "Discrete KS",
            DiscreteCVM => "Discrete CVM",
            DiscreteWatson => "Discrete Watson",
            DiscreteAD => "Discrete AD",
            NominalKS => "Nominal KS",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }

    /// Whether the statistic depends on the cell order.
    pub fn is_order_sensitive(self) -> bool {
        matches!(self, DiscreteKS | DiscreteCVM | DiscreteWatson | DiscreteAD)
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s).ok_or_else(|| Error::Parse(format!("unknown statistic `{s}`")))
    }
}

/// Null hypothesis for `k` cells and a sample of size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NullModelRepr", try_from = "NullModelRepr")]
pub struct NullModel {
    n: u64,
    p0: Vec<f64>,
    expected: Vec<f64>,
    e_bar: f64,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NullModelRepr {
    k: usize,
    n: u64,
    p0: Vec<f64>,
}

impl From<NullModel> for NullModelRepr {
    fn from(m: NullModel) -> Self {
        NullModelRepr {
            k: m.k(),
            n: m.n,
            p0: m.p0,
        }
    }
}

impl TryFrom<NullModelRepr> for NullModel {
    type Error = Error;

    fn try_from(r: NullModelRepr) -> Result<Self> {
        if r.k != r.p0.len() {
            return Err(Error::Dimension {
                expected: r.k,
                actual: r.p0.len(),
            });
        }
        NullModel::new(r.p0, r.n)
    }
}

impl NullModel {
    pub fn new(p0: Vec<f64>, n: u64) -> Result<Self> {
        if p0.len() < 2 {
            return Err(Error::Model(format!(
                "need at least 2 cells, got {}",
                p0.len()
            )));
        }
        if n == 0 {
            return Err(Error::Model("sample size must be positive".into()));
        }
        if let Some(p) = p0.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::Model(format!("invalid cell probability {p}")));
        }
        let total: f64 = p0.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Model(format!("cell probabilities sum to {total}")));
        }
        let nf = n as f64;
        let expected: Vec<f64> = p0.iter().map(|p| nf * p).collect();
        let e_bar = expected.iter().sum::<f64>() / p0.len() as f64;
        let cumulative = p0
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(NullModel {
            n,
            p0,
            expected,
            e_bar,
            cumulative,
        })
    }

    pub fn uniform(k: usize, n: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Model(format!("need at least 2 cells, got {k}")));
        }
        Self::new(vec![1.0 / k as f64; k], n)
    }

    pub fn k(&self) -> usize {
        self.p0.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p0
    }

    pub fn expected(&self) -> &[f64] {
        &self.expected
    }

    /// Mean expected count, `N / k`.
    pub fn e_bar(&self) -> f64 {
        self.e_bar
    }

    /// Cumulative null probabilities `H_i`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Same cell probabilities at a different sample size.
    pub fn with_n(&self, n: u64) -> Result<Self> {
        Self::new(self.p0.clone(), n)
    }

    fn check(&self, counts: &[u64]) -> Result<()> {
        if counts.len() != self.k() {
            return Err(Error::Dimension {
                expected: self.k(),
                actual: counts.len(),
            });
        }
        let total: u64 = counts.iter().sum();
        if total != self.n {
            return Err(Error::SampleSize {
                expected: self.n,
                actual: total,
            });
        }
        Ok(())
    }
}

/// Observed cell frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservedCounts(Vec<u64>);

impl ObservedCounts {
    pub fn new(counts: Vec<u64>) -> Self {
        ObservedCounts(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Mean observed count `Ō`.
    pub fn o_bar(&self) -> f64 {
        self.total() as f64 / self.0.len() as f64
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }
}

impl From<Vec<u64>> for ObservedCounts {
    fn from(v: Vec<u64>) -> Self {
        ObservedCounts(v)
    }
}

/// Partial sums `Z_i` of observed minus expected counts, with their
/// probability-weighted mean `Z̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationSums {
    pub z: Vec<f64>,
    pub z_bar: f64,
}

pub fn partial_deviation_sums(obs: &ObservedCounts, model: &NullModel) -> Result<DeviationSums> {
    if obs.k() != model.k() {
        return Err(Error::Dimension {
            expected: model.k(),
            actual: obs.k(),
        });
    }
    let mut z = Vec::with_capacity(model.k());
    fill_deviation_sums(obs.counts(), model.expected(), &mut z);
    let z_bar = weighted_mean(&z, model.probabilities());
    Ok(DeviationSums { z, z_bar })
}

fn fill_deviation_sums(counts: &[u64], expected: &[f64], z: &mut Vec<f64>) {
    z.clear();
    let mut acc = 0.0;
    for (&o, &e) in counts.iter().zip(expected) {
        acc += o as f64 - e;
        z.push(acc);
    }
}

fn weighted_mean(z: &[f64], p: &[f64]) -> f64 {
    z.iter().zip(p).fold(0.0, |acc, (z, p)| acc + z * p)
}

pub fn evaluate(kind: StatisticKind, obs: &ObservedCounts, model: &NullModel) -> Result<StatValue> {
    model.check(obs.counts())?;
    let evaluator = Evaluator::new(model, &[kind])?;
    let mut out = [StatValue::ZERO];
    evaluator.evaluate_into(obs.counts(), &mut Vec::new(), &mut out);
    Ok(out[0])
}

pub fn evaluate_all(
    obs: &ObservedCounts,
    model: &NullModel,
    kinds: &[StatisticKind],
) -> Result<BTreeMap<StatisticKind, StatValue>> {
    model.check(obs.counts())?;
    let evaluator = Evaluator::new(model, kinds)?;
    let mut out = vec![StatValue::ZERO; kinds.len()];
    evaluator.evaluate_into(obs.counts(), &mut Vec::new(), &mut out);
    Ok(kinds.iter().copied().zip(out).collect())
}

/// Evaluates a fixed list of statistics against one null model.
///
/// Log terms for every possible count are tabulated up front, which is what
/// makes exact enumeration over millions of compositions affordable. Counts
/// passed to [`Evaluator::evaluate_into`] must be paired with the model
/// (length `k`, total `N`); this is not rechecked.
#[derive(Debug, Clone)]
pub struct Evaluator {
    kinds: Vec<StatisticKind>,
    model: NullModel,
    needs_z: bool,
    // Per-cell `o * ln(o / E_i)` and `E_i * ln(E_i / o)`, row-major by cell.
    wilks: Vec<f64>,
    kullback: Vec<f64>,
    new_wilks: Vec<f64>,
    new_kullback: Vec<f64>,
    ad_weights: Vec<f64>,
}

impl Evaluator {
    pub fn new(model: &NullModel, kinds: &[StatisticKind]) -> Result<Self> {
        if kinds.contains(&Pearson) && model.expected().iter().any(|&e| e <= 0.0) {
            return Err(Error::Model(
                "Pearson statistic needs every expected count positive".into(),
            ));
        }
        let n = model.n() as usize;
        let row = n + 1;
        let mut ev = Evaluator {
            kinds: kinds.to_vec(),
            model: model.clone(),
            needs_z: kinds.iter().any(|k| k.is_order_sensitive()),
            wilks: Vec::new(),
            kullback: Vec::new(),
            new_wilks: Vec::new(),
            new_kullback: Vec::new(),
            ad_weights: Vec::new(),
        };
        if kinds.contains(&Wilks) {
            ev.wilks = model
                .expected()
                .iter()
                .flat_map(|&e| (0..row).map(move |o| o_ln_o_over(o as f64, e)))
                .collect();
        }
        if kinds.contains(&Kullback) {
            ev.kullback = model
                .expected()
                .iter()
                .flat_map(|&e| (0..row).map(move |o| e_ln_e_over(e, o as f64)))
                .collect();
        }
        let e_bar = model.e_bar();
        if kinds.contains(&NewWilks) {
            ev.new_wilks = (0..row).map(|o| o_ln_o_over(o as f64, e_bar)).collect();
        }
        if kinds.contains(&NewKullback) {
            ev.new_kullback = (0..row).map(|o| e_ln_e_over(e_bar, o as f64)).collect();
        }
        if kinds.contains(&DiscreteAD) {
            let k = model.k();
            ev.ad_weights = model
                .probabilities()
                .iter()
                .zip(model.cumulative())
                .enumerate()
                .map(|(i, (&p, &h))| {
                    let denom = h * (1.0 - h);
                    // The last cell has Z_k = 0 and H_k = 1; it is dropped.
                    if i + 1 == k || p == 0.0 || denom <= 0.0 {
                        0.0
                    } else {
                        p / denom
                    }
                })
                .collect();
        }
        Ok(ev)
    }

    pub fn kinds(&self) -> &[StatisticKind] {
        &self.kinds
    }

    pub fn model(&self) -> &NullModel {
        &self.model
    }

    /// Writes one value per configured kind into `out`. `scratch` holds the
    /// partial sums between calls to avoid reallocating.
    pub fn evaluate_into(&self, counts: &[u64], scratch: &mut Vec<f64>, out: &mut [StatValue]) {
        debug_assert_eq!(counts.len(), self.model.k());
        debug_assert_eq!(out.len(), self.kinds.len());
        let model = &self.model;
        let expected = model.expected();
        let p = model.probabilities();
        let row = model.n() as usize + 1;
        let inv_n = 1.0 / model.n() as f64;

        let mut z_bar = 0.0;
        if self.needs_z {
            fill_deviation_sums(counts, expected, scratch);
            z_bar = weighted_mean(scratch, p);
        }
        let z = scratch.as_slice();

        for (slot, &kind) in out.iter_mut().zip(&self.kinds) {
            let v = match kind {
                Pearson => counts.iter().zip(expected).fold(0.0, |acc, (&o, &e)| {
                    let d = o as f64 - e;
                    acc + d * d / e
                }),
                Neyman => {
                    if counts.contains(&0) {
                        f64::INFINITY
                    } else {
                        counts.iter().zip(expected).fold(0.0, |acc, (&o, &e)| {
                            let d = o as f64 - e;
                            acc + d * d / o as f64
                        })
                    }
                }
                Wilks => {
                    2.0 * counts
                        .iter()
                        .enumerate()
                        .fold(0.0, |acc, (i, &o)| acc + self.wilks[i * row + o as usize])
                }
                Kullback => {
                    2.0 * counts.iter().enumerate().fold(0.0, |acc, (i, &o)| {
                        acc + self.kullback[i * row + o as usize]
                    })
                }
                NewPearson | NewNeyman => {
                    // Both divide by N / k: Ē by definition, Ō because the
                    // counts total N.
                    let denom = if kind == NewPearson {
                        model.e_bar()
                    } else {
                        model.n() as f64 / counts.len() as f64
                    };
                    counts.iter().zip(expected).fold(0.0, |acc, (&o, &e)| {
                        let d = o as f64 - e;
                        acc + d * d / denom
                    })
                }
                NewWilks => {
                    2.0 * counts
                        .iter()
                        .fold(0.0, |acc, &o| acc + self.new_wilks[o as usize])
                }
                NewKullback => {
                    2.0 * counts
                        .iter()
                        .fold(0.0, |acc, &o| acc + self.new_kullback[o as usize])
                }
                DiscreteKS => z.iter().fold(0.0, |acc: f64, z| acc.max(z.abs())),
                DiscreteCVM => inv_n * z.iter().zip(p).fold(0.0, |acc, (z, p)| acc + z * z * p),
                DiscreteWatson => {
                    inv_n
                        * z.iter().zip(p).fold(0.0, |acc, (z, p)| {
                            let d = z - z_bar;
                            acc + d * d * p
                        })
                }
                DiscreteAD => {
                    inv_n
                        * z.iter()
                            .zip(&self.ad_weights)
                            .fold(0.0, |acc, (z, w)| acc + z * z * w)
                }
                NominalKS => {
                    0.5 * counts
                        .iter()
                        .zip(expected)
                        .fold(0.0, |acc, (&o, &e)| acc + (o as f64 - e).abs())
                }
            };
            *slot = StatValue::new(v);
        }
    }
}

fn o_ln_o_over(o: f64, e: f64) -> f64 {
    if o == 0.0 {
        0.0
    } else if e == 0.0 {
        f64::INFINITY
    } else {
        o * (o / e).ln()
    }
}

fn e_ln_e_over(e: f64, o: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else if o == 0.0 {
        f64::INFINITY
    } else {
        e * (e / o).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform4() -> NullModel {
        NullModel::uniform(4, 4).unwrap()
    }

    fn eval(kind: StatisticKind, counts: &[u64]) -> StatValue {
        evaluate(kind, &ObservedCounts::new(counts.to_vec()), &uniform4()).unwrap()
    }

    #[test]
    fn deviation_sums() {
        let m = uniform4();
        let d = partial_deviation_sums(&ObservedCounts::new(vec![1, 1, 1, 1]), &m).unwrap();
        assert_eq!(d.z, vec![0.0; 4]);
        let d = partial_deviation_sums(&ObservedCounts::new(vec![4, 0, 0, 0]), &m).unwrap();
        assert_eq!(d.z, vec![3.0, 2.0, 1.0, 0.0]);
        assert_eq!(d.z_bar, 1.5);
        assert!(matches!(
            partial_deviation_sums(&ObservedCounts::new(vec![4, 0, 0]), &m),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn hand_computed_values() {
        let o = [4, 0, 0, 0];
        assert_eq!(eval(Pearson, &o).get(), 12.0);
        assert_eq!(eval(NewPearson, &o).get(), 12.0);
        assert_eq!(eval(NewNeyman, &o).get(), 12.0);
        assert_eq!(eval(NominalKS, &o).get(), 3.0);
        assert_eq!(eval(DiscreteKS, &o).get(), 3.0);
        assert_eq!(eval(DiscreteCVM, &o).get(), 0.875);
        assert_eq!(eval(DiscreteWatson, &o).get(), 0.3125);
        assert!((eval(DiscreteAD, &o).get() - 13.0 / 3.0).abs() < 1e-12);
        assert!((eval(NewWilks, &o).get() - 8.0 * 4f64.ln()).abs() < 1e-12);
        assert!(eval(NewKullback, &o).is_infinite());
        assert!(eval(Neyman, &o).is_infinite());
        assert!(eval(Kullback, &o).is_infinite());
    }

    #[test]
    fn perfect_fit_is_zero_for_every_kind() {
        for kind in StatisticKind::ALL {
            assert_eq!(eval(kind, &[1, 1, 1, 1]), StatValue::ZERO, "{kind}");
        }
    }

    #[test]
    fn evaluate_all_matches_single() {
        let obs = ObservedCounts::new(vec![4, 0, 0, 0]);
        let all = evaluate_all(&obs, &uniform4(), &[Pearson, NewNeyman]).unwrap();
        assert_eq!(all[&Pearson].get(), 12.0);
        assert_eq!(all[&NewNeyman].get(), 12.0);
        assert!(evaluate_all(&obs, &uniform4(), &[]).unwrap().is_empty());
        let all = evaluate_all(&obs, &uniform4(), &StatisticKind::ALL).unwrap();
        for kind in StatisticKind::ALL {
            assert_eq!(all[&kind], evaluate(kind, &obs, &uniform4()).unwrap());
        }
    }

    #[test]
    fn order_sensitivity() {
        assert_ne!(
            eval(DiscreteKS, &[4, 0, 0, 0]),
            eval(DiscreteKS, &[0, 4, 0, 0])
        );
        assert_eq!(eval(Pearson, &[4, 0, 0, 0]), eval(Pearson, &[0, 4, 0, 0]));
    }

    #[test]
    fn rejects_unpaired_counts() {
        let m = uniform4();
        assert!(matches!(
            evaluate(Pearson, &ObservedCounts::new(vec![1, 1, 1]), &m),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            evaluate(Pearson, &ObservedCounts::new(vec![1, 1, 1, 2]), &m),
            Err(Error::SampleSize { .. })
        ));
    }

    #[test]
    fn pearson_needs_positive_expected_counts() {
        let m = NullModel::new(vec![0.5, 0.5, 0.0], 2).unwrap();
        let obs = ObservedCounts::new(vec![1, 1, 0]);
        assert!(matches!(evaluate(Pearson, &obs, &m), Err(Error::Model(_))));
        assert_eq!(evaluate(NominalKS, &obs, &m).unwrap(), StatValue::ZERO);
    }

    #[test]
    fn model_validation() {
        assert!(NullModel::new(vec![1.0], 3).is_err());
        assert!(NullModel::new(vec![0.5, 0.4], 3).is_err());
        assert!(NullModel::new(vec![0.5, 0.5], 0).is_err());
        assert!(NullModel::new(vec![1.5, -0.5], 3).is_err());
        let m = NullModel::uniform(10, 30).unwrap();
        assert!((m.e_bar() - 3.0).abs() < 1e-12);
        assert!((m.cumulative()[9] - 1.0).abs() < 1e-9);
        assert!((m.expected().iter().sum::<f64>() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn stat_value_order_and_tokens() {
        assert!(StatValue::INFINITY > StatValue::new(1e300));
        assert_eq!(StatValue::INFINITY.to_string(), "inf");
        assert_eq!(StatValue::new(12.0).to_string(), "12");
        assert_eq!("inf".parse::<StatValue>().unwrap(), StatValue::INFINITY);
        assert!("-1".parse::<StatValue>().is_err());
        assert_eq!(StatValue::new(-1e-15), StatValue::ZERO);
        assert!(StatValue::new(2.0).ties_with(StatValue::new(2.0 + 1e-12)));
        assert!(!StatValue::new(2.0).exceeds(StatValue::INFINITY));
        assert!(StatValue::INFINITY.exceeds(StatValue::new(5.0)));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in StatisticKind::ALL {
            assert_eq!(kind.name().parse::<StatisticKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
    }
}
