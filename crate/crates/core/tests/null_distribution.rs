use std::collections::BTreeMap;

use gofpower::{
    composition_count, critical_bracket, evaluate, exact_null_distribution,
    exact_null_distributions, mc_null_distribution, survival_at, NullDistribution, NullModel,
    ObservedCounts, SeedSpec, StatValue, StatisticKind, DEFAULT_EXACT_BUDGET,
};

// Upper 5% point of chi-square with 9 degrees of freedom (scipy.stats.chi2.isf).
const CHI2_9_UPPER_05: f64 = 16.91897760462045;

/// Null distribution by brute force over all k^N ordered outcomes, each with
/// probability prod p_{cell}. Independent of the composition enumerator and
/// the multinomial coefficient.
fn brute_force(kind: StatisticKind, model: &NullModel) -> Vec<(f64, f64)> {
    let k = model.k();
    let n = model.n() as u32;
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for code in 0..(k as u64).pow(n) {
        let mut counts = vec![0u64; k];
        let mut prob = 1.0;
        let mut c = code;
        for _ in 0..n {
            let cell = (c % k as u64) as usize;
            c /= k as u64;
            counts[cell] += 1;
            prob *= model.probabilities()[cell];
        }
        let v = evaluate(kind, &ObservedCounts::new(counts), model).unwrap();
        atoms.push((v.get(), prob));
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms
}

fn brute_survival(atoms: &[(f64, f64)], c: StatValue) -> f64 {
    atoms
        .iter()
        .filter(|(v, _)| StatValue::new(*v).exceeds(c))
        .map(|(_, p)| p)
        .sum()
}

#[test]
fn exact_enumeration_matches_brute_force() {
    let models = [
        NullModel::uniform(3, 6).unwrap(),
        NullModel::new(vec![0.5, 0.2, 0.2, 0.1], 5).unwrap(),
        NullModel::uniform(5, 4).unwrap(),
    ];
    for model in &models {
        for kind in StatisticKind::ALL {
            let dist = exact_null_distribution(kind, model, DEFAULT_EXACT_BUDGET).unwrap();
            let atoms = brute_force(kind, model);
            for &(v, _) in &atoms {
                let c = StatValue::new(v);
                let a = survival_at(&dist, c);
                let b = brute_survival(&atoms, c);
                assert!(
                    (a - b).abs() < 1e-12,
                    "{kind} k={} n={}: {a} vs {b}",
                    model.k(),
                    model.n()
                );
            }
        }
    }
}

#[test]
fn enumerates_every_composition_at_n10() {
    assert_eq!(composition_count(10, 10), 92_378);
    let model = NullModel::uniform(10, 10).unwrap();
    let d = exact_null_distribution(StatisticKind::Pearson, &model, 92_378).unwrap();
    assert!(matches!(
        d.source,
        gofpower::NullSource::Exact {
            compositions: 92_378
        }
    ));
    assert!(exact_null_distribution(StatisticKind::Pearson, &model, 92_377).is_err());
}

#[test]
fn monte_carlo_pearson_tail_near_asymptotic_quantile() {
    let model = NullModel::uniform(10, 100).unwrap();
    let d =
        mc_null_distribution(StatisticKind::Pearson, &model, 10_000, &SeedSpec::new(3, 9)).unwrap();
    let tail = survival_at(&d, StatValue::new(CHI2_9_UPPER_05));
    assert!((tail - 0.05).abs() < 0.01, "{tail}");
}

fn dkw_excursion(mc: &NullDistribution, exact: &NullDistribution) -> f64 {
    let mut points: Vec<StatValue> = mc.values.iter().chain(&exact.values).copied().collect();
    points.sort();
    points
        .iter()
        .map(|&c| (survival_at(mc, c) - survival_at(exact, c)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn monte_carlo_within_dkw_band_of_exact() {
    let eps = (f64::ln(2.0 / 0.001) / (2.0 * 10_000.0)).sqrt();
    let model = NullModel::uniform(10, 10).unwrap();
    let exact =
        exact_null_distributions(&StatisticKind::STUDY, &model, DEFAULT_EXACT_BUDGET).unwrap();
    let mut failures = 0;
    for seed in [1u64, 2, 3] {
        for e in &exact {
            let mc = mc_null_distribution(e.statistic, &model, 10_000, &SeedSpec::new(seed, 44))
                .unwrap();
            if dkw_excursion(&mc, e) > eps {
                failures += 1;
            }
        }
    }
    assert!(failures <= 1, "{failures} DKW excursions");
}

#[test]
fn brackets_straddle_target_for_every_study_statistic() {
    for n in [10, 20] {
        let model = NullModel::uniform(10, n).unwrap();
        let dists =
            exact_null_distributions(&StatisticKind::STUDY, &model, DEFAULT_EXACT_BUDGET).unwrap();
        for d in &dists {
            let b = critical_bracket(d, 0.05).unwrap();
            assert!(
                b.alpha_conservative <= 0.05 && 0.05 <= b.alpha_liberal,
                "{}",
                d.statistic
            );
            assert!(b.exact_hit || b.c_liberal < b.c_conservative);
            assert!(d.survival.windows(2).all(|w| w[0] >= w[1]));
            assert!(d.values.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

#[test]
fn symmetric_ties_collapse_to_single_atoms() {
    // Pearson at N=10 depends on the count multiset only through sum O_i^2,
    // so the number of atoms equals the number of distinct sums of squares.
    let model = NullModel::uniform(10, 10).unwrap();
    let d = exact_null_distribution(StatisticKind::Pearson, &model, DEFAULT_EXACT_BUDGET).unwrap();
    let mut sums = BTreeMap::new();
    partitions(10, 10, 10, &mut Vec::new(), &mut |parts: &[u64]| {
        sums.insert(parts.iter().map(|x| x * x).sum::<u64>(), ());
    });
    assert_eq!(d.len(), sums.len());
}

fn partitions(n: u64, max: u64, slots: usize, cur: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
    if n == 0 {
        f(cur);
        return;
    }
    if slots == 0 {
        return;
    }
    for part in (1..=max.min(n)).rev() {
        cur.push(part);
        partitions(n - part, part, slots - 1, cur, f);
        cur.pop();
    }
}
