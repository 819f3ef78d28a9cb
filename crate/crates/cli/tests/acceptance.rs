//! Acceptance suite. Each test checks one criterion and prints a single
//! PASS/FAIL line; run with `-- --nocapture --test-threads=1` to see them in order.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;

use gofpower::{
    builtin_alternatives, evaluate_all, exact_null_distributions, mc_null_distribution, run_study,
    sample_batch, survival_at, NullDistribution, NullModel, SeedSpec, StatValue, StatisticKind,
    StudyConfig, StudyResult, DEFAULT_EXACT_BUDGET,
};
use StatisticKind::*;

const SLACK: f64 = 0.02;

fn report(criterion: u32, name: &str, passed: bool, detail: &str) {
    println!(
        "[{}] criterion {criterion}: {name} -- {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} ({name}) failed: {detail}");
}

/// Default protocol with the uniform row added, seed 7.
fn study() -> &'static StudyResult {
    static RESULT: OnceLock<StudyResult> = OnceLock::new();
    RESULT.get_or_init(|| {
        run_study(&StudyConfig {
            alternatives: builtin_alternatives(),
            master_seed: 7,
            ..StudyConfig::default()
        })
        .expect("study runs")
    })
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn criterion_1_identity_suite() {
    let alts = builtin_alternatives();
    let mut checked = 0;
    let mut failures = Vec::new();
    for i in 0..1000u64 {
        let alt = &alts[(i % 7) as usize];
        let n = [10, 20, 30, 50, 100, 200][(i / 7 % 6) as usize];
        let obs = sample_batch(&alt.p, n, 1, &SeedSpec::new(i, 0xacce))
            .unwrap()
            .remove(0);
        let model = NullModel::uniform(10, n).unwrap();
        let v = evaluate_all(
            &obs,
            &model,
            &[Pearson, Wilks, NewPearson, NewNeyman, NewWilks],
        )
        .unwrap();
        let ok = rel_close(v[&NewPearson].get(), v[&Pearson].get())
            && rel_close(v[&NewNeyman].get(), v[&Pearson].get())
            && (v[&Wilks].is_infinite() || rel_close(v[&NewWilks].get(), v[&Wilks].get()));
        if !ok {
            failures.push(obs.into_inner());
        }
        checked += 1;
    }
    report(
        1,
        "NewPearson = Pearson = NewNeyman, NewWilks = Wilks (rel 1e-12)",
        failures.is_empty(),
        &format!("{checked} vectors, {} mismatches", failures.len()),
    );
}

fn sup_distance(a: &NullDistribution, b: &NullDistribution) -> f64 {
    let mut points: Vec<StatValue> = a.values.iter().chain(&b.values).copied().collect();
    points.sort();
    points
        .iter()
        .map(|&c| (survival_at(a, c) - survival_at(b, c)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_2_exact_vs_monte_carlo() {
    let eps = (f64::ln(2.0 / 0.001) / (2.0 * 10_000.0)).sqrt();
    let model = NullModel::uniform(10, 10).unwrap();
    let exact =
        exact_null_distributions(&StatisticKind::STUDY, &model, DEFAULT_EXACT_BUDGET).unwrap();
    let mut excursions = 0;
    let mut worst: f64 = 0.0;
    for seed in [7u64, 8, 9] {
        for e in &exact {
            let mc = mc_null_distribution(
                e.statistic,
                &model,
                10_000,
                &SeedSpec::for_task(seed, "acceptance/dkw"),
            )
            .unwrap();
            let d = sup_distance(&mc, e);
            worst = worst.max(d);
            if d > eps {
                excursions += 1;
            }
        }
    }
    report(
        2,
        "MC null within DKW band of exact null at N=10",
        excursions <= 1,
        &format!("eps = {eps:.4}, worst = {worst:.4}, excursions = {excursions}/30"),
    );
}

#[test]
fn criterion_3_size_calibration() {
    let r = study();
    let entries = r.grid.iter().filter(|e| e.alternative == "uniform");
    let mut count = 0;
    let mut bad = Vec::new();
    let (mut lo, mut hi) = (1.0f64, 0.0f64);
    for e in entries {
        count += 1;
        lo = lo.min(e.power_interpolated);
        hi = hi.max(e.power_interpolated);
        if !(0.03..=0.07).contains(&e.power_interpolated) {
            bad.push(format!("{}@{}={}", e.statistic, e.n, e.power_interpolated));
        }
    }
    report(
        3,
        "uniform alternative gives size in [0.03, 0.07]",
        count == 60 && bad.is_empty(),
        &format!("{count} entries, range [{lo:.4}, {hi:.4}], outside: {bad:?}"),
    );
}

#[test]
fn criterion_4_decreasing_ranks() {
    let r = study();
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [30, 50] {
        let ad = r.power(DiscreteAD, "decreasing", n);
        let nks = r.power(NominalKS, "decreasing", n);
        let watson = r.power(DiscreteWatson, "decreasing", n);
        ok &= ad >= nks + SLACK && ad >= watson - SLACK;
        detail.push(format!(
            "N={n}: AD {ad:.3}, NominalKS {nks:.3}, Watson {watson:.3}"
        ));
    }
    report(
        4,
        "decreasing: Discrete AD above Nominal KS and Watson",
        ok,
        &detail.join("; "),
    );
}

#[test]
fn criterion_5_triangular_ranks() {
    let r = study();
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [50, 100] {
        let np = r.power(NewPearson, "triangular", n);
        let ad = r.power(DiscreteAD, "triangular", n);
        let cvm = r.power(DiscreteCVM, "triangular", n);
        ok &= np >= ad - SLACK && np >= cvm - SLACK;
        detail.push(format!(
            "N={n}: NewPearson {np:.3}, AD {ad:.3}, CVM {cvm:.3}"
        ));
    }
    report(
        5,
        "triangular: New Pearson above Discrete AD and CVM",
        ok,
        &detail.join("; "),
    );
}

#[test]
fn criterion_6_platykurtic_ranks() {
    let r = study();
    let watson = r.power(DiscreteWatson, "platykurtic", 20);
    let ks = r.power(DiscreteKS, "platykurtic", 20);
    let cvm = r.power(DiscreteCVM, "platykurtic", 20);
    report(
        6,
        "platykurtic N=20: Discrete Watson above Discrete KS and CVM",
        watson >= ks - SLACK && watson >= cvm - SLACK,
        &format!("Watson {watson:.3}, KS {ks:.3}, CVM {cvm:.3}"),
    );
}

#[test]
fn criterion_7_bimodal_ranks() {
    let r = study();
    let np = r.power(NewPearson, "bimodal", 50);
    let best_edf = [DiscreteKS, DiscreteCVM, DiscreteAD]
        .iter()
        .map(|&k| r.power(k, "bimodal", 50))
        .fold(0.0, f64::max);
    report(
        7,
        "bimodal N=50: New Pearson above Discrete KS/CVM/AD",
        np >= best_edf - SLACK,
        &format!("NewPearson {np:.3}, best EDF {best_edf:.3}"),
    );
}

#[test]
fn criterion_8_consistency() {
    let r = study();
    let mut bad = Vec::new();
    let mut checked = 0;
    for alt in builtin_alternatives()
        .iter()
        .filter(|a| a.name != "uniform")
    {
        for kind in StatisticKind::STUDY
            .into_iter()
            .filter(|&k| k != NewKullback)
        {
            let small = r.power(kind, &alt.name, 10);
            let large = r.power(kind, &alt.name, 200);
            checked += 1;
            if large <= small - SLACK {
                bad.push(format!("{kind}/{}: {small:.3} -> {large:.3}", alt.name));
            }
        }
    }
    report(
        8,
        "power at N=200 exceeds power at N=10",
        bad.is_empty(),
        &format!("{checked} pairs, violations: {bad:?}"),
    );
}

fn run_cli(dir: &Path, threads: &str) {
    let status = Command::new(env!("CARGO_BIN_EXE_gofpower"))
        .args(["run", "--seed", "7", "--figures", "--out"])
        .arg(dir)
        .env("GOFPOWER_THREADS", threads)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    assert!(status.success());
}

#[test]
fn criterion_9_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_cli(a.path(), "1");
    run_cli(b.path(), "3");
    let mut names: Vec<String> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut differing = Vec::new();
    for name in &names {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap_or_default();
        if x != y {
            differing.push(name.clone());
        }
    }
    let complete = names.len() == 8
        && names.iter().any(|n| n == "results.csv")
        && names.iter().any(|n| n == "results.json");
    report(
        9,
        "byte-identical outputs across runs and thread counts",
        complete && differing.is_empty(),
        &format!("{} files compared, differing: {differing:?}", names.len()),
    );
}
