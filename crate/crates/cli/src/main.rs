//! `gofpower`: goodness-of-fit statistics and power study from the command line.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gofpower::report;
use gofpower::{
    builtin_alternatives, critical_bracket, exact_null_distribution, load_alternatives,
    mc_null_distribution, rank_powers, run_study, AlternativeSpec, NullModel, NullSource,
    ObservedCounts, SeedSpec, StatisticKind, StudyConfig, DEFAULT_EXACT_BUDGET,
    DEFAULT_TIE_THRESHOLD,
};

#[derive(Debug, Parser)]
#[command(
    name = "gofpower",
    version,
    about = "Goodness-of-fit statistics for multinomial data and their power against trend alternatives"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the power study and write CSV/JSON results (and optionally figures).
    Run(RunArgs),
    /// Evaluate one statistic on an observed frequency vector.
    Eval(EvalArgs),
    /// Build a null distribution and print the critical values bracketing alpha.
    Null(NullArgs),
    /// Rank statistics for one alternative and sample size from a results CSV.
    Rank(RankArgs),
    /// List the statistic names.
    ListStats,
    /// List the available alternatives.
    ListAlts {
        #[arg(long)]
        alts_file: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Replications per alternative batch.
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    /// Replications for Monte Carlo null distributions.
    #[arg(long, default_value_t = 10_000)]
    null_reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_values_t = gofpower::DEFAULT_SAMPLE_SIZES)]
    sizes: Vec<u64>,
    /// Comma-separated alternative names (default: the six trend alternatives).
    #[arg(long, value_delimiter = ',')]
    alts: Vec<String>,
    /// Extra alternatives, one `name w1 w2 ...` row per line.
    #[arg(long)]
    alts_file: Option<PathBuf>,
    /// Comma-separated statistic names (default: the ten study statistics).
    #[arg(long, value_delimiter = ',')]
    stats: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Largest number of compositions for which the null is enumerated exactly.
    #[arg(long, default_value_t = DEFAULT_EXACT_BUDGET)]
    exact_threshold: u128,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Also write one `power_<alternative>.svg` per alternative.
    #[arg(long)]
    figures: bool,
    /// Directory for cached null distributions.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    stat: String,
    /// Comma-separated observed counts.
    #[arg(long, value_delimiter = ',', required = true)]
    obs: Vec<u64>,
    /// Null model; only `uniform` is built in.
    #[arg(long, conflicts_with = "probs")]
    null: Option<String>,
    /// Comma-separated null cell probabilities.
    #[arg(long, value_delimiter = ',')]
    probs: Vec<f64>,
}

#[derive(Debug, Args)]
struct NullArgs {
    #[arg(long)]
    stat: String,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Enumerate the null exactly instead of simulating it.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_EXACT_BUDGET)]
    budget: u128,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    alt: String,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = DEFAULT_TIE_THRESHOLD)]
    tie: f64,
}

/// Failure classes, mapped to the process exit code.
enum Failure {
    Usage(String),
    Capacity(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Other(_) => 1,
            Failure::Capacity(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Capacity(m) | Failure::Other(m) => f.write_str(m),
        }
    }
}

impl From<gofpower::Error> for Failure {
    fn from(e: gofpower::Error) -> Self {
        if e.is_capacity_or_bracket() {
            Failure::Capacity(e.to_string())
        } else {
            match e {
                gofpower::Error::Io(_) | gofpower::Error::Json(_) | gofpower::Error::Csv(_) => {
                    Failure::Other(e.to_string())
                }
                _ => Failure::Usage(e.to_string()),
            }
        }
    }
}

fn suggest<'a>(input: &str, candidates: impl IntoIterator<Item = &'a str>) -> String {
    let mut names: Vec<&str> = candidates.into_iter().collect();
    names.sort_by(|a, b| {
        strsim::levenshtein(input, a)
            .cmp(&strsim::levenshtein(input, b))
            .then(a.cmp(b))
    });
    let close: Vec<&str> = names
        .iter()
        .copied()
        .filter(|n| strsim::levenshtein(input, n) <= 3 || n.contains(input))
        .take(3)
        .collect();
    let mut msg = String::new();
    if !close.is_empty() {
        msg.push_str(&format!(" (did you mean {}?)", close.join(", ")));
    }
    msg.push_str(&format!("\navailable: {}", names_sorted(&names)));
    msg
}

fn names_sorted(names: &[&str]) -> String {
    let mut v = names.to_vec();
    v.sort_unstable();
    v.join(", ")
}

fn parse_stat(name: &str) -> Result<StatisticKind, Failure> {
    StatisticKind::from_name(name).ok_or_else(|| {
        Failure::Usage(format!(
            "unknown statistic `{name}`{}",
            suggest(name, StatisticKind::ALL.iter().map(|k| k.name()))
        ))
    })
}

fn alternative_pool(file: Option<&PathBuf>) -> Result<Vec<AlternativeSpec>, Failure> {
    let mut pool = match file {
        Some(path) => load_alternatives(path)?,
        None => Vec::new(),
    };
    for alt in builtin_alternatives() {
        if !pool.iter().any(|a| a.name == alt.name) {
            pool.push(alt);
        }
    }
    Ok(pool)
}

fn resolve_alternatives(
    names: &[String],
    file: Option<&PathBuf>,
) -> Result<Vec<AlternativeSpec>, Failure> {
    let pool = alternative_pool(file)?;
    if names.is_empty() {
        return Ok(StudyConfig::default().alternatives);
    }
    names
        .iter()
        .map(|name| {
            pool.iter()
                .find(|a| &a.name == name)
                .cloned()
                .ok_or_else(|| {
                    Failure::Usage(format!(
                        "unknown alternative `{name}`{}",
                        suggest(name, pool.iter().map(|a| a.name.as_str()))
                    ))
                })
        })
        .collect()
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let kinds = if args.stats.is_empty() {
        StatisticKind::STUDY.to_vec()
    } else {
        args.stats
            .iter()
            .map(|s| parse_stat(s))
            .collect::<Result<Vec<_>, _>>()?
    };
    let cfg = StudyConfig {
        kinds,
        alternatives: resolve_alternatives(&args.alts, args.alts_file.as_ref())?,
        sample_sizes: args.sizes,
        reps_power: args.reps,
        reps_null: args.null_reps,
        alpha: args.alpha,
        master_seed: args.seed,
        exact_threshold: args.exact_threshold,
        cache_dir: args.cache,
        ..StudyConfig::default()
    };
    let result = run_study(&cfg)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::Other(e.to_string()))?;
    if matches!(args.format, Format::Csv | Format::Both) {
        let path = args.out.join("results.csv");
        report::emit_csv(&result, &path)?;
        println!("wrote {}", path.display());
    }
    if matches!(args.format, Format::Json | Format::Both) {
        let path = args.out.join("results.json");
        report::emit_json(&result, &path)?;
        println!("wrote {}", path.display());
    }
    if args.figures {
        for path in report::emit_all_figures(&result, &args.out)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let kind = parse_stat(&args.stat)?;
    let obs = ObservedCounts::new(args.obs);
    let n = obs.total();
    let model = if !args.probs.is_empty() {
        NullModel::new(args.probs, n)?
    } else {
        match args.null.as_deref() {
            None | Some("uniform") => NullModel::uniform(obs.k(), n)?,
            Some(other) => {
                return Err(Failure::Usage(format!(
                    "unknown null `{other}`; use `uniform` or --probs"
                )))
            }
        }
    };
    println!("{}", gofpower::evaluate(kind, &obs, &model)?);
    Ok(())
}

fn cmd_null(args: NullArgs) -> Result<(), Failure> {
    let kind = parse_stat(&args.stat)?;
    let model = NullModel::uniform(args.k, args.n)?;
    let dist = if args.exact {
        exact_null_distribution(kind, &model, args.budget)?
    } else {
        let seed = SeedSpec::for_task(args.seed, &format!("null/k={}/n={}", args.k, args.n));
        mc_null_distribution(kind, &model, args.reps, &seed)?
    };
    let bracket = critical_bracket(&dist, args.alpha)?;
    let source = match &dist.source {
        NullSource::Exact { compositions } => format!("exact ({compositions} compositions)"),
        NullSource::MonteCarlo { reps, seed } => {
            format!(
                "monte_carlo ({reps} reps, seed {}, stream {:#018x})",
                seed.master_seed, seed.stream_id
            )
        }
    };
    println!("statistic: {kind}");
    println!("n: {}", args.n);
    println!("k: {}", args.k);
    println!("source: {source}");
    println!("support_points: {}", dist.len());
    println!("alpha: {}", args.alpha);
    println!("c_liberal: {}", bracket.c_liberal);
    println!("alpha_liberal: {}", bracket.alpha_liberal);
    println!("c_conservative: {}", bracket.c_conservative);
    println!("alpha_conservative: {}", bracket.alpha_conservative);
    println!("exact_hit: {}", bracket.exact_hit);
    Ok(())
}

fn cmd_rank(args: RankArgs) -> Result<(), Failure> {
    let rows = report::load_csv(&args.input)?;
    let entries: Vec<(StatisticKind, f64)> = rows
        .iter()
        .filter(|r| r.alternative == args.alt && r.n == args.n)
        .map(|r| (r.statistic, r.power_interpolated))
        .collect();
    if entries.is_empty() {
        let mut alts: Vec<&str> = rows.iter().map(|r| r.alternative.as_str()).collect();
        alts.sort_unstable();
        alts.dedup();
        return Err(Failure::Usage(format!(
            "no rows for alternative `{}` at n = {}{}",
            args.alt,
            args.n,
            suggest(&args.alt, alts)
        )));
    }
    println!("rank\tstatistic\tpower");
    for (i, group) in rank_powers(&entries, args.tie).iter().enumerate() {
        for (kind, power) in group {
            println!("{}\t{kind}\t{power}", i + 1);
        }
    }
    Ok(())
}

fn cmd_list_alts(file: Option<PathBuf>) -> Result<(), Failure> {
    for alt in alternative_pool(file.as_ref())? {
        let raw: Vec<String> = alt.raw.iter().map(|x| x.to_string()).collect();
        println!("{}\t{}", alt.name, raw.join(" "));
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("GOFPOWER_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        Failure::Usage(format!(
            "GOFPOWER_THREADS must be an integer, got `{value}`"
        ))
    })?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    Ok(())
}

fn cli_main<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Null(args) => cmd_null(args),
        Command::Rank(args) => cmd_rank(args),
        Command::ListStats => {
            for kind in StatisticKind::ALL {
                println!("{}\t{}", kind.name(), kind.label());
            }
            Ok(())
        }
        Command::ListAlts { alts_file } => cmd_list_alts(alts_file),
    });
    match outcome {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.code()
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(cli_main(std::env::args_os()))
}
