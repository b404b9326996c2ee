//! `gof`: chi-square goodness-of-fit testing with the small-sample
//! corrected distribution. Subcommands compute correction coefficients,
//! run tests, solve critical values, simulate, and enumerate exactly.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 when the
//! correction is outside its validity range and `--force` was not given.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gofcorr::{
    coefficients, compare, enumerate_exact, histogram, presets, run_test, sig12, simulate,
    CategoryModel, CorrectedDistribution, CorrectionCoefficients, Error, ObservedCounts,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "gof",
    version,
    about = "Chi-square goodness-of-fit tests with a small-sample correction",
    after_help = "Exit codes: 0 success, 2 input error, 3 validity-rule violation without --force.\n\
                  Set GOF_LOG=debug for diagnostics."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correction coefficients B and C for a model.
    Coeffs(CoeffsArgs),
    /// Run the corrected goodness-of-fit test on observed counts.
    Test(TestArgs),
    /// Plain and corrected critical values at a significance level.
    Critical(CriticalArgs),
    /// Simulate the statistic and compare both approximations to it.
    Simulate(SimulateArgs),
    /// Exact distribution of the statistic by full enumeration.
    Exact(ExactArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Category probabilities: 'uniform:K', 'geometric:K:RATIO', an inline
    /// CSV row, or a path to a CSV file with one row of probabilities.
    #[arg(long, conflicts_with = "preset")]
    probs: Option<String>,
    /// Named demonstration regime: fig1, fig2, fig3, or fig4.
    #[arg(long)]
    preset: Option<String>,
    /// Sample size n (overrides the preset's default).
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Args)]
struct CoeffsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Observed counts: an inline CSV row of integers, or a path to a CSV
    /// file with one such row.
    #[arg(long)]
    counts: String,
    /// Significance level, in (0, 0.5].
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Exit 0 even when the correction is outside its validity range.
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct CriticalArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Category count, for explicit-coefficient mode (with --b and --c).
    #[arg(long, conflicts_with_all = ["probs", "preset", "n"], requires = "b", requires = "c")]
    k: Option<usize>,
    /// Coefficient B, for explicit-coefficient mode.
    #[arg(long, requires = "k")]
    b: Option<f64>,
    /// Coefficient C, for explicit-coefficient mode.
    #[arg(long, requires = "k")]
    c: Option<f64>,
    /// Significance level, in (0, 0.5].
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Solve the corrected critical value even outside the validity range.
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of simulated samples.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Random seed; fully determines the output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads. The output does not depend on this.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Emit the plot table (CSV: t, empirical_density, chi2_pdf,
    /// corrected_pdf) instead of the comparison report.
    #[arg(long)]
    plotdata: bool,
    /// Histogram bins for --plotdata.
    #[arg(long, default_value_t = 100)]
    bins: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GOF_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    };
    std::process::exit(code);
}

/// Validity violations exit 3; everything else that fails is an input or
/// numeric error, exit 2.
fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(Error::Validity { .. }) = cause.downcast_ref::<Error>() {
            return 3;
        }
    }
    2
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Coeffs(args) => cmd_coeffs(args),
        Command::Test(args) => cmd_test(args),
        Command::Critical(args) => cmd_critical(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Exact(args) => cmd_exact(args),
    }
}

// ---------------------------------------------------------------- inputs

/// One row of comma-separated fields, inline or from a file.
fn csv_row(input: &str, what: &str) -> Result<Vec<String>> {
    let line = if input.contains(',') {
        input.to_string()
    } else {
        let text = std::fs::read_to_string(input)
            .with_context(|| format!("cannot read {what} file '{input}'"))?;
        text.lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'))
            .ok_or_else(|| anyhow!("{what} file '{input}' has no data row"))?
            .to_string()
    };
    Ok(line.split(',').map(|f| f.trim().to_string()).collect())
}

fn parse_probs(spec: &str) -> Result<Vec<f64>> {
    if let Some(rest) = spec.strip_prefix("uniform:") {
        let k: usize = rest
            .parse()
            .with_context(|| format!("bad category count in 'uniform:{rest}'"))?;
        return Ok(presets::uniform(k)?);
    }
    if let Some(rest) = spec.strip_prefix("geometric:") {
        let (k_str, ratio_str) = rest
            .split_once(':')
            .ok_or_else(|| anyhow!("geometric preset needs 'geometric:K:RATIO', got '{spec}'"))?;
        let k: usize = k_str
            .parse()
            .with_context(|| format!("bad category count in '{spec}'"))?;
        let ratio: f64 = ratio_str
            .parse()
            .with_context(|| format!("bad ratio in '{spec}'"))?;
        return Ok(presets::geometric(k, ratio)?);
    }
    let fields = csv_row(spec, "probabilities")?;
    fields
        .iter()
        .enumerate()
        .map(|(i, f)| {
            f.parse::<f64>()
                .with_context(|| format!("probability entry {} ('{f}') is not a number", i + 1))
        })
        .collect()
}

fn parse_counts(spec: &str) -> Result<ObservedCounts> {
    let fields = csv_row(spec, "counts")?;
    let counts: Vec<u64> = fields
        .iter()
        .enumerate()
        .map(|(i, f)| {
            f.parse::<u64>().with_context(|| {
                format!("count entry {} ('{f}') is not a nonnegative integer", i + 1)
            })
        })
        .collect::<Result<_>>()?;
    Ok(ObservedCounts::new(&counts)?)
}

impl ModelArgs {
    /// Builds the model; `fallback_n` serves commands that can infer n
    /// (the test command infers it from the counts).
    fn resolve(&self, fallback_n: Option<u64>) -> Result<CategoryModel> {
        if let Some(name) = &self.preset {
            let preset = presets::figure_regime(name).ok_or_else(|| {
                anyhow!(
                    "unknown preset '{name}'; available: {}",
                    presets::FIGURE_NAMES.join(", ")
                )
            })?;
            let n = self.n.unwrap_or(preset.n());
            let model = CategoryModel::new_lenient(preset.probs(), n)?;
            log::debug!("preset {name}: k = {}, n = {}", model.k(), model.n());
            return Ok(model);
        }
        let spec = self
            .probs
            .as_ref()
            .ok_or_else(|| anyhow!("either --probs or --preset is required"))?;
        let probs = parse_probs(spec)?;
        let n = self
            .n
            .or(fallback_n)
            .ok_or_else(|| anyhow!("--n is required with --probs"))?;
        let model = CategoryModel::new_lenient(&probs, n)?;
        log::debug!("model: k = {}, n = {}", model.k(), model.n());
        Ok(model)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        bail!("alpha must be in (0, 0.5], got {alpha}");
    }
    Ok(())
}

// --------------------------------------------------------------- outputs

/// Canonical float for output: 12 significant digits.
fn num(x: f64) -> Value {
    json!(sig12(x))
}

fn fmt(x: f64) -> String {
    sig12(x).to_string()
}

fn print_json(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn coefficients_json(co: &CorrectionCoefficients) -> Value {
    json!({
        "k": co.k,
        "n": co.n,
        "Q": num(co.q),
        "B": num(co.b),
        "C": num(co.c),
        "threshold": num(co.threshold),
        "valid": co.valid,
    })
}

// -------------------------------------------------------------- commands

fn cmd_coeffs(args: CoeffsArgs) -> Result<i32> {
    let model = args.model.resolve(None)?;
    let co = coefficients(&model);
    match args.format {
        Format::Json => print_json(&coefficients_json(&co)),
        Format::Csv => {
            println!("k,n,Q,B,C,threshold,valid");
            println!(
                "{},{},{},{},{},{},{}",
                co.k,
                co.n,
                fmt(co.q),
                fmt(co.b),
                fmt(co.c),
                fmt(co.threshold),
                co.valid
            );
        }
    }
    Ok(0)
}

fn cmd_test(args: TestArgs) -> Result<i32> {
    check_alpha(args.alpha)?;
    let obs = parse_counts(&args.counts)?;
    let model = args.model.resolve(Some(obs.total()))?;
    let report = run_test(&model, &obs, args.alpha)?;
    match args.format {
        Format::Json => print_json(&json!({
            "t_value": num(report.t_value),
            "dof": report.dof,
            "p_plain": num(report.p_plain),
            "p_corrected": num(report.p_corrected),
            "B": num(report.b),
            "C": num(report.c),
            "validity": report.validity,
            "warnings": report.warnings,
        })),
        Format::Csv => {
            println!("t_value,dof,p_plain,p_corrected,B,C,validity,warnings");
            println!(
                "{},{},{},{},{},{},{},{}",
                fmt(report.t_value),
                report.dof,
                fmt(report.p_plain),
                fmt(report.p_corrected),
                fmt(report.b),
                fmt(report.c),
                report.validity,
                report.warnings.join("; ")
            );
        }
    }
    if !report.validity && !args.force {
        log::warn!("correction outside its validity range; pass --force to exit 0 anyway");
        return Ok(3);
    }
    Ok(0)
}

fn cmd_critical(args: CriticalArgs) -> Result<i32> {
    check_alpha(args.alpha)?;
    let dist = match (args.k, args.b, args.c) {
        (Some(k), Some(b), Some(c)) => CorrectedDistribution::new(k, b, c)?,
        (None, None, None) => {
            let model = args.model.resolve(None)?;
            CorrectedDistribution::from_coefficients(&coefficients(&model))?
        }
        // clap's `requires` already ties the three together.
        _ => unreachable!("argument dependencies enforced by the parser"),
    };
    let plain = dist.chi_square().quantile(1.0 - args.alpha)?;
    let corrected = dist
        .critical(args.alpha, args.force)
        .context("corrected critical value refused (pass --force to solve it anyway)")?;
    match args.format {
        Format::Json => print_json(&json!({
            "plain": num(plain),
            "corrected": num(corrected),
        })),
        Format::Csv => {
            println!("plain,corrected");
            println!("{},{}", fmt(plain), fmt(corrected));
        }
    }
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let model = args.model.resolve(None)?;
    let started = std::time::Instant::now();
    let emp = simulate(&model, args.samples, args.seed, args.workers)?;
    log::info!(
        "{} samples in {:.1?} on {} worker(s)",
        args.samples,
        started.elapsed(),
        args.workers
    );
    let report = compare(&emp, &model)?;

    if args.plotdata {
        // The plot table is inherently tabular; it is CSV in any format.
        let upper = *report.grid.last().expect("grid is nonempty");
        let corrected = CorrectedDistribution::from_coefficients(&report.coefficients)?;
        let chi = corrected.chi_square();
        println!("t,empirical_density,chi2_pdf,corrected_pdf");
        for (center, density) in histogram(&emp, args.bins, upper)? {
            println!(
                "{},{},{},{}",
                fmt(center),
                fmt(density),
                fmt(chi.pdf(center)?),
                fmt(corrected.pdf(center)?)
            );
        }
        return Ok(0);
    }

    match args.format {
        Format::Json => {
            let tail_errors: Vec<Value> = report
                .tail_errors
                .iter()
                .map(|te| {
                    json!({
                        "alpha": num(te.alpha),
                        "plain_rate": num(te.plain_rate),
                        "corrected_rate": num(te.corrected_rate),
                    })
                })
                .collect();
            let grid: Vec<Value> = report.grid.iter().map(|&u| num(u)).collect();
            print_json(&json!({
                "sup_dist_plain": num(report.sup_dist_plain),
                "sup_dist_corrected": num(report.sup_dist_corrected),
                "tail_errors": tail_errors,
                "grid": grid,
                "coefficients": coefficients_json(&report.coefficients),
            }));
        }
        Format::Csv => {
            println!("alpha,plain_rate,corrected_rate");
            for te in &report.tail_errors {
                println!(
                    "{},{},{}",
                    fmt(te.alpha),
                    fmt(te.plain_rate),
                    fmt(te.corrected_rate)
                );
            }
            println!("# sup_dist_plain,{}", fmt(report.sup_dist_plain));
            println!("# sup_dist_corrected,{}", fmt(report.sup_dist_corrected));
        }
    }
    Ok(0)
}

fn cmd_exact(args: ExactArgs) -> Result<i32> {
    let model = args.model.resolve(None)?;
    let dist = enumerate_exact(&model)?;
    match args.format {
        Format::Json => {
            let atoms: Vec<Value> = dist
                .atoms()
                .iter()
                .map(|&(t, p)| json!({"t": num(t), "prob": num(p)}))
                .collect();
            print_json(&json!({
                "k": model.k(),
                "n": model.n(),
                "atom_count": dist.atom_count(),
                "mean": num(dist.mean()),
                "atoms": atoms,
            }));
        }
        Format::Csv => {
            println!("t,prob");
            for &(t, p) in dist.atoms() {
                println!("{},{}", fmt(t), fmt(p));
            }
            println!("# atom_count,{}", dist.atom_count());
            println!("# mean,{}", fmt(dist.mean()));
        }
    }
    Ok(0)
}
