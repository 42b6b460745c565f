//! `pointburst` — simulate, detect, and classify intensity bursts in
//! high-frequency event data.
//!
//! All timestamps are seconds from the session open. Randomized subcommands
//! require an explicit `--seed`; there is no silent entropy. Failures print
//! a machine-readable error JSON to stderr and exit nonzero.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pointburst::classify::{classify_event, ClassifyConfig, InterceptMode};
use pointburst::estimate::{bin_counts, deflate, spot_series_exponential, CountSeries, KernelSpec, SeasonalCurve};
use pointburst::ibtest::{detect_day_with, statistic_series, AvarScheme, TestConfig};
use pointburst::io;
use pointburst::mc::{format_table, run_experiment, ExperimentPlan, TableLayout};
use pointburst::sim::{compose_scenario, ScenarioConfig, SessionSpec};
use pointburst::Error;

/// Environment variable holding the default output directory for relative
/// output paths.
const OUT_DIR_ENV: &str = "POINTBURST_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "pointburst",
    version,
    about = "Point-process intensity-burst detection toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write the event stream as CSV.
    Simulate(SimulateArgs),
    /// Scan one session for intensity bursts.
    Detect(DetectArgs),
    /// Classify a change point as burst-like or jump-like.
    Classify(ClassifyArgs),
    /// Run a Monte Carlo rejection-rate experiment from a plan file.
    McTable(McTableArgs),
    /// Estimate an intraday seasonality curve from several sessions.
    Seasonality(SeasonalityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Indicator,
    Exponential,
}

impl KernelArg {
    fn to_spec(self) -> KernelSpec {
        match self {
            KernelArg::Indicator => KernelSpec::Indicator,
            KernelArg::Exponential => KernelSpec::exponential(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AvarArg {
    Overlapping,
    Nonoverlapping,
}

impl AvarArg {
    fn to_scheme(self) -> AvarScheme {
        match self {
            AvarArg::Overlapping => AvarScheme::Overlapping,
            AvarArg::Nonoverlapping => AvarScheme::Nonoverlapping,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InterceptArg {
    Free,
    ThroughOrigin,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario configuration JSON (base process, diurnal, burst, jump).
    #[arg(long)]
    config: PathBuf,
    /// Root seed; identical seeds reproduce the stream bit for bit.
    #[arg(long)]
    seed: u64,
    /// Output events CSV.
    #[arg(long)]
    out: PathBuf,
    /// Session length in seconds.
    #[arg(long, default_value_t = 23_400.0)]
    horizon: f64,
    /// Simulation grid step in seconds for latent intensity paths.
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    /// Heavy-traffic rate multiplier n.
    #[arg(long, default_value_t = 1)]
    rate_scale: u32,
}

#[derive(Args)]
struct DetectArgs {
    /// Input events CSV (`time_s` header).
    #[arg(long)]
    input: PathBuf,
    /// Session length in seconds.
    #[arg(long, default_value_t = 23_400.0)]
    horizon: f64,
    /// Seasonal curve CSV; omitted means no deflation.
    #[arg(long)]
    seasonal: Option<PathBuf>,
    /// Estimation bandwidth ℓ in one-second bins.
    #[arg(long, default_value_t = 300)]
    ell: usize,
    /// Variance sample size; defaults to 10·ℓ.
    #[arg(long = "K")]
    k_n: Option<usize>,
    #[arg(long, value_enum, default_value_t = KernelArg::Exponential)]
    kernel: KernelArg,
    #[arg(long, value_enum, default_value_t = AvarArg::Overlapping)]
    avar: AvarArg,
    /// Detection threshold on the statistic.
    #[arg(long, default_value_t = 4.7610)]
    threshold: f64,
    /// Maximum number of candidate local maxima to test.
    #[arg(long, default_value_t = 20)]
    top_candidates: usize,
    /// Minimum spacing between candidates, seconds.
    #[arg(long, default_value_t = 300.0)]
    min_separation: f64,
    /// Output detections JSON.
    #[arg(long)]
    out: PathBuf,
    /// Optional plot-data CSV: per-second spot estimate and statistic.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Input events CSV (`time_s` header).
    #[arg(long)]
    input: PathBuf,
    /// Session length in seconds.
    #[arg(long, default_value_t = 23_400.0)]
    horizon: f64,
    /// Change-point time θ in seconds.
    #[arg(long)]
    theta: f64,
    /// Offset added to θ before evaluation, seconds.
    #[arg(long, default_value_t = 0.0)]
    theta_offset: f64,
    /// Half-window ℓ in one-second bins.
    #[arg(long, default_value_t = 300)]
    ell: usize,
    /// Ratio-screen window multiplier.
    #[arg(long, default_value_t = 2.0)]
    k: f64,
    /// Window multipliers for the alpha regression.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 3.0, 5.0, 10.0])]
    k_grid: Vec<f64>,
    /// One-sided level of the jump test.
    #[arg(long, default_value_t = 0.01)]
    level: f64,
    #[arg(long, value_enum, default_value_t = InterceptArg::Free)]
    intercept: InterceptArg,
    /// Output classification JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct McTableArgs {
    /// Experiment plan JSON.
    #[arg(long)]
    plan: PathBuf,
    /// Output directory for table.csv, table.txt, and table.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SeasonalityArgs {
    /// Two or more event CSVs, one session each.
    #[arg(long, required = true, num_args = 2..)]
    inputs: Vec<PathBuf>,
    /// Session length in seconds.
    #[arg(long, default_value_t = 23_400.0)]
    horizon: f64,
    /// Bin width in seconds.
    #[arg(long, default_value_t = 1.0)]
    bin_width: f64,
    /// Output seasonal curve CSV.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Detect(args) => run_detect(args),
        Command::Classify(args) => run_classify(args),
        Command::McTable(args) => run_mc_table(args),
        Command::Seasonality(args) => run_seasonality(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = json!({ "error": { "code": e.code(), "message": e.to_string() } });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}

/// Resolve relative output paths against `POINTBURST_OUT_DIR` when set.
fn out_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn run_simulate(args: SimulateArgs) -> pointburst::Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let scenario: ScenarioConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid scenario JSON: {e}")))?;
    let spec = SessionSpec::new(args.horizon, args.grid_step, args.rate_scale)?;
    let (events, _) = compose_scenario(&scenario, &spec, args.seed)?;
    io::write_events(&out_path(&args.out), &events)?;
    println!("wrote {} events to {}", events.len(), out_path(&args.out).display());
    Ok(())
}

fn load_session_counts(input: &Path, horizon: f64) -> pointburst::Result<CountSeries> {
    let events = io::read_events(input, Some(horizon))?;
    bin_counts(&events, 1.0, horizon)
}

fn load_seasonal(path: Option<&PathBuf>, n_bins: usize) -> pointburst::Result<SeasonalCurve> {
    match path {
        Some(p) => io::read_seasonal(p),
        None => Ok(SeasonalCurve::flat(n_bins)),
    }
}

fn run_detect(args: DetectArgs) -> pointburst::Result<()> {
    let counts = load_session_counts(&args.input, args.horizon)?;
    let seasonal = load_seasonal(args.seasonal.as_ref(), counts.len())?;
    let config = TestConfig {
        ell: args.ell,
        k_n: args.k_n.unwrap_or(10 * args.ell),
        kernel: args.kernel.to_spec(),
        avar_scheme: args.avar.to_scheme(),
    };
    let day = detect_day_with(
        &counts,
        &seasonal,
        &config,
        args.threshold,
        args.top_candidates,
        args.min_separation,
    )?;
    let detections: Vec<_> = day
        .detections
        .iter()
        .map(|r| {
            json!({
                "t": r.t,
                "statistic": r.statistic,
                "numerator": r.numerator,
                "avar": r.avar_hat,
                "threshold": args.threshold,
                "flags": if r.degenerate { vec!["degenerate_variance"] } else { vec![] },
            })
        })
        .collect();
    let skipped: Vec<_> = day
        .skipped
        .iter()
        .map(|(t, msg)| json!({ "t": t, "warning": msg }))
        .collect();
    let payload = serde_json::to_string_pretty(&json!({
        "detections": detections,
        "skipped": skipped,
    }))
    .expect("serializable");
    io::write_atomic(&out_path(&args.out), &payload)?;

    if let Some(plot) = &args.plot_data {
        let deflated = deflate(&counts, &seasonal)?;
        let spot = spot_series_exponential(&deflated, config.ell)?;
        let stats = if config.avar_scheme == AvarScheme::Overlapping {
            statistic_series(&deflated, &config)?
        } else {
            vec![None; spot.len()]
        };
        let mut csv = String::from("t,spot,statistic\n");
        for (i, (s, z)) in spot.iter().zip(&stats).enumerate() {
            let t = (i + 1) as f64 * deflated.bin_width();
            match z {
                Some(z) => csv.push_str(&format!("{t:.3},{s:.9},{z:.9}\n")),
                None => csv.push_str(&format!("{t:.3},{s:.9},\n")),
            }
        }
        io::write_atomic(&out_path(plot), &csv)?;
    }
    println!(
        "{} detection(s), {} skipped candidate(s)",
        day.detections.len(),
        day.skipped.len()
    );
    Ok(())
}

fn run_classify(args: ClassifyArgs) -> pointburst::Result<()> {
    let counts = load_session_counts(&args.input, args.horizon)?;
    let config = ClassifyConfig {
        ell: args.ell,
        k: args.k,
        k_grid: args.k_grid.clone(),
        level: args.level,
        intercept_mode: match args.intercept {
            InterceptArg::Free => InterceptMode::Free,
            InterceptArg::ThroughOrigin => InterceptMode::ThroughOrigin,
        },
    };
    let theta = args.theta + args.theta_offset;
    let result = classify_event(&counts, theta, &config)?;
    let verdict = match result.ratio.verdict {
        pointburst::classify::Verdict::BurstLike => "burst_like",
        pointburst::classify::Verdict::JumpLike => "jump_like",
        pointburst::classify::Verdict::Inconclusive => "inconclusive",
    };
    let payload = serde_json::to_string_pretty(&json!({
        "theta": result.ratio.theta,
        "k": result.ratio.k,
        "ratio": float_or_null(result.ratio.ratio),
        "jump_z": float_or_null(result.ratio.jump_z),
        "verdict": verdict,
        "alpha_hat": result.alpha.as_ref().map(|a| a.alpha_hat),
        "k_grid": result.alpha.as_ref().map(|a| a.k_grid.clone()),
    }))
    .expect("serializable");
    io::write_atomic(&out_path(&args.out), &payload)?;
    println!("verdict: {verdict}");
    Ok(())
}

/// JSON has no NaN; map the not-a-value marker to null.
fn float_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn run_mc_table(args: McTableArgs) -> pointburst::Result<()> {
    let text = std::fs::read_to_string(&args.plan)?;
    let plan: ExperimentPlan =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid plan JSON: {e}")))?;
    let table = run_experiment(&plan)?;
    let dir = out_path(&args.out);
    std::fs::create_dir_all(&dir)?;
    io::write_atomic(&dir.join("table.csv"), &format_table(&table, TableLayout::LongCsv))?;
    io::write_atomic(&dir.join("table.txt"), &format_table(&table, TableLayout::Paper))?;
    io::write_atomic(
        &dir.join("table.json"),
        &serde_json::to_string_pretty(&table).expect("serializable"),
    )?;
    println!("wrote {} table cells to {}", table.cells.len(), dir.display());
    Ok(())
}

fn run_seasonality(args: SeasonalityArgs) -> pointburst::Result<()> {
    let mut days = Vec::with_capacity(args.inputs.len());
    for input in &args.inputs {
        let events = io::read_events(input, Some(args.horizon))?;
        days.push(bin_counts(&events, args.bin_width, args.horizon)?);
    }
    let curve = pointburst::estimate::estimate_seasonality(&days)?;
    io::write_seasonal(&out_path(&args.out), &curve)?;
    println!("wrote seasonal curve ({} bins) from {} days", curve.len(), days.len());
    Ok(())
}
