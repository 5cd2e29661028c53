//! Command-line interface for the pipeline and its individual stages.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal
//! or I/O error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::labeling::{LabelFamily, ProbeCondition, QClassThresholds};
use crate::market_data::{load_csv, CsvSchema};
use crate::pipeline::config::ProbeScaler;
use crate::pipeline::{self, PipelineConfig};
use crate::probe::{run_learnability_suite, SuiteOptions, TrainConfig};
use crate::splitting::{shuffle_then_split, split_then_shuffle, Embargo};
use crate::stationarity::{adf_test, Regression};
use crate::windowing::SliceSpec;

#[derive(Parser)]
#[command(
    name = "tslab",
    version,
    about = "Financial time-series preprocessing lab: slice, scale, label, split, probe"
)]
pub struct Cli {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Emit machine-readable JSON instead of aligned text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate an OHLCV CSV, printing a summary.
    Ingest(IngestArgs),
    /// Augmented Dickey-Fuller unit-root test on one CSV column.
    Adf(AdfArgs),
    /// Build the slice tensor (no scaling) and export it.
    Slice,
    /// Build and scale the slice tensor, exporting tensor and metadata.
    Scale,
    /// Compute labels for the configured dataset and export them as CSV.
    Label(LabelArgs),
    /// Produce a split plan with its leakage audit.
    Split(SplitArgs),
    /// Train the learnability probe on a close series.
    Probe(ProbeArgs),
    /// Run the full pipeline: ingest through export, writing a manifest.
    Run,
    /// Validate a configuration file without touching market data.
    Validate,
    /// Print a previously written manifest.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// CSV file; defaults to the configured input.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegressionArg {
    /// Constant term only.
    C,
    /// Constant and linear trend.
    Ct,
}

#[derive(Args)]
struct AdfArgs {
    #[arg(long)]
    input: PathBuf,
    /// Bar field to test.
    #[arg(long, default_value = "close")]
    column: String,
    /// Difference the series this many times first (0 or 1).
    #[arg(long, default_value_t = 0)]
    diff: u8,
    #[arg(long, value_enum, default_value_t = RegressionArg::Ct)]
    regression: RegressionArg,
    #[arg(long)]
    max_lags: Option<usize>,
}

#[derive(Args)]
struct LabelArgs {
    /// Override the configured label family.
    #[arg(long)]
    family: Option<String>,
    /// Override the configured label horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Quality-class thresholds as `up_min,down_max`.
    #[arg(long)]
    qclass: Option<String>,
    #[arg(long)]
    ma_period: Option<usize>,
}

#[derive(Args)]
struct SplitArgs {
    /// Train,validation,test fractions.
    #[arg(long, default_value = "0.8,0.2,0.0")]
    fractions: String,
    #[arg(long)]
    seed: Option<u64>,
    /// `auto` or an explicit number of embargoed slices.
    #[arg(long, default_value = "auto")]
    embargo: String,
    /// Use the shuffle-then-split anti-pattern (for leakage demos).
    #[arg(long)]
    anti_pattern: bool,
    /// Plan over an explicit slice count instead of the configured dataset.
    #[arg(long)]
    slices: Option<usize>,
    #[arg(long, default_value_t = 20)]
    lookback: usize,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value_t = 1)]
    horizon: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalerArg {
    Minmax,
    Standardize,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    /// Last close vs close 5 bars ago.
    C5,
    /// Last close vs 5-period EMA.
    Ema5,
    /// Last close vs highest close of the 10 last bars.
    Hc10,
    /// All three conditions.
    All,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ScalerArg::Standardize)]
    scaler: ScalerArg,
    #[arg(long, value_enum, default_value_t = ConditionArg::All)]
    condition: ConditionArg,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 32)]
    hidden: usize,
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
    #[arg(long, default_value_t = 20)]
    lookback: usize,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    /// Layer biases (`true` by default; the zero-threshold conditions also
    /// train without them).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    bias: bool,
}

#[derive(Args)]
struct InspectArgs {
    /// Path to a manifest.json (or a directory containing one).
    manifest: PathBuf,
}

/// Parses arguments, runs the command, and maps errors to exit codes.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --config <path>".into()))?;
    let mut config = PipelineConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.split.seed = seed;
        if let Some(probe) = &mut config.probe {
            probe.seed = seed;
        }
        if config.balance.seed.is_some() {
            config.balance.seed = Some(seed);
        }
    }
    if let Some(dir) = &cli.output_dir {
        config.output.dir = dir.clone();
    }
    Ok(config)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(args) => {
            let (path, schema) = match (&args.input, &cli.config) {
                (Some(path), _) => (path.clone(), CsvSchema::default()),
                (None, Some(_)) => {
                    let config = load_config(&cli)?;
                    (config.input.path.clone(), config.input.schema.clone())
                }
                (None, None) => {
                    return Err(Error::Config("ingest needs --input or --config".into()))
                }
            };
            let series = load_csv(&path, &schema)?;
            if cli.json {
                #[derive(serde::Serialize)]
                struct Summary<'a> {
                    symbol: &'a str,
                    rows: usize,
                    first: String,
                    last: String,
                    has_volume: bool,
                }
                print_json(&Summary {
                    symbol: series.symbol(),
                    rows: series.len(),
                    first: series.bars()[0].timestamp.to_string(),
                    last: series.bars()[series.len() - 1].timestamp.to_string(),
                    has_volume: series.volume_vector().is_some(),
                })?;
            } else {
                println!("symbol        {}", series.symbol());
                println!("rows          {}", series.len());
                println!("first bar     {}", series.bars()[0].timestamp);
                println!("last bar      {}", series.bars()[series.len() - 1].timestamp);
                println!(
                    "volume        {}",
                    if series.volume_vector().is_some() { "present" } else { "absent" }
                );
                println!("validation    ok");
            }
            Ok(())
        }
        Command::Adf(args) => {
            let series = load_csv(&args.input, &CsvSchema::default())?;
            let mut values = match args.column.as_str() {
                "open" => series.open_vector(),
                "high" => series.high_vector(),
                "low" => series.low_vector(),
                "close" => series.close_vector(),
                "volume" => series.volume_vector().ok_or_else(|| {
                    Error::Config("input has no volume column to test".into())
                })?,
                other => {
                    return Err(Error::Config(format!(
                        "unknown column '{other}' (expected open/high/low/close/volume)"
                    )))
                }
            };
            for _ in 0..args.diff {
                values = values.windows(2).map(|w| w[1] - w[0]).collect();
            }
            let regression = match args.regression {
                RegressionArg::C => Regression::Constant,
                RegressionArg::Ct => Regression::ConstantAndTrend,
            };
            let report = adf_test(&values, regression, args.max_lags)?;
            if cli.json {
                print_json(&report)?;
            } else {
                println!("{report}");
            }
            Ok(())
        }
        Command::Slice => {
            let config = load_config(&cli)?;
            let series = pipeline::load_input(&config)?;
            let channels = pipeline::build_channels(&config, &series)?;
            let (tensor, warmup) = pipeline::build_unscaled(&config, &channels)?;
            let dir = &config.output.dir;
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            write_bytes(&dir.join("tensor.bin"), &pipeline::tensor_blob_bytes(&tensor))?;
            write_bytes(&dir.join("tensor_meta.json"), &pipeline::tensor_meta_json(&tensor, warmup)?)?;
            write_bytes(&dir.join("flattened.csv"), &pipeline::flattened_csv_bytes(&tensor))?;
            let (m, s, i) = tensor.shape();
            report_done(&cli, &format!("sliced ({m}, {s}, {i}) tensor into {}", dir.display()))
        }
        Command::Scale => {
            let config = load_config(&cli)?;
            let series = pipeline::load_input(&config)?;
            let channels = pipeline::build_channels(&config, &series)?;
            let (unscaled, warmup) = pipeline::build_unscaled(&config, &channels)?;
            let tensor = pipeline::build_scaled(&config, &channels, &unscaled, warmup)?;
            let dir = &config.output.dir;
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            write_bytes(&dir.join("tensor.bin"), &pipeline::tensor_blob_bytes(&tensor))?;
            write_bytes(&dir.join("tensor_meta.json"), &pipeline::tensor_meta_json(&tensor, warmup)?)?;
            write_bytes(&dir.join("flattened.csv"), &pipeline::flattened_csv_bytes(&tensor))?;
            let (m, s, i) = tensor.shape();
            report_done(&cli, &format!("scaled ({m}, {s}, {i}) tensor into {}", dir.display()))
        }
        Command::Label(args) => {
            let mut config = load_config(&cli)?;
            if let Some(family) = &args.family {
                config.label.family = parse_family(family)?;
            }
            if let Some(h) = args.horizon {
                config.label.horizon = h;
                config.slices.label_horizon = config.slices.label_horizon.max(h);
            }
            if let Some(qc) = &args.qclass {
                config.label.qclass = parse_qclass(qc)?;
            }
            if let Some(p) = args.ma_period {
                config.label.ma_period = p;
            }
            let problems = config.check();
            if !problems.is_empty() {
                return Err(Error::Config(problems.join("; ")));
            }
            let series = pipeline::load_input(&config)?;
            let channels = pipeline::build_channels(&config, &series)?;
            let (tensor, _) = pipeline::build_unscaled(&config, &channels)?;
            let labels = pipeline::build_labels(&config, &series, &tensor.end_indices)?;
            let dir = &config.output.dir;
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            write_bytes(&dir.join("labels.csv"), &pipeline::labels_csv_bytes(&labels, &tensor.end_indices))?;
            if cli.json {
                print_json(&labels)?;
            } else {
                let hist = labels.class_histogram();
                if hist.is_empty() {
                    println!("wrote {} regression labels", labels.values.len());
                } else {
                    println!("wrote {} labels, histogram {:?}", labels.values.len(), hist);
                }
            }
            Ok(())
        }
        Command::Split(args) => {
            let fractions = parse_fractions(&args.fractions)?;
            let seed = args.seed.or(cli.seed);
            let (k, spec, seed) = match args.slices {
                Some(k) => {
                    let spec = SliceSpec {
                        lookback: args.lookback,
                        stride: args.stride,
                        channels: vec!["close".into()],
                        label_horizon: args.horizon,
                    };
                    (k, spec, seed.unwrap_or(0))
                }
                None => {
                    let config = load_config(&cli)?;
                    let series = pipeline::load_input(&config)?;
                    let channels = pipeline::build_channels(&config, &series)?;
                    let (tensor, _) = pipeline::build_unscaled(&config, &channels)?;
                    let spec = pipeline::slice_spec(&config);
                    (tensor.slice_count(), spec, seed.unwrap_or(config.split.seed))
                }
            };
            let plan = if args.anti_pattern {
                shuffle_then_split(k, fractions, seed, &spec)?
            } else {
                let embargo = parse_embargo(&args.embargo)?;
                split_then_shuffle(k, fractions, seed, &spec, embargo)?
            };
            if cli.json {
                print_json(&plan)?;
            } else {
                println!("method            {:?}", plan.method);
                println!("slices            {}", plan.slice_count);
                println!("train             {:?} ({} kept)", plan.train_range, plan.train_order.len());
                println!("embargo           {:?}", plan.embargo_range);
                println!("val               {:?}", plan.val_range);
                println!("test              {:?}", plan.test_range);
                println!("max overlap       {:.4}", plan.leakage.max_cross_overlap);
                println!("mean overlap      {:.4}", plan.leakage.mean_cross_overlap);
                println!("overlapping pairs {}", plan.leakage.violating_pairs);
                println!("label violations  {}", plan.leakage.label_window_violations);
            }
            Ok(())
        }
        Command::Probe(args) => {
            let series = load_csv(&args.input, &CsvSchema::default())?;
            let closes = series.close_vector();
            let conditions = match args.condition {
                ConditionArg::C5 => vec![ProbeCondition::CloseVs5Ago],
                ConditionArg::Ema5 => vec![ProbeCondition::CloseVsEma5],
                ConditionArg::Hc10 => vec![ProbeCondition::CloseVsHighest10],
                ConditionArg::All => ProbeCondition::ALL.to_vec(),
            };
            let scaler = match args.scaler {
                ScalerArg::Minmax => ProbeScaler::MinMax,
                ScalerArg::Standardize => ProbeScaler::Standardize,
                ScalerArg::Raw => ProbeScaler::Raw,
            };
            let options = SuiteOptions {
                lookback: args.lookback,
                hidden_units: args.hidden,
                train: TrainConfig {
                    epochs: args.epochs,
                    batch_size: args.batch_size,
                    learning_rate: args.learning_rate,
                    seed: args.seed.or(cli.seed).unwrap_or(42),
                    dropout_rate: args.dropout,
                },
                conditions,
                use_bias: args.bias,
                ..Default::default()
            };
            let reports = run_learnability_suite(&closes, scaler.as_method(), &options)?;
            if let Some(dir) = &cli.output_dir {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                for (cond, report) in &reports {
                    let mut csv = String::from("epoch,train_loss,val_loss\n");
                    for (epoch, (t, v)) in
                        report.train_loss.iter().zip(&report.val_loss).enumerate()
                    {
                        csv.push_str(&format!("{epoch},{t},{v}\n"));
                    }
                    write_bytes(
                        &dir.join(format!(
                            "probe_losses_{}_{}.csv",
                            cond.short_name(),
                            scaler.name()
                        )),
                        csv.as_bytes(),
                    )?;
                }
            }
            if cli.json {
                #[derive(serde::Serialize)]
                struct Entry<'a> {
                    condition: &'a str,
                    scaler: &'a str,
                    report: &'a crate::probe::ProbeReport,
                }
                let docs: Vec<Entry> = reports
                    .iter()
                    .map(|(c, r)| Entry {
                        condition: c.short_name(),
                        scaler: scaler.name(),
                        report: r,
                    })
                    .collect();
                print_json(&docs)?;
            } else {
                println!(
                    "{:<10} {:<12} {:>10} {:>10} {:>22}",
                    "condition", "scaler", "accuracy", "val loss", "precision (per class)"
                );
                for (cond, report) in &reports {
                    println!(
                        "{:<10} {:<12} {:>10.4} {:>10.4} {:>22}",
                        cond.short_name(),
                        scaler.name(),
                        report.accuracy,
                        report.val_loss.last().unwrap_or(&f64::NAN),
                        format!("{:?}", report.precision.iter().map(|p| (p * 1e4).round() / 1e4).collect::<Vec<_>>()),
                    );
                }
            }
            Ok(())
        }
        Command::Run => {
            let config = load_config(&cli)?;
            let manifest = pipeline::run_pipeline(&config)?;
            if cli.json {
                print_json(&manifest)?;
            } else {
                print!("{}", manifest.render_text());
            }
            Ok(())
        }
        Command::Validate => {
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| Error::Config("validate needs --config <path>".into()))?;
            match pipeline::validate_config(path) {
                Ok(_) => {
                    println!("ok");
                    Ok(())
                }
                Err(problems) => {
                    for p in &problems {
                        eprintln!("problem: {p}");
                    }
                    Err(Error::Config(format!("{} problem(s) found", problems.len())))
                }
            }
        }
        Command::Inspect(args) => {
            let path = if args.manifest.is_dir() {
                args.manifest.join("manifest.json")
            } else {
                args.manifest.clone()
            };
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let manifest: pipeline::DatasetManifest = serde_json::from_str(&text)?;
            if cli.json {
                print_json(&manifest)?;
            } else {
                print!("{}", manifest.render_text());
            }
            Ok(())
        }
    }
}

fn report_done(cli: &Cli, message: &str) -> Result<()> {
    if cli.json {
        println!("{{\"status\": \"ok\", \"detail\": {:?}}}", message);
    } else {
        println!("{message}");
    }
    Ok(())
}

fn write_bytes(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn parse_fractions(raw: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "fractions must be three comma-separated numbers, got '{raw}'"
        )));
    }
    let mut values = [0.0; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad fraction '{part}'")))?;
    }
    Ok((values[0], values[1], values[2]))
}

fn parse_embargo(raw: &str) -> Result<Embargo> {
    if raw == "auto" {
        return Ok(Embargo::Auto);
    }
    raw.parse::<usize>()
        .map(Embargo::Slices)
        .map_err(|_| Error::Config(format!("embargo must be 'auto' or a slice count, got '{raw}'")))
}

fn parse_family(raw: &str) -> Result<LabelFamily> {
    match raw {
        "nbar_updown" => Ok(LabelFamily::NbarUpdown),
        "nbar_change" => Ok(LabelFamily::NbarChange),
        "nbar_logret" => Ok(LabelFamily::NbarLogret),
        "ma_updown" => Ok(LabelFamily::MaUpdown),
        "trend_strength" => Ok(LabelFamily::TrendStrength),
        "trend_direction" => Ok(LabelFamily::TrendDirection),
        "pctq" => Ok(LabelFamily::Pctq),
        "qclass" => Ok(LabelFamily::Qclass),
        other => Err(Error::Config(format!("unknown label family '{other}'"))),
    }
}

fn parse_qclass(raw: &str) -> Result<QClassThresholds> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!(
            "qclass thresholds must be 'up_min,down_max', got '{raw}'"
        )));
    }
    let up_min = parts[0]
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("bad threshold '{}'", parts[0])))?;
    let down_max = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("bad threshold '{}'", parts[1])))?;
    let thresholds = QClassThresholds { up_min, down_max };
    thresholds.validate()?;
    Ok(thresholds)
}
