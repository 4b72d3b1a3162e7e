use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use logdist::event_log::{
    parse_timestamp, read_log, write_log, ColumnMapping, FormatOptions, Timestamp,
};
use logdist::harness::{
    evaluate_scenarios, evaluate_with, parse_measures, EvaluateOptions, MeasureId, SuiteConfig,
    DEFAULT_CASES, DEFAULT_RUNS, DEFAULT_SEED,
};
use logdist::kernels::Kernel;
use logdist::sim::{simulate, BpsModel, Scenario, SimulationConfig};

const INPUT_ERROR: u8 = 2;
const MEASURE_ERROR: u8 = 3;

/// Distances between event logs, and a loan-process simulator to try them on.
#[derive(Parser)]
#[command(name = "logdist", version)]
struct Cli {
    /// TOML or JSON file with default values for any flag (snake_case keys).
    #[arg(long, global = true, env = "LOGDIST_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare generated logs against a reference log.
    Compare(CompareArgs),
    /// Simulate a model and write its event log as CSV.
    Simulate(SimulateArgs),
    /// Run the eight loan scenarios against a GT reference log.
    #[command(name = "evaluate-scenarios", alias = "evaluate")]
    EvaluateScenarios(EvaluateArgs),
    /// List the loan scenarios, or print one as a model document.
    Scenarios {
        /// Scenario to print as JSON.
        name: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct CompareArgs {
    /// Reference (actual) log.
    alog: PathBuf,
    /// Generated logs.
    #[arg(required = true)]
    glogs: Vec<PathBuf>,
    /// Comma-separated measures, e.g. `ngd,aed:1wd` or `all`.
    #[arg(long, env = "LOGDIST_MEASURES")]
    measures: Option<String>,
    /// N-gram size for NGD.
    #[arg(long, env = "LOGDIST_N")]
    n: Option<usize>,
    /// Kernel for AED, CED, RED and CAR: emd or 1wd.
    #[arg(long, env = "LOGDIST_KERNEL")]
    kernel: Option<Kernel>,
    /// Largest log size for which CFLD is attempted.
    #[arg(long, env = "LOGDIST_MAX_CASES")]
    max_cases: Option<usize>,
    /// Exit with status 3 when any measure fails.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    columns: ColumnArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ColumnArgs {
    #[arg(long, env = "LOGDIST_CASE_COLUMN")]
    case_column: Option<String>,
    #[arg(long, env = "LOGDIST_ACTIVITY_COLUMN")]
    activity_column: Option<String>,
    #[arg(long, env = "LOGDIST_START_COLUMN")]
    start_column: Option<String>,
    #[arg(long, env = "LOGDIST_END_COLUMN")]
    end_column: Option<String>,
    /// strptime pattern for timestamps; RFC 3339 when absent.
    #[arg(long, env = "LOGDIST_TIMESTAMP_FORMAT")]
    timestamp_format: Option<String>,
    #[arg(long, env = "LOGDIST_DELIMITER")]
    delimiter: Option<char>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, env = "LOGDIST_FORMAT")]
    format: Option<Format>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model document (JSON).
    #[arg(
        long,
        conflicts_with = "scenario",
        required_unless_present = "scenario"
    )]
    model: Option<PathBuf>,
    /// Built-in loan scenario instead of a model file.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, env = "LOGDIST_CASES")]
    cases: Option<usize>,
    #[arg(long, env = "LOGDIST_SEED")]
    seed: Option<u64>,
    /// First arrival instant (RFC 3339).
    #[arg(long, env = "LOGDIST_START")]
    start: Option<String>,
    /// Output CSV; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, env = "LOGDIST_SEED")]
    seed: Option<u64>,
    /// Generated logs per scenario.
    #[arg(long, short = 'k', alias = "runs", env = "LOGDIST_K")]
    k: Option<usize>,
    /// Cases per simulated log.
    #[arg(long, env = "LOGDIST_CASES")]
    cases: Option<usize>,
    #[arg(long, env = "LOGDIST_START")]
    start: Option<String>,
    #[arg(long, env = "LOGDIST_MEASURES")]
    measures: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

/// Defaults read from `--config`.
#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    measures: Option<String>,
    n: Option<usize>,
    kernel: Option<Kernel>,
    max_cases: Option<usize>,
    strict: Option<bool>,
    case_column: Option<String>,
    activity_column: Option<String>,
    start_column: Option<String>,
    end_column: Option<String>,
    timestamp_format: Option<String>,
    delimiter: Option<char>,
    format: Option<Format>,
    seed: Option<u64>,
    k: Option<usize>,
    cases: Option<usize>,
    start: Option<String>,
}

impl FileConfig {
    fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(anyhow::Error::from)
        } else {
            toml::from_str(&text).map_err(anyhow::Error::from)
        };
        parsed.with_context(|| format!("invalid config file {}", path.display()))
    }
}

/// Failure tagged with its exit status; plain `?` maps to an input error.
struct Failure(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(INPUT_ERROR, e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Compare(args) => compare(args, file),
        Command::Simulate(args) => simulate_cmd(args, file),
        Command::EvaluateScenarios(args) => evaluate_cmd(args, file),
        Command::Scenarios { name } => {
            match name {
                Some(name) => println!("{}", logdist::sim::scenario(&name)?.to_json()),
                None => {
                    for sc in Scenario::ALL {
                        println!("{:<5} {}", sc.name(), sc.description());
                    }
                }
            }
            Ok(0)
        }
    }
}

fn start_instant(raw: Option<String>) -> anyhow::Result<Timestamp> {
    match raw {
        None => Ok(SuiteConfig::default().start),
        Some(raw) => {
            parse_timestamp(&raw, None).with_context(|| format!("invalid start instant `{raw}`"))
        }
    }
}

fn emit(
    output: &OutputArgs,
    file_format: Option<Format>,
    json: String,
    text: String,
) -> anyhow::Result<()> {
    let format = output
        .format
        .or(file_format)
        .unwrap_or(if output.out.is_some() {
            Format::Json
        } else {
            Format::Text
        });
    let body = match format {
        Format::Json => json + "\n",
        Format::Text => text,
    };
    match &output.out {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn compare(args: CompareArgs, file: FileConfig) -> Result<u8, Failure> {
    for path in std::iter::once(&args.alog).chain(&args.glogs) {
        if !path.is_file() {
            return Err(Failure(
                INPUT_ERROR,
                anyhow!("no such file: {}", path.display()),
            ));
        }
    }
    let c = args.columns;
    let defaults = ColumnMapping::default();
    let mapping = ColumnMapping {
        case_id: c
            .case_column
            .or(file.case_column)
            .unwrap_or(defaults.case_id),
        activity: c
            .activity_column
            .or(file.activity_column)
            .unwrap_or(defaults.activity),
        start: c
            .start_column
            .or(file.start_column)
            .unwrap_or(defaults.start),
        end: c.end_column.or(file.end_column).unwrap_or(defaults.end),
    };
    let mut format = FormatOptions {
        timestamp_format: c.timestamp_format.or(file.timestamp_format),
        ..FormatOptions::default()
    };
    if let Some(d) = c.delimiter.or(file.delimiter) {
        if !d.is_ascii() {
            return Err(Failure(
                INPUT_ERROR,
                anyhow!("delimiter must be a single ASCII character"),
            ));
        }
        format.delimiter = d as u8;
    }

    let mut measures = match args.measures.or(file.measures) {
        Some(list) => parse_measures(&list)?,
        None => MeasureId::DEFAULTS.to_vec(),
    };
    if let Some(n) = args.n.or(file.n) {
        if n == 0 {
            return Err(Failure(INPUT_ERROR, anyhow!("--n must be at least 1")));
        }
        for m in &mut measures {
            if let MeasureId::Ngd { n: size } = m {
                *size = n;
            }
        }
    }
    if let Some(kernel) = args.kernel.or(file.kernel) {
        measures = measures
            .into_iter()
            .map(|m| m.with_kernel(kernel))
            .collect();
    }
    let options = EvaluateOptions {
        max_cases: args
            .max_cases
            .or(file.max_cases)
            .unwrap_or(EvaluateOptions::default().max_cases),
    };

    let alog = read_log(&args.alog, &mapping, &format)?;
    let glogs = args
        .glogs
        .iter()
        .map(|p| read_log(p, &mapping, &format))
        .collect::<Result<Vec<_>, _>>()?;
    let report = evaluate_with(&alog, &glogs, &measures, options)?;
    emit(
        &args.output,
        file.format,
        report.to_json(),
        report.to_text(),
    )?;

    if report.has_errors() {
        for m in &report.measures {
            if let logdist::harness::Outcome::Error { run, message } = &m.outcome {
                eprintln!(
                    "warning: {} failed on {}: {message}",
                    m.measure,
                    args.glogs[*run].display()
                );
            }
        }
        if args.strict || file.strict.unwrap_or(false) {
            return Ok(MEASURE_ERROR);
        }
    }
    Ok(0)
}

fn simulate_cmd(args: SimulateArgs, file: FileConfig) -> Result<u8, Failure> {
    let model = match (&args.model, &args.scenario) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            BpsModel::from_json(&text)
                .with_context(|| format!("invalid model {}", path.display()))?
        }
        (None, Some(name)) => logdist::sim::scenario(name)?,
        (None, None) => unreachable!("clap requires one of --model, --scenario"),
    };
    let cases = args.cases.or(file.cases).unwrap_or(DEFAULT_CASES);
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let config = SimulationConfig::new(cases, seed, start_instant(args.start.or(file.start))?);
    let log = simulate(&model, &config).map_err(|e| Failure(1, e.into()))?;
    match &args.out {
        Some(path) => write_log(&log, path)?,
        None => logdist::event_log::write_log_to(&log, std::io::stdout().lock())?,
    }
    Ok(0)
}

fn evaluate_cmd(args: EvaluateArgs, file: FileConfig) -> Result<u8, Failure> {
    let config = SuiteConfig {
        seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        runs: args.k.or(file.k).unwrap_or(DEFAULT_RUNS),
        cases: args.cases.or(file.cases).unwrap_or(DEFAULT_CASES),
        start: start_instant(args.start.or(file.start))?,
    };
    if config.runs == 0 || config.cases == 0 {
        return Err(Failure(
            INPUT_ERROR,
            anyhow!("K and --cases must both be at least 1"),
        ));
    }
    let measures = match args.measures.or(file.measures) {
        Some(list) => parse_measures(&list)?,
        None => MeasureId::DEFAULTS.to_vec(),
    };
    let report = evaluate_scenarios(&config, &measures)?;
    emit(
        &args.output,
        file.format,
        report.to_json(),
        report.to_text(),
    )?;
    Ok(0)
}
