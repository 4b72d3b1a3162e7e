//! K-run evaluation: compare each generated log against one reference log,
//! aggregate per measure, and run the loan scenario suite.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use chrono::DateTime;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::congestion::{car_with, ctd};
use crate::control_flow::{cfld_with_budget, ngd, DEFAULT_MAX_CASES, DEFAULT_NGRAM_SIZE};
use crate::error::{Error, Result};
use crate::event_log::{EventLog, Timestamp};
use crate::kernels::Kernel;
use crate::sim::{simulate, Scenario, SimulationConfig};
use crate::temporal::{aed_with, ced_with, red_with};

/// Version of the JSON layout of [`EvaluationReport`] and [`ScenarioReport`].
pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_CASES: usize = 200;
pub const DEFAULT_SEED: u64 = 42;

/// A distance measure together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureId {
    Ngd { n: usize },
    Cfld,
    Aed(Kernel),
    Ced(Kernel),
    Red(Kernel),
    Car(Kernel),
    Ctd,
}

impl MeasureId {
    /// The seven measures with default parameters, in report order.
    pub const DEFAULTS: [MeasureId; 7] = [
        MeasureId::Ngd {
            n: DEFAULT_NGRAM_SIZE,
        },
        MeasureId::Cfld,
        MeasureId::Aed(Kernel::Emd),
        MeasureId::Ced(Kernel::Emd),
        MeasureId::Red(Kernel::Emd),
        MeasureId::Car(Kernel::Emd),
        MeasureId::Ctd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::Ngd { .. } => "NGD",
            MeasureId::Cfld => "CFLD",
            MeasureId::Aed(_) => "AED",
            MeasureId::Ced(_) => "CED",
            MeasureId::Red(_) => "RED",
            MeasureId::Car(_) => "CAR",
            MeasureId::Ctd => "CTD",
        }
    }

    pub fn kernel(self) -> Option<Kernel> {
        match self {
            MeasureId::Aed(k) | MeasureId::Ced(k) | MeasureId::Red(k) | MeasureId::Car(k) => {
                Some(k)
            }
            _ => None,
        }
    }

    pub fn ngram_size(self) -> Option<usize> {
        match self {
            MeasureId::Ngd { n } => Some(n),
            _ => None,
        }
    }

    /// Same measure under another kernel; measures without a kernel choice
    /// are returned unchanged.
    pub fn with_kernel(self, kernel: Kernel) -> Self {
        match self {
            MeasureId::Aed(_) => MeasureId::Aed(kernel),
            MeasureId::Ced(_) => MeasureId::Ced(kernel),
            MeasureId::Red(_) => MeasureId::Red(kernel),
            MeasureId::Car(_) => MeasureId::Car(kernel),
            other => other,
        }
    }

    pub fn compute(self, alog: &EventLog, glog: &EventLog, max_cases: usize) -> Result<f64> {
        match self {
            MeasureId::Ngd { n } => ngd(alog, glog, n),
            MeasureId::Cfld => cfld_with_budget(alog, glog, max_cases),
            MeasureId::Aed(k) => aed_with(alog, glog, k),
            MeasureId::Ced(k) => ced_with(alog, glog, k),
            MeasureId::Red(k) => red_with(alog, glog, k),
            MeasureId::Car(k) => car_with(alog, glog, k),
            MeasureId::Ctd => ctd(alog, glog),
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.ngram_size(), self.kernel()) {
            (Some(n), _) if n != DEFAULT_NGRAM_SIZE => write!(f, "NGD:{n}"),
            (_, Some(k)) if k != Kernel::Emd => write!(f, "{}:{}", self.name(), k.name()),
            _ => f.write_str(self.name()),
        }
    }
}

/// Parses `ngd`, `ngd:3`, `aed`, `aed:1wd`, ... (case-insensitive).
impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, param) = match lower.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (lower.as_str(), None),
        };
        let kernel = || -> Result<Kernel> { param.map_or(Ok(Kernel::Emd), str::parse) };
        let no_param = |m: MeasureId| match param {
            None => Ok(m),
            Some(p) => Err(Error::Parameter(format!(
                "measure {name} takes no parameter, got `{p}`"
            ))),
        };
        match name {
            "ngd" => {
                let n =
                    match param {
                        None => DEFAULT_NGRAM_SIZE,
                        Some(p) => p.parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
                            Error::Parameter(format!("invalid n-gram size `{p}`"))
                        })?,
                    };
                Ok(MeasureId::Ngd { n })
            }
            "cfld" => no_param(MeasureId::Cfld),
            "ctd" => no_param(MeasureId::Ctd),
            "aed" => Ok(MeasureId::Aed(kernel()?)),
            "ced" => Ok(MeasureId::Ced(kernel()?)),
            "red" => Ok(MeasureId::Red(kernel()?)),
            "car" => Ok(MeasureId::Car(kernel()?)),
            _ => Err(Error::Parameter(format!(
                "unknown measure `{s}` (expected ngd, cfld, aed, ced, red, car or ctd)"
            ))),
        }
    }
}

/// Parses a comma-separated measure list; `all` selects [`MeasureId::DEFAULTS`].
pub fn parse_measures(list: &str) -> Result<Vec<MeasureId>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(MeasureId::DEFAULTS.to_vec());
    }
    let measures = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<MeasureId>>>()?;
    if measures.is_empty() {
        return Err(Error::Parameter("no measure selected".into()));
    }
    Ok(measures)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub k: usize,
    pub values: Vec<f64>,
    pub mean: f64,
    pub ci_halfwidth: f64,
    /// Set when K = 1 and no interval can be estimated.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ci_degenerate: bool,
}

impl MeasureSummary {
    pub fn from_values(values: Vec<f64>) -> Self {
        let k = values.len();
        let mean = values.iter().sum::<f64>() / k as f64;
        let (ci_halfwidth, ci_degenerate) = if k < 2 {
            (0.0, true)
        } else {
            (t_halfwidth(&values, mean), false)
        };
        Self {
            k,
            values,
            mean,
            ci_halfwidth,
            ci_degenerate,
        }
    }
}

/// Student-t 95% half-width, `t(0.975, K-1) * s / sqrt(K)`.
fn t_halfwidth(values: &[f64], mean: f64) -> f64 {
    let k = values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    if var == 0.0 {
        return 0.0;
    }
    let t = StudentsT::new(0.0, 1.0, k - 1.0)
        .expect("k >= 2")
        .inverse_cdf(0.975);
    t * var.sqrt() / k.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Ok(MeasureSummary),
    Error { run: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    pub measure: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Kernel>,
    #[serde(flatten)]
    pub outcome: Outcome,
}

impl MeasureResult {
    pub fn summary(&self) -> Option<&MeasureSummary> {
        match &self.outcome {
            Outcome::Ok(s) => Some(s),
            Outcome::Error { .. } => None,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        self.summary().map(|s| s.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub k: usize,
    pub measures: Vec<MeasureResult>,
}

impl EvaluationReport {
    pub fn get(&self, name: &str) -> Option<&MeasureResult> {
        self.measures
            .iter()
            .find(|m| m.measure.eq_ignore_ascii_case(name))
    }

    pub fn has_errors(&self) -> bool {
        self.measures.iter().any(|m| m.summary().is_none())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned columns: measure, K, mean, half-width.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<10} {:>3} {:>14} {:>12}\n",
            "measure", "K", "mean", "ci95"
        );
        for m in &self.measures {
            let label = match (m.n, m.kernel) {
                (Some(n), _) => format!("{}(n={n})", m.measure),
                (_, Some(k)) => format!("{}/{}", m.measure, k.name()),
                _ => m.measure.clone(),
            };
            match &m.outcome {
                Outcome::Ok(s) => {
                    let flag = if s.ci_degenerate { " (K=1)" } else { "" };
                    let _ = writeln!(
                        out,
                        "{label:<10} {:>3} {:>14.4} {:>12.4}{flag}",
                        s.k, s.mean, s.ci_halfwidth
                    );
                }
                Outcome::Error { run, message } => {
                    let _ = writeln!(out, "{label:<10} error in run {run}: {message}");
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvaluateOptions {
    /// Largest log size for which CFLD is attempted.
    pub max_cases: usize,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        Self {
            max_cases: DEFAULT_MAX_CASES,
        }
    }
}

pub fn evaluate(
    alog: &EventLog,
    glogs: &[EventLog],
    measures: &[MeasureId],
) -> Result<EvaluationReport> {
    evaluate_with(alog, glogs, measures, EvaluateOptions::default())
}

/// Computes every measure once per generated log. A failing comparison is
/// recorded against its measure; the others are still computed.
pub fn evaluate_with(
    alog: &EventLog,
    glogs: &[EventLog],
    measures: &[MeasureId],
    options: EvaluateOptions,
) -> Result<EvaluationReport> {
    if glogs.is_empty() {
        return Err(Error::Precondition(
            "evaluation needs at least one generated log".into(),
        ));
    }
    let grid: Vec<(usize, usize)> = (0..measures.len())
        .flat_map(|m| (0..glogs.len()).map(move |k| (m, k)))
        .collect();
    let values: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&(m, k)| measures[m].compute(alog, &glogs[k], options.max_cases))
        .collect();

    let measures = measures
        .iter()
        .zip(values.chunks(glogs.len()))
        .map(|(&id, runs)| {
            let outcome = match runs.iter().position(Result::is_err) {
                Some(run) => Outcome::Error {
                    run,
                    message: runs[run].as_ref().unwrap_err().to_string(),
                },
                None => Outcome::Ok(MeasureSummary::from_values(
                    runs.iter().map(|r| *r.as_ref().unwrap()).collect(),
                )),
            };
            MeasureResult {
                measure: id.name().to_string(),
                n: id.ngram_size(),
                kernel: id.kernel(),
                outcome,
            }
        })
        .collect();
    Ok(EvaluationReport {
        schema_version: SCHEMA_VERSION,
        k: glogs.len(),
        measures,
    })
}

/// The kernel-dependent measures under EMD and 1-WD side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelComparison {
    pub emd: EvaluationReport,
    pub wasserstein: EvaluationReport,
}

pub const KERNEL_MEASURES: [MeasureId; 4] = [
    MeasureId::Aed(Kernel::Emd),
    MeasureId::Ced(Kernel::Emd),
    MeasureId::Red(Kernel::Emd),
    MeasureId::Car(Kernel::Emd),
];

pub fn compare_kernels(alog: &EventLog, glogs: &[EventLog]) -> Result<KernelComparison> {
    let w1: Vec<MeasureId> = KERNEL_MEASURES
        .iter()
        .map(|m| m.with_kernel(Kernel::Wasserstein))
        .collect();
    Ok(KernelComparison {
        emd: evaluate(alog, glogs, &KERNEL_MEASURES)?,
        wasserstein: evaluate(alog, glogs, &w1)?,
    })
}

/// Indices of `values` from smallest to largest; ties keep input order.
pub fn ranking(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Kendall rank correlation with the tau-b tie correction. Returns `None`
/// when either input is constant or the lengths differ.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mut concordant, mut discordant, mut tied_x, mut tied_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i].total_cmp(&x[j]) as i64;
            let dy = y[i].total_cmp(&y[j]) as i64;
            match (dx, dy) {
                (0, 0) => {}
                (0, _) => tied_x += 1,
                (_, 0) => tied_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let denom =
        (((concordant + discordant + tied_x) * (concordant + discordant + tied_y)) as f64).sqrt();
    (denom > 0.0).then(|| (concordant - discordant) as f64 / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub runs: usize,
    pub cases: usize,
    pub start: Timestamp,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            runs: DEFAULT_RUNS,
            cases: DEFAULT_CASES,
            start: DateTime::parse_from_rfc3339("2022-05-02T00:00:00+00:00")
                .expect("valid literal"),
        }
    }
}

impl SuiteConfig {
    /// Configuration of the reference log.
    pub fn reference(&self) -> SimulationConfig {
        SimulationConfig::new(self.cases, self.seed, self.start).with_arrival_seed(self.seed)
    }

    /// Configuration of generated log `run`. Seeds depend on the run only,
    /// so every scenario sees the same random numbers and every run shares
    /// the reference arrivals.
    pub fn generated(&self, run: usize) -> SimulationConfig {
        SimulationConfig::new(self.cases, run_seed(self.seed, run), self.start)
            .with_arrival_seed(self.seed)
    }
}

/// SplitMix64 finalizer over (seed, run).
fn run_seed(seed: u64, run: usize) -> u64 {
    let mut z = seed ^ (run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ScenarioOutcome {
    Ok { report: EvaluationReport },
    Failed { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub scenario: Scenario,
    pub description: String,
    #[serde(flatten)]
    pub outcome: ScenarioOutcome,
}

impl ScenarioRow {
    pub fn report(&self) -> Option<&EvaluationReport> {
        match &self.outcome {
            ScenarioOutcome::Ok { report } => Some(report),
            ScenarioOutcome::Failed { .. } => None,
        }
    }

    pub fn mean(&self, measure: &str) -> Option<f64> {
        self.report()?.get(measure)?.mean()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub config: SuiteConfig,
    pub measures: Vec<String>,
    pub scenarios: Vec<ScenarioRow>,
}

impl ScenarioReport {
    pub fn row(&self, scenario: Scenario) -> Option<&ScenarioRow> {
        self.scenarios.iter().find(|r| r.scenario == scenario)
    }

    /// Mean of `measure` for every scenario, in row order; `None` for
    /// failed rows or measures.
    pub fn means(&self, measure: &str) -> Vec<Option<f64>> {
        self.scenarios.iter().map(|r| r.mean(measure)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Scenario rows by measure columns, each cell `mean (±half-width)`.
    pub fn to_text(&self) -> String {
        const WIDTH: usize = 20;
        let mut out = format!(
            "seed {}, K = {}, {} cases per log\n{:<10}",
            self.config.seed, self.config.runs, self.config.cases, "scenario"
        );
        for m in &self.measures {
            let _ = write!(out, "{m:>WIDTH$}");
        }
        out.push('\n');
        for row in &self.scenarios {
            let _ = write!(out, "{:<10}", format!("Loan_{}", row.scenario));
            match &row.outcome {
                ScenarioOutcome::Failed { message } => {
                    let _ = write!(out, "  failed: {message}");
                }
                ScenarioOutcome::Ok { report } => {
                    for m in &report.measures {
                        let cell = match &m.outcome {
                            Outcome::Ok(s) => format!("{:.2} (±{:.2})", s.mean, s.ci_halfwidth),
                            Outcome::Error { .. } => "error".to_string(),
                        };
                        let _ = write!(out, "{cell:>WIDTH$}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Simulates the reference log from GT and `config.runs` logs per scenario,
/// then evaluates every scenario against the reference.
pub fn evaluate_scenarios(config: &SuiteConfig, measures: &[MeasureId]) -> Result<ScenarioReport> {
    evaluate_scenario_list(config, &Scenario::ALL, measures)
}

pub fn evaluate_scenario_list(
    config: &SuiteConfig,
    scenarios: &[Scenario],
    measures: &[MeasureId],
) -> Result<ScenarioReport> {
    if config.runs == 0 || config.cases == 0 {
        return Err(Error::Parameter(
            "runs and cases must both be at least 1".into(),
        ));
    }
    let alog = simulate(&Scenario::Gt.model(), &config.reference())?;
    let rows = scenarios
        .par_iter()
        .map(|&scenario| {
            let model = scenario.model();
            let glogs: Result<Vec<EventLog>> = (0..config.runs)
                .into_par_iter()
                .map(|run| simulate(&model, &config.generated(run)))
                .collect();
            let outcome = match glogs.and_then(|g| evaluate(&alog, &g, measures)) {
                Ok(report) => ScenarioOutcome::Ok { report },
                Err(e) => ScenarioOutcome::Failed {
                    message: e.to_string(),
                },
            };
            ScenarioRow {
                scenario,
                description: scenario.description().to_string(),
                outcome,
            }
        })
        .collect();
    Ok(ScenarioReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        measures: measures.iter().map(|m| m.to_string()).collect(),
        scenarios: rows,
    })
}
