//! The `replicalc` command line.
//!
//! Every subcommand is a pure function of its flags and input files. Output
//! goes to standard output (or `--out PATH`) as JSON, or as CSV with
//! `--format csv`. Exit codes: 0 success, 1 computation error, 2 usage error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::combine::pool_studies;
use crate::compare::{compare_p_and_posterior, Direction};
use crate::error::Error;
use crate::figure::{build_figure, format_float, FigureId};
use crate::grid::{Curve, Observation, ParameterGrid};
use crate::likelihood::{likelihood_curve, likelihood_sum};
use crate::posterior::{normalize, range_probability, replication_interval, RangeSpec};
use crate::replication::{ir_index, ReplicationAssessment};
use crate::simulate::{
    significance_boundary, simulate_calibration, simulate_threshold_instability, SimulationConfig,
};
use crate::studies::read_studies;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "replicalc",
    version,
    about = "Frequentist posterior probabilities, P-value comparison and replication probabilities"
)]
struct Cli {
    /// Output format (default: json, or csv for `figure`)
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write output to this file instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Posterior distribution of one observation
    Posterior(PosteriorArgs),
    /// P-values next to the posterior tail beyond a null
    Compare(CompareArgs),
    /// Pool the studies in a file and summarise the combined posterior
    Combine(CombineArgs),
    /// Idealistic and realistic probabilities of replication
    Replicate(ReplicateArgs),
    /// Equal-tail posterior interval
    Interval(IntervalArgs),
    /// Monte Carlo calibration and threshold instability
    Simulate(SimulateArgs),
    /// Data behind a comparison figure
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
struct ObservationArgs {
    /// Observed successes r
    #[arg(long)]
    successes: u64,
    /// Number of trials n
    #[arg(long)]
    trials: u64,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Number of grid points, including 0 and 1
    #[arg(long, default_value_t = 10001)]
    grid: usize,
}

#[derive(Debug, Args)]
struct RangeArgs {
    /// Range of parameter values as lower:upper (closed below, open above)
    #[arg(long, value_name = "LOWER:UPPER")]
    range: Option<String>,
    /// Exclude the lower bound from the range
    #[arg(long)]
    range_open_lower: bool,
    /// Include the upper bound in the range
    #[arg(long, conflicts_with = "range_open_upper")]
    range_closed_upper: bool,
    /// Exclude the upper bound from the range (the default)
    #[arg(long)]
    range_open_upper: bool,
}

#[derive(Debug, Args)]
struct SummaryArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    range: RangeArgs,
    /// Report likelihood and posterior mass at these grid values
    #[arg(long, value_delimiter = ',')]
    at: Vec<f64>,
}

#[derive(Debug, Args)]
struct PosteriorArgs {
    #[command(flatten)]
    obs: ObservationArgs,
    #[command(flatten)]
    summary: SummaryArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DirectionArg {
    AtOrAbove,
    AtOrBelow,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::AtOrAbove => Direction::AtOrAbove,
            DirectionArg::AtOrBelow => Direction::AtOrBelow,
        }
    }
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    obs: ObservationArgs,
    /// Null hypothesis proportion
    #[arg(long)]
    null: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Side of the observation the P-value covers
    #[arg(long, value_enum, default_value = "at-or-above")]
    direction: DirectionArg,
}

#[derive(Debug, Args)]
struct CombineArgs {
    /// File of label,successes,trials lines
    #[arg(long, value_name = "PATH")]
    studies: PathBuf,
    #[command(flatten)]
    summary: SummaryArgs,
}

#[derive(Debug, Args)]
struct ReplicateArgs {
    /// Idealistic probability of replication, if already known
    #[arg(long, conflicts_with_all = ["successes", "trials"])]
    idealistic: Option<f64>,
    /// Observed successes, to derive the idealistic probability
    #[arg(long, requires = "trials")]
    successes: Option<u64>,
    /// Number of trials, to derive the idealistic probability
    #[arg(long, requires = "successes")]
    trials: Option<u64>,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    range: RangeArgs,
    /// Use the equal-tail interval with this posterior mass as the range
    #[arg(long, conflicts_with = "range")]
    mass: Option<f64>,
    /// Probability that the study is perfectly reproducible
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Observed realistic probability, to report its I/R index
    #[arg(long)]
    realistic: Option<f64>,
}

#[derive(Debug, Args)]
struct IntervalArgs {
    #[command(flatten)]
    obs: ObservationArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Posterior mass inside the interval
    #[arg(long, default_value_t = 0.95)]
    mass: f64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
    /// Selections per simulated study
    #[arg(long, default_value_t = 99)]
    trials_n: u64,
    /// Number of simulated studies
    #[arg(long, default_value_t = 1_000_000)]
    num_trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Null proportion for the threshold-instability run
    #[arg(long, requires = "significance_alpha")]
    significance_null: Option<f64>,
    /// Significance level for the threshold-instability run
    #[arg(long, requires = "significance_null")]
    significance_alpha: Option<f64>,
    /// True proportion for the threshold run (default: the located boundary)
    #[arg(long, requires = "significance_null")]
    true_p: Option<f64>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// fig2, fig3 or fig4
    #[arg(long)]
    id: String,
}

enum CliError {
    Usage(String),
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

fn usage(flag: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {detail}"))
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Rendered {
    json: Value,
    /// Tabular form for CSV; `None` renders the JSON scalars as one row.
    table: Option<(Vec<String>, Vec<Vec<f64>>)>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line with `argv` (including the program name).
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: format!("{}\n", text.lines().next().unwrap_or("usage error")),
                },
            };
        }
    };

    match execute(&cli) {
        Ok(text) => match &cli.out {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => Outcome {
                    code: EXIT_OK,
                    stdout: String::new(),
                    stderr: String::new(),
                },
                Err(e) => Outcome {
                    code: EXIT_COMPUTATION,
                    stdout: String::new(),
                    stderr: format!("error: {}: {e}\n", path.display()),
                },
            },
            None => Outcome {
                code: EXIT_OK,
                stdout: text,
                stderr: String::new(),
            },
        },
        Err(CliError::Usage(msg)) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(CliError::Compute(e)) => Outcome {
            code: EXIT_COMPUTATION,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn execute(cli: &Cli) -> CliResult<String> {
    let default_format = match cli.command {
        Command::Figure(_) => Format::Csv,
        _ => Format::Json,
    };
    let rendered = match &cli.command {
        Command::Posterior(a) => posterior_cmd(a)?,
        Command::Compare(a) => compare_cmd(a)?,
        Command::Combine(a) => combine_cmd(a)?,
        Command::Replicate(a) => replicate_cmd(a)?,
        Command::Interval(a) => interval_cmd(a)?,
        Command::Simulate(a) => simulate_cmd(a)?,
        Command::Figure(a) => figure_cmd(a)?,
    };
    Ok(match cli.format.unwrap_or(default_format) {
        Format::Json => {
            let mut s =
                serde_json::to_string_pretty(&rendered.json).expect("JSON values serialise");
            s.push('\n');
            s
        }
        Format::Csv => match rendered.table {
            Some((columns, rows)) => render_table(&columns, &rows),
            None => render_record(&rendered.json),
        },
    })
}

fn render_table(columns: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Flattens the JSON scalars (dotted keys) into a header row and one value row.
fn render_record(value: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, out);
                }
            }
            Value::Array(_) => {}
            Value::Null => out.push((prefix.to_string(), String::new())),
            Value::Number(n) => out.push((
                prefix.to_string(),
                n.as_f64()
                    .filter(|_| n.is_f64())
                    .map(format_float)
                    .unwrap_or_else(|| n.to_string()),
            )),
            Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
            Value::String(s) => out.push((prefix.to_string(), s.replace(',', ";"))),
        }
    }
    let mut fields = Vec::new();
    walk("", value, &mut fields);
    let (keys, values): (Vec<String>, Vec<String>) = fields.into_iter().unzip();
    format!("{}\n{}\n", keys.join(","), values.join(","))
}

fn observation(a: &ObservationArgs) -> CliResult<Observation> {
    Observation::new(a.successes, a.trials).map_err(|e| usage("--successes/--trials", e))
}

fn grid(points: usize) -> CliResult<ParameterGrid> {
    ParameterGrid::new(points).map_err(|e| usage("--grid", e))
}

fn parse_range(a: &RangeArgs) -> CliResult<Option<RangeSpec>> {
    let Some(text) = &a.range else {
        if a.range_open_lower || a.range_open_upper || a.range_closed_upper {
            return Err(usage("--range", "inclusivity flags need a --range"));
        }
        return Ok(None);
    };
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| usage("--range", format!("expected LOWER:UPPER, got {text:?}")))?;
    let bound = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| usage("--range", format!("malformed bound {s:?}")))
    };
    RangeSpec::new(
        bound(lo)?,
        bound(hi)?,
        !a.range_open_lower,
        a.range_closed_upper,
    )
    .map(Some)
    .map_err(|e| usage("--range", e))
}

fn range_json(r: &RangeSpec) -> Value {
    json!({
        "lower": r.lower(),
        "upper": r.upper(),
        "lower_inclusive": r.lower_inclusive(),
        "upper_inclusive": r.upper_inclusive(),
        "notation": r.to_string(),
    })
}

/// Posterior summary shared by `posterior` and `combine`.
fn summarise(obs: &Observation, args: &SummaryArgs) -> CliResult<Rendered> {
    let g = grid(args.grid.grid)?;
    let range = parse_range(&args.range)?;
    for p in &args.at {
        if g.index_of(*p).is_none() {
            return Err(usage(
                "--at",
                format!("{p} is not a point of the {}-point grid", g.points()),
            ));
        }
    }
    let likelihood = likelihood_curve(obs, &g);
    let posterior = normalize(&likelihood)?;
    let interval = replication_interval(&posterior, 0.95)?;

    let mut summary = json!({
        "likelihood_sum": likelihood_sum(&likelihood)?,
        "prior_per_point": g.prior_per_point(),
        "mode": posterior.mode(),
        "mean": posterior.mean(),
        "interval_95": range_json(&interval),
    });
    if let Some(r) = range {
        summary["range"] = range_json(&r);
        summary["probability"] = json!(range_probability(&posterior, &r)?);
    }
    if !args.at.is_empty() {
        summary["points"] = Value::Array(
            args.at
                .iter()
                .map(|p| {
                    json!({
                        "p": p,
                        "likelihood": likelihood.value_at(*p),
                        "posterior": posterior.value_at(*p),
                    })
                })
                .collect(),
        );
    }
    let table = curve_table(&likelihood, &posterior);
    Ok(Rendered {
        json: json!({ "summary": summary }),
        table: Some(table),
    })
}

fn curve_table(likelihood: &Curve, posterior: &Curve) -> (Vec<String>, Vec<Vec<f64>>) {
    let columns = vec!["p".into(), "likelihood".into(), "posterior".into()];
    let rows = likelihood
        .grid()
        .values()
        .zip(likelihood.values().iter().zip(posterior.values()))
        .map(|(p, (l, q))| vec![p, *l, *q])
        .collect();
    (columns, rows)
}

fn range_inputs(a: &RangeArgs) -> Value {
    json!({
        "range": a.range,
        "range_open_lower": a.range_open_lower,
        "range_closed_upper": a.range_closed_upper,
    })
}

fn posterior_cmd(a: &PosteriorArgs) -> CliResult<Rendered> {
    let obs = observation(&a.obs)?;
    let mut out = summarise(&obs, &a.summary)?;
    out.json["command"] = json!("posterior");
    out.json["inputs"] = json!({
        "successes": obs.successes(),
        "trials": obs.trials(),
        "grid": a.summary.grid.grid,
        "range": range_inputs(&a.summary.range),
        "at": a.summary.at,
    });
    Ok(out)
}

fn combine_cmd(a: &CombineArgs) -> CliResult<Rendered> {
    let studies = read_studies(&a.studies).map_err(|e| usage("--studies", e))?;
    let g = grid(a.summary.grid.grid)?;
    let pooled_curve = pool_studies(&studies, &g)?;
    let successes = studies.iter().map(|s| s.observation().successes()).sum();
    let trials = studies.iter().map(|s| s.observation().trials()).sum();
    let pooled = Observation::new(successes, trials).map_err(|e| usage("--studies", e))?;

    let mut out = summarise(&pooled, &a.summary)?;
    // report the sequentially pooled curve itself
    if let Some((_, rows)) = out.table.as_mut() {
        for (row, v) in rows.iter_mut().zip(pooled_curve.values()) {
            row[2] = *v;
        }
    }
    out.json["command"] = json!("combine");
    out.json["pooled"] = json!({ "successes": successes, "trials": trials });
    out.json["inputs"] = json!({
        "studies": studies
            .iter()
            .map(|s| json!({
                "label": s.label(),
                "successes": s.observation().successes(),
                "trials": s.observation().trials(),
            }))
            .collect::<Vec<_>>(),
        "grid": a.summary.grid.grid,
        "range": range_inputs(&a.summary.range),
        "at": a.summary.at,
    });
    Ok(out)
}

fn compare_cmd(a: &CompareArgs) -> CliResult<Rendered> {
    let obs = observation(&a.obs)?;
    let g = grid(a.grid.grid)?;
    if !(0.0..=1.0).contains(&a.null) {
        return Err(usage(
            "--null",
            format!("must lie in [0, 1], got {}", a.null),
        ));
    }
    let direction = Direction::from(a.direction);
    let report = compare_p_and_posterior(&obs, a.null, &g, direction)?;
    let two_sided = (2.0 * report.p_value_gaussian).min(1.0);
    Ok(Rendered {
        json: json!({
            "command": "compare",
            "inputs": {
                "successes": obs.successes(),
                "trials": obs.trials(),
                "null": a.null,
                "grid": a.grid.grid,
                "direction": direction,
            },
            "report": report,
            "two_sided_p_value_gaussian": two_sided,
            "two_sided_note": "twice the one-sided Gaussian P-value, capped at 1",
        }),
        table: None,
    })
}

fn replicate_cmd(a: &ReplicateArgs) -> CliResult<Rendered> {
    let mut detail = serde_json::Map::new();
    let idealistic = match (a.idealistic, a.successes, a.trials) {
        (Some(v), _, _) => {
            if a.range.range.is_some() || a.mass.is_some() {
                return Err(usage(
                    "--idealistic",
                    "cannot be combined with --range or --mass",
                ));
            }
            v
        }
        (None, Some(r), Some(n)) => {
            let obs = Observation::new(r, n).map_err(|e| usage("--successes/--trials", e))?;
            let g = grid(a.grid.grid)?;
            let posterior = normalize(&likelihood_curve(&obs, &g))?;
            let range = match (parse_range(&a.range)?, a.mass) {
                (Some(r), None) => r,
                (None, Some(mass)) => {
                    replication_interval(&posterior, mass).map_err(|e| usage("--mass", e))?
                }
                _ => return Err(usage("--range", "give either --range or --mass")),
            };
            detail.insert("range".into(), range_json(&range));
            range_probability(&posterior, &range)?
        }
        _ => {
            return Err(usage(
                "--idealistic",
                "give --idealistic, or --successes and --trials with --range or --mass",
            ))
        }
    };
    let assessment =
        ReplicationAssessment::new(idealistic, a.q).map_err(|e| usage("--idealistic/--q", e))?;
    let mut json = json!({
        "command": "replicate",
        "inputs": {
            "idealistic": a.idealistic,
            "successes": a.successes,
            "trials": a.trials,
            "grid": a.grid.grid,
            "range": range_inputs(&a.range),
            "mass": a.mass,
            "q": a.q,
            "realistic": a.realistic,
        },
        "assessment": assessment,
    });
    if let Some(realistic) = a.realistic {
        json["ir_index_realistic"] =
            json!(ir_index(realistic, idealistic).map_err(|e| usage("--realistic", e))?);
    }
    for (k, v) in detail {
        json[k] = v;
    }
    Ok(Rendered { json, table: None })
}

fn interval_cmd(a: &IntervalArgs) -> CliResult<Rendered> {
    let obs = observation(&a.obs)?;
    let g = grid(a.grid.grid)?;
    let posterior = normalize(&likelihood_curve(&obs, &g))?;
    let interval = replication_interval(&posterior, a.mass).map_err(|e| usage("--mass", e))?;
    let below = range_probability(
        &posterior,
        &RangeSpec::new(0.0, interval.lower(), true, false)?,
    )?;
    let above = range_probability(
        &posterior,
        &RangeSpec::new(interval.upper(), 1.0, false, true)?,
    )?;
    Ok(Rendered {
        json: json!({
            "command": "interval",
            "inputs": {
                "successes": obs.successes(),
                "trials": obs.trials(),
                "grid": a.grid.grid,
                "mass": a.mass,
            },
            "interval": range_json(&interval),
            "coverage": range_probability(&posterior, &interval)?,
            "mass_below": below,
            "mass_above": above,
        }),
        table: None,
    })
}

fn simulate_cmd(a: &SimulateArgs) -> CliResult<Rendered> {
    let config = SimulationConfig {
        grid_points: a.grid_points,
        trials_n: a.trials_n,
        num_trials: a.num_trials,
        seed: a.seed,
        significance_null: a.significance_null,
        significance_alpha: a.significance_alpha,
    };
    config.validate().map_err(|e| usage("simulate", e))?;
    let report = simulate_calibration(&config)?;

    let cells: Vec<Value> = report
        .cells
        .iter()
        .map(|c| {
            json!({
                "successes": c.successes,
                "samples": c.samples,
                "included": c.included,
                "max_abs_deviation": c.max_abs_deviation,
            })
        })
        .collect();
    let table_rows = report
        .cells
        .iter()
        .map(|c| {
            vec![
                c.successes as f64,
                c.samples as f64,
                f64::from(u8::from(c.included)),
                c.max_abs_deviation,
            ]
        })
        .collect();

    let mut json = json!({
        "command": "simulate",
        "inputs": config,
        "calibration": {
            "max_abs_deviation": report.max_abs_deviation,
            "cells": cells,
            "outcome_counts": report.outcome_counts,
        },
    });

    if let (Some(null), Some(alpha)) = (a.significance_null, a.significance_alpha) {
        let boundary = significance_boundary(a.trials_n, null, alpha)?;
        let true_p = a.true_p.unwrap_or(boundary.boundary_p);
        let fraction =
            simulate_threshold_instability(true_p, a.trials_n, null, alpha, a.num_trials, a.seed)?;
        json["threshold"] = json!({
            "critical_successes": boundary.critical_successes,
            "boundary_p": boundary.boundary_p,
            "true_p": true_p,
            "non_significant_fraction": fraction,
        });
    }

    Ok(Rendered {
        json,
        table: Some((
            vec![
                "successes".into(),
                "samples".into(),
                "included".into(),
                "max_abs_deviation".into(),
            ],
            table_rows,
        )),
    })
}

fn figure_cmd(a: &FigureArgs) -> CliResult<Rendered> {
    let id: FigureId = a.id.parse().map_err(|e| usage("--id", e))?;
    let dataset = build_figure(id)?;
    Ok(Rendered {
        json: serde_json::to_value(&dataset).expect("figure datasets serialise"),
        table: Some((dataset.columns, dataset.rows)),
    })
}
