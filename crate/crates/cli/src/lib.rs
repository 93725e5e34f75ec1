//! Command-line driver: instance generation, exact and approximate counting,
//! benchmark sweeps and structure dumps.

use std::fmt::Write as _;
use std::io::Read;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use inversions::cells::{build_cells, LevelSummary, Outcome};
use inversions::counting::{
    count_adaptive, count_adaptive_ram, count_capped, count_nonadaptive, CappedOutcome, RAM_PARAMS,
};
use inversions::cuttings::{build_blue_cutting, build_red_cutting};
use inversions::dominance::{
    brute_force_count, mergesort_count, reduce_inversions, InputError, ValueList,
};
use inversions::instance::{generate, GenerateError, InstanceSpec, Shape};
use inversions::iomodel::{EmParams, IoError, IoTally};
use inversions::{estimate_inversions, Estimate};

/// Largest input the brute-force oracle is used on.
pub const ORACLE_LIMIT: usize = 2000;

#[derive(Debug, Parser)]
#[command(
    name = "invcount",
    version,
    about = "Adaptive and approximate inversion counting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print an instance, one value per line.
    Generate(InstanceArgs),
    /// Count inversions exactly.
    Count(CountArgs),
    /// Estimate the inversion count.
    Estimate(EstimateArgs),
    /// Sweep a grid of (N, K*, seed) and print one CSV row per run.
    Bench(BenchArgs),
    /// Dump a shallow cutting of the instance's red points.
    Cutting(CuttingArgs),
    /// Dump the red-blue cells of the instance for a cap.
    Cells(CellsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeArg {
    Sorted,
    Reverse,
    RandomPermutation,
    RandomReal,
    TargetInversions,
    Duplicates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alg {
    Brute,
    Mergesort,
    Nonadaptive,
    Capped,
    Adaptive,
    AdaptiveRam,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Read values from FILE, one per line ("-" for stdin) instead of generating.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = ShapeArg::RandomPermutation)]
    pub shape: ShapeArg,
    /// Inversion count for --shape target-inversions.
    #[arg(long, default_value_t = 0)]
    pub k: u64,
    /// Fraction of copied values for --shape duplicates.
    #[arg(long, default_value_t = 0.3)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct MachineArgs {
    /// Memory size M in words.
    #[arg(long, default_value_t = 1024)]
    pub mem: u64,
    /// Block size B in words.
    #[arg(long, default_value_t = 32)]
    pub block: u64,
}

#[derive(Debug, Clone, Args)]
pub struct CountArgs {
    #[arg(long, value_enum, default_value_t = Alg::Adaptive)]
    pub alg: Alg,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub machine: MachineArgs,
    /// Cap K for --alg capped.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Check the count against an oracle.
    #[arg(long)]
    pub verify: bool,
    /// Include wall-clock time in the report.
    #[arg(long)]
    pub timing: bool,
    /// Single-line JSON report (the default).
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Seed of the estimator; defaults to --seed.
    #[arg(long)]
    pub sample_seed: Option<u64>,
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Alg::Adaptive)]
    pub alg: Alg,
    /// Comma-separated list of lengths.
    #[arg(long, value_delimiter = ',', default_value = "4096")]
    pub n: Vec<usize>,
    /// Comma-separated target inversion counts; when absent, --shape is used.
    #[arg(long, value_delimiter = ',')]
    pub kstar: Vec<u64>,
    #[arg(long, value_enum, default_value_t = ShapeArg::RandomPermutation)]
    pub shape: ShapeArg,
    #[arg(long, default_value_t = 0.3)]
    pub fraction: f64,
    #[command(flatten)]
    pub machine: MachineArgs,
    #[arg(long)]
    pub cap: Option<u64>,
    /// Seeds 0..SEEDS per grid point.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long)]
    pub timing: bool,
    /// CSV output (the default).
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CuttingArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Shallowness parameter k.
    #[arg(long = "param", default_value_t = 16)]
    pub param: usize,
    /// Build on the blue points with the reversed orientation.
    #[arg(long)]
    pub blue: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CellsArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub machine: MachineArgs,
    #[arg(long)]
    pub cap: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read input: {0}")]
    Read(#[from] std::io::Error),
    #[error("verification failed: {alg:?} reported {got}, oracle {want}")]
    Mismatch { alg: Alg, got: u64, want: u64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse { .. } | CliError::Read(_) => 3,
            CliError::Mismatch { .. } => 1,
        }
    }
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceInfo {
    pub source: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<Shape>,
    pub seed: u64,
    /// SHA-256 of the values as little-endian IEEE-754 doubles.
    pub digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IoReport {
    pub mem: u64,
    pub block: u64,
    pub io_reads: u64,
    pub io_writes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub command: &'static str,
    pub alg: Alg,
    pub instance: InstanceInfo,
    /// `null` when a capped run reports failure.
    pub count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<CappedOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub io: Option<IoReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caps: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ns: Option<u128>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub command: &'static str,
    pub instance: InstanceInfo,
    #[serde(flatten)]
    pub estimate: Estimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ns: Option<u128>,
}

/// One counting run, as used by `count` and by every `bench` row.
#[derive(Debug, Clone)]
pub struct Run {
    pub count: Option<u64>,
    pub outcome: Option<CappedOutcome>,
    pub io: Option<IoReport>,
    pub rounds: Option<u32>,
    pub caps: Option<Vec<u64>>,
    pub wall_ns: u128,
}

pub fn digest(list: &ValueList) -> String {
    let mut h = Sha256::new();
    for v in list.values() {
        h.update(v.to_le_bytes());
    }
    h.finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn shape_of(arg: ShapeArg, k: u64, fraction: f64) -> Shape {
    match arg {
        ShapeArg::Sorted => Shape::Sorted,
        ShapeArg::Reverse => Shape::Reverse,
        ShapeArg::RandomPermutation => Shape::RandomPermutation,
        ShapeArg::RandomReal => Shape::RandomReal,
        ShapeArg::TargetInversions => Shape::TargetInversions(k),
        ShapeArg::Duplicates => Shape::Duplicates(fraction),
    }
}

/// Parses one decimal value per line; blank lines are skipped.
pub fn parse_values(text: &str) -> Result<ValueList, CliError> {
    let mut values = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| CliError::Parse {
            line: i + 1,
            message: format!("not a number: {t:?}"),
        })?;
        values.push(v);
        lines.push(i + 1);
    }
    ValueList::new(values).map_err(|e| match e {
        InputError::NonFinite { index, value } => CliError::Parse {
            line: lines[index],
            message: format!("value {value} is not finite"),
        },
        other => CliError::Parse {
            line: lines.last().copied().unwrap_or(0),
            message: other.to_string(),
        },
    })
}

pub fn load_instance(args: &InstanceArgs) -> Result<(ValueList, InstanceInfo), CliError> {
    let (list, source, shape) = match &args.input {
        Some(path) => {
            let mut text = String::new();
            if path.as_os_str() == "-" {
                std::io::stdin().read_to_string(&mut text)?;
            } else {
                text = std::fs::read_to_string(path)?;
            }
            (parse_values(&text)?, path.display().to_string(), None)
        }
        None => {
            let shape = shape_of(args.shape, args.k, args.fraction);
            let spec = InstanceSpec {
                n: args.n,
                shape,
                seed: args.seed,
            };
            (generate(&spec)?, "generated".to_string(), Some(shape))
        }
    };
    let info = InstanceInfo {
        source,
        n: list.len(),
        shape,
        seed: args.seed,
        digest: digest(&list),
    };
    Ok((list, info))
}

fn machine(args: &MachineArgs) -> Result<EmParams, CliError> {
    Ok(EmParams::new(args.mem, args.block)?)
}

/// Runs one counting algorithm. `cap` is required for [`Alg::Capped`].
pub fn run_count(
    alg: Alg,
    list: &ValueList,
    params: EmParams,
    cap: Option<u64>,
) -> Result<Run, CliError> {
    let start = Instant::now();
    let (red, blue) = reduce_inversions(list);
    let tally = IoTally::new(params);
    let mut run = Run {
        count: None,
        outcome: None,
        io: None,
        rounds: None,
        caps: None,
        wall_ns: 0,
    };
    let external = matches!(alg, Alg::Nonadaptive | Alg::Capped | Alg::Adaptive);
    match alg {
        Alg::Brute => run.count = Some(brute_force_count(&red, &blue).count),
        Alg::Mergesort => run.count = Some(mergesort_count(list).count),
        Alg::Nonadaptive => run.count = Some(count_nonadaptive(&red, &blue, &tally)?.count),
        Alg::Capped => {
            let cap = cap.ok_or_else(|| CliError::Usage("--alg capped needs --cap".into()))?;
            if cap == 0 {
                return Err(CliError::Usage("--cap must be at least 1".into()));
            }
            let outcome = count_capped(&red, &blue, cap, &tally)?;
            run.count = outcome.exact();
            run.outcome = Some(outcome);
        }
        Alg::Adaptive => {
            let res = count_adaptive(&red, &blue, &tally)?;
            run.count = Some(res.count);
            run.rounds = Some(res.rounds);
            run.caps = Some(res.caps);
        }
        Alg::AdaptiveRam => {
            let res = count_adaptive_ram(&red, &blue);
            run.count = Some(res.count);
            run.rounds = Some(res.rounds);
            run.caps = Some(res.caps);
        }
    }
    if external {
        run.io = Some(IoReport {
            mem: params.mem(),
            block: params.block(),
            io_reads: tally.reads(),
            io_writes: tally.writes(),
        });
    }
    run.wall_ns = start.elapsed().as_nanos();
    Ok(run)
}

fn cmd_count(args: &CountArgs) -> Result<String, CliError> {
    let (list, instance) = load_instance(&args.instance)?;
    let params = machine(&args.machine)?;
    let run = run_count(args.alg, &list, params, args.cap)?;
    let verified = if args.verify {
        let want = if list.len() <= ORACLE_LIMIT {
            let (r, b) = reduce_inversions(&list);
            brute_force_count(&r, &b).count
        } else {
            mergesort_count(&list).count
        };
        match run.count {
            Some(got) if got != want => {
                return Err(CliError::Mismatch {
                    alg: args.alg,
                    got,
                    want,
                })
            }
            Some(_) => Some(true),
            // A capped failure is only legitimate above the cap.
            None if want > args.cap.unwrap_or(0) => Some(true),
            None => {
                return Err(CliError::Mismatch {
                    alg: args.alg,
                    got: 0,
                    want,
                })
            }
        }
    } else {
        None
    };
    let report = CountReport {
        command: "count",
        alg: args.alg,
        instance,
        count: run.count,
        cap: if args.alg == Alg::Capped {
            args.cap
        } else {
            None
        },
        outcome: run.outcome,
        io: run.io,
        rounds: run.rounds,
        caps: run.caps,
        verified,
        wall_ns: args.timing.then_some(run.wall_ns),
    };
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

fn cmd_estimate(args: &EstimateArgs) -> Result<String, CliError> {
    let (list, instance) = load_instance(&args.instance)?;
    let start = Instant::now();
    let estimate = estimate_inversions(&list, args.sample_seed.unwrap_or(args.instance.seed));
    let wall_ns = start.elapsed().as_nanos();
    let report = EstimateReport {
        command: "estimate",
        instance,
        estimate,
        wall_ns: args.timing.then_some(wall_ns),
    };
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

pub const BENCH_HEADER: &str = "n,mem,block,kstar,alg,seed,count,io_reads,io_writes,rounds,wall_ns";

fn cmd_bench(args: &BenchArgs) -> Result<String, CliError> {
    let params = machine(&args.machine)?;
    let mut grid = Vec::new();
    for &n in &args.n {
        let shapes: Vec<(Option<u64>, Shape)> = if args.kstar.is_empty() {
            vec![(None, shape_of(args.shape, 0, args.fraction))]
        } else {
            args.kstar
                .iter()
                .map(|&k| (Some(k), Shape::TargetInversions(k)))
                .collect()
        };
        for (kstar, shape) in shapes {
            for seed in 0..args.seeds {
                grid.push((n, kstar, shape, seed));
            }
        }
    }
    let rows: Vec<Result<String, CliError>> = grid
        .par_iter()
        .map(|&(n, kstar, shape, seed)| {
            let list = generate(&InstanceSpec { n, shape, seed })?;
            let run = run_count(args.alg, &list, params, args.cap)?;
            let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
            let io = run.io.as_ref();
            Ok(format!(
                "{n},{},{},{},{},{seed},{},{},{},{},{}",
                params.mem(),
                params.block(),
                opt(kstar),
                args.alg.to_possible_value().expect("named").get_name(),
                opt(run.count),
                opt(io.map(|i| i.io_reads)),
                opt(io.map(|i| i.io_writes)),
                opt(run.rounds.map(u64::from)),
                if args.timing { run.wall_ns } else { 0 },
            ))
        })
        .collect();
    let mut out = String::from(BENCH_HEADER);
    for row in rows {
        out.push('\n');
        out.push_str(&row?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct CuttingReport {
    command: &'static str,
    instance: InstanceInfo,
    orientation: &'static str,
    k: usize,
    corners: usize,
    cell_sizes: Vec<usize>,
}

fn cmd_cutting(args: &CuttingArgs) -> Result<String, CliError> {
    if args.param == 0 {
        return Err(CliError::Usage("--param must be at least 1".into()));
    }
    let (list, instance) = load_instance(&args.instance)?;
    let (red, blue) = reduce_inversions(&list);
    let tally = IoTally::new(RAM_PARAMS);
    let cutting = if args.blue {
        build_blue_cutting(&blue, args.param, &tally)
    } else {
        build_red_cutting(&red, args.param, &tally)
    };
    let report = CuttingReport {
        command: "cutting",
        instance,
        orientation: if args.blue { "blue" } else { "red" },
        k: args.param,
        corners: cutting.len(),
        cell_sizes: cutting.cell_sizes(),
    };
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

#[derive(Serialize)]
struct CellsReport {
    command: &'static str,
    instance: InstanceInfo,
    cap: u64,
    outcome: Outcome,
    cells: usize,
    sample_space: u64,
    levels: Vec<LevelSummary>,
    io: IoReport,
}

fn cmd_cells(args: &CellsArgs) -> Result<String, CliError> {
    if args.cap == 0 {
        return Err(CliError::Usage("--cap must be at least 1".into()));
    }
    let (list, instance) = load_instance(&args.instance)?;
    let params = machine(&args.machine)?;
    let (red, blue) = reduce_inversions(&list);
    let tally = IoTally::new(params);
    let cells = build_cells(&red, &blue, args.cap, &tally);
    let report = CellsReport {
        command: "cells",
        instance,
        cap: args.cap,
        outcome: cells.outcome,
        cells: cells.cells.len(),
        sample_space: cells.sample_space(),
        levels: cells.levels.clone(),
        io: IoReport {
            mem: params.mem(),
            block: params.block(),
            io_reads: tally.reads(),
            io_writes: tally.writes(),
        },
    };
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

fn cmd_generate(args: &InstanceArgs) -> Result<String, CliError> {
    let (list, _) = load_instance(args)?;
    Ok(list
        .values()
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join("\n"))
}

/// Executes a parsed command and returns its standard output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Count(a) => cmd_count(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Cutting(a) => cmd_cutting(a),
        Command::Cells(a) => cmd_cells(a),
    }
}
