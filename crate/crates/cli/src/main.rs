//! `otkit` command-line front end.

mod record;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use otkit::instance::{
    format_instance, random_explicit_instance, read_instance, synthetic_instance, write_instance, SyntheticKind,
};
use otkit::ipm::{solve_observed, Solution};
use otkit::linsolve::OrderingPolicy;
use otkit::oracle::{reference_solve, rwe, ORACLE_MAX_VARS};
use otkit::{Metric, OtError, OtInstance, SolveStatus, SolverConfig};

use record::RunRecord;

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_ITERATION_LIMIT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_USAGE: u8 = 64;

const RWE_PASS: f64 = 1e-5;

#[derive(Parser)]
#[command(name = "otkit", version, about = "Sparse interior-point solver for discrete optimal transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic instance (OTIMG for image kinds, OTLP for random-explicit).
    Generate(GenerateArgs),
    /// Solve an instance file and append a run record.
    Solve(SolveArgs),
    /// Solve an instance and compare against the transportation-simplex reference.
    Verify(VerifyArgs),
    /// Solve a sweep of synthetic instances, in parallel unless --serial.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    UniformRandom,
    GaussianBlob,
    ShiftedGaussian,
    TwoBlobs,
    Checkerboard,
    RandomExplicit,
}

impl KindArg {
    fn synthetic(self) -> Option<SyntheticKind> {
        match self {
            KindArg::UniformRandom => Some(SyntheticKind::UniformRandom),
            KindArg::GaussianBlob => Some(SyntheticKind::GaussianBlob),
            KindArg::ShiftedGaussian => Some(SyntheticKind::ShiftedGaussian),
            KindArg::TwoBlobs => Some(SyntheticKind::TwoBlobs),
            KindArg::Checkerboard => Some(SyntheticKind::Checkerboard),
            KindArg::RandomExplicit => None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    L1,
    L2,
    Linf,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::L1 => Metric::L1,
            MetricArg::L2 => Metric::L2,
            MetricArg::Linf => Metric::Linf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderingArg {
    Natural,
    MinimumDegree,
    Mcs,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Grid side length (image kinds); also m = n for random-explicit.
    #[arg(long)]
    res: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "l2")]
    metric: MetricArg,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Stopping tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_ipm_iters: usize,
    /// Initial support size as a multiple of m+n-1.
    #[arg(long, default_value_t = 5.0)]
    support_multiplier: f64,
    /// Fill-reducing ordering for the direct phase.
    #[arg(long, value_enum, default_value = "minimum-degree")]
    ordering: OrderingArg,
    /// Single worker thread, for bit-reproducible runs.
    #[arg(long)]
    serial: bool,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_ipm_iters: self.max_ipm_iters,
            support_multiplier: self.support_multiplier,
            ordering: match self.ordering {
                OrderingArg::Natural => OrderingPolicy::Natural,
                OrderingArg::MinimumDegree => OrderingPolicy::MinimumDegree,
                OrderingArg::Mcs => OrderingPolicy::MaximumCardinality,
            },
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Override the metric of a grid instance.
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Append the run record to this CSV file instead of printing it.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the per-iteration log to stderr.
    #[arg(long)]
    telemetry: bool,
    /// Write each iteration's Schur complement as Matrix Market into this directory.
    #[arg(long)]
    dump_schur: Option<PathBuf>,
    /// Identifier for the run record; defaults to the file stem.
    #[arg(long)]
    id: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct BenchArgs {
    /// Image kinds, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gaussian-blob")]
    kinds: Vec<KindArg>,
    /// Grid resolutions, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8,16")]
    res: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "l2")]
    metrics: Vec<MetricArg>,
    /// Seeds 0..seeds are solved for every combination.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[command(flatten)]
    solver: SolverFlags,
    /// Also compute RWE against the reference where the instance is small enough.
    #[arg(long)]
    rwe: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, msg: msg.into() }
    }
}

impl From<OtError> for Failure {
    fn from(e: OtError) -> Self {
        let code = match e {
            OtError::Parameter(_) | OtError::Dimension { .. } | OtError::Index { .. } => EXIT_USAGE,
            OtError::Numeric(_) | OtError::Resource(_) | OtError::Construction(_) => EXIT_NUMERICAL,
            OtError::Io(_) | OtError::Parse { .. } => EXIT_FAILURE,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_FAILURE, msg: e.to_string() }
    }
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::IterationLimit => EXIT_ITERATION_LIMIT,
        SolveStatus::NumericalFailure => EXIT_NUMERICAL,
    }
}

/// Worker count: 1 with `--serial`, else `OTKIT_THREADS` if set, else rayon's default.
fn thread_pool(serial: bool) -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if serial {
        builder = builder.num_threads(1);
    } else if let Ok(v) = std::env::var("OTKIT_THREADS") {
        let n: usize = v.parse().map_err(|_| Failure::usage(format!("OTKIT_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| Failure { code: EXIT_FAILURE, msg: e.to_string() })
}

fn load(path: &Path, metric: Option<MetricArg>) -> Result<OtInstance, Failure> {
    let inst = read_instance(path)?;
    Ok(match metric {
        Some(m) => inst.with_metric(m.into()),
        None => inst,
    })
}

fn metric_name(inst: &OtInstance) -> String {
    inst.metric().map(|m| m.name().to_string()).unwrap_or_else(|| "explicit".to_string())
}

fn cmd_generate(args: GenerateArgs) -> Result<u8, Failure> {
    let inst = match args.kind.synthetic() {
        Some(kind) => synthetic_instance(args.res, kind, args.metric.into(), args.seed)?,
        None => random_explicit_instance(args.res, args.res, args.seed)?,
    };
    match args.out {
        Some(path) => write_instance(&inst, &path)?,
        None => print!("{}", format_instance(&inst)),
    }
    Ok(EXIT_OK)
}

fn run_solve(inst: &OtInstance, cfg: &SolverConfig, dump_dir: Option<&Path>) -> Result<Solution, Failure> {
    let mut dump_error = None;
    let sol = solve_observed(inst, cfg, |view| {
        let Some(dir) = dump_dir else { return };
        if dump_error.is_some() {
            return;
        }
        let written = view
            .system
            .assemble_sparse(0.0, cfg.nnz_cap)
            .map_err(Failure::from)
            .and_then(|s| {
                let file = fs::File::create(dir.join(format!("schur_{:04}.mtx", view.iter)))?;
                s.write_matrix_market(std::io::BufWriter::new(file))?;
                Ok(())
            });
        if let Err(e) = written {
            dump_error = Some(e);
        }
    })?;
    match dump_error {
        Some(e) => Err(e),
        None => Ok(sol),
    }
}

fn print_telemetry(sol: &Solution) {
    eprintln!("iter mode      support        mu     sigma   primal     dual  cg  +in -out  fill%");
    for t in &sol.report.telemetry {
        eprintln!(
            "{:4} {:<9} {:7} {:9.2e} {:5.2} {:8.1e} {:8.1e} {:4} {:3} {:4} {:6.2}",
            t.iter,
            format!("{:?}", t.mode),
            t.support,
            t.mu,
            t.sigma,
            t.primal_res,
            t.dual_res,
            t.cg_iters,
            t.entered,
            t.removed,
            t.fill_pct
        );
    }
    let r = &sol.report;
    eprintln!("iter_phase {} dir_phase {} status {}", r.iterative_phase_iters, r.direct_phase_iters, r.status);
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let inst = load(&args.instance, args.metric)?;
    let cfg = args.solver.config();
    cfg.validate()?;
    if let Some(dir) = &args.dump_schur {
        fs::create_dir_all(dir)?;
    }
    let pool = thread_pool(args.solver.serial)?;
    let start = Instant::now();
    let sol = pool.install(|| run_solve(&inst, &cfg, args.dump_schur.as_deref()))?;
    let wall_ms = start.elapsed().as_millis();
    if args.telemetry {
        print_telemetry(&sol);
    }
    let id = args
        .id
        .unwrap_or_else(|| args.instance.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    let row = RunRecord::from_report(id, inst.m(), inst.n(), metric_name(&inst), &sol.report, wall_ms);
    record::append(args.csv.as_deref(), &[row])?;
    Ok(status_code(sol.report.status))
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    let inst = load(&args.instance, args.metric)?;
    if inst.m() * inst.n() > ORACLE_MAX_VARS {
        return Err(Failure::usage(format!(
            "instance has {} variables; the reference solver accepts at most {ORACLE_MAX_VARS}, try a smaller instance",
            inst.m() * inst.n()
        )));
    }
    let cfg = args.solver.config();
    cfg.validate()?;
    let pool = thread_pool(args.solver.serial)?;
    let sol = pool.install(|| run_solve(&inst, &cfg, None))?;
    let reference = reference_solve(&inst)?;
    let err = rwe(&sol.report, &reference, sol.report.q);
    println!("status {}", sol.report.status);
    println!("solver objective {:.12e}", sol.report.objective);
    println!("oracle objective {:.12e}", reference.objective);
    println!("rwe {:.6e}{}", err.value, if err.absolute { " (absolute)" } else { "" });
    if sol.report.status != SolveStatus::Optimal {
        return Ok(status_code(sol.report.status));
    }
    Ok(if err.value <= RWE_PASS { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_bench(args: BenchArgs) -> Result<u8, Failure> {
    let cfg = args.solver.config();
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &kind in &args.kinds {
        for &res in &args.res {
            for &metric in &args.metrics {
                for seed in 0..args.seeds {
                    jobs.push((kind, res, metric, seed));
                }
            }
        }
    }
    let pool = thread_pool(args.solver.serial)?;
    // each worker runs its solve single-threaded; results are written in job order
    let rows: Vec<Result<RunRecord, Failure>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(kind, res, metric, seed)| {
                let inst = match kind.synthetic() {
                    Some(k) => synthetic_instance(res, k, metric.into(), seed)?,
                    None => random_explicit_instance(res, res, seed)?.with_metric(metric.into()),
                };
                let name = kind.synthetic().map(|k| k.name()).unwrap_or("random-explicit");
                let id = format!("{name}-{res}-{}-{seed}", metric_name(&inst));
                let start = Instant::now();
                let mut sol = run_solve(&inst, &cfg, None)?;
                let wall_ms = start.elapsed().as_millis();
                if args.rwe && inst.m() * inst.n() <= ORACLE_MAX_VARS {
                    let reference = reference_solve(&inst)?;
                    sol.report.rwe_vs_reference = Some(rwe(&sol.report, &reference, sol.report.q).value);
                }
                Ok(RunRecord::from_report(id, inst.m(), inst.n(), metric_name(&inst), &sol.report, wall_ms))
            })
            .collect()
    });
    let rows: Vec<RunRecord> = rows.into_iter().collect::<Result<_, _>>()?;
    record::append(args.csv.as_deref(), &rows)?;
    let worst = rows
        .iter()
        .map(|r| match r.status.as_str() {
            "optimal" => EXIT_OK,
            "iteration-limit" => EXIT_ITERATION_LIMIT,
            _ => EXIT_NUMERICAL,
        })
        .max()
        .unwrap_or(EXIT_OK);
    Ok(worst)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("otkit: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
