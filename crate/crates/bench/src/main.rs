use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use hytucker::analysis::{phi_probability, randomized_error_bound, BoundParams, ModeSpectra};
use hytucker::{DenseTensor, SketchConfig};
use hytucker_bench::generators::{generate_function_tensor, FunctionKind};
use hytucker_bench::harness::{
    self, run_cell, seed_range, summarize_sweep, BoundSettings, Figure1Config, Table1Config,
    DEFAULT_SEED,
};
use hytucker_bench::io::{parse_dims, read_tensor, write_model, write_tensor};
use hytucker_bench::record::{write_csv, BenchRecord, Method, TensorKind};

#[derive(Debug, Parser)]
#[command(
    name = "hytucker",
    version,
    about = "Hybrid CUR-type Tucker decompositions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a function tensor to a TNSR file.
    Generate {
        #[arg(long)]
        kind: FunctionKind,
        #[arg(long)]
        shape: Dims,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompose one tensor and print a CSV record.
    Decompose(DecomposeArgs),
    /// Run an experiment sweep and print CSV records.
    #[command(subcommand)]
    Bench(Bench),
    /// Evaluate the probabilistic error bound for the randomized hybrid.
    Bound(BoundArgs),
}

#[derive(Debug, Subcommand)]
enum Bench {
    /// Size scaling of the deterministic and randomized hybrid methods.
    Table1(Table1Args),
    /// Rank sweep r = 1..=r_max on a fixed shape.
    Figure1(Figure1Args),
}

/// A tensor either read from disk or generated on the fly.
#[derive(Debug, Args)]
struct Source {
    /// TNSR input file (instead of --kind/--shape).
    #[arg(long = "in", conflicts_with_all = ["kind", "shape"])]
    input: Option<PathBuf>,
    /// Function tensor to generate: A or B.
    #[arg(long, requires = "shape")]
    kind: Option<FunctionKind>,
    /// Extents of the generated tensor, e.g. `50x50x50`.
    #[arg(long, requires = "kind")]
    shape: Option<Dims>,
}

impl Source {
    fn load(&self) -> anyhow::Result<(DenseTensor, TensorKind)> {
        match (&self.input, self.kind, &self.shape) {
            (Some(path), _, _) => Ok((read_tensor(path)?, TensorKind::File)),
            (None, Some(kind), Some(shape)) => Ok((
                generate_function_tensor(kind, &shape.0)?,
                TensorKind::Function(kind),
            )),
            _ => bail!("need either --in FILE or --kind and --shape"),
        }
    }
}

#[derive(Debug, Args)]
struct Constants {
    #[arg(long, default_value_t = 0.75)]
    beta: f64,
    /// γ² in the bound's probability and coefficients.
    #[arg(long, default_value_t = 5.0)]
    gamma2: f64,
}

impl Constants {
    fn settings(&self) -> anyhow::Result<BoundSettings> {
        if self.gamma2.is_nan() || self.gamma2 <= 1.0 {
            bail!("--gamma2 must exceed 1 (got {})", self.gamma2);
        }
        Ok(BoundSettings {
            beta: self.beta,
            gamma: self.gamma2.sqrt(),
        })
    }
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[command(flatten)]
    source: Source,
    /// hosvd, hoid, hybrid or rhybrid.
    #[arg(long, default_value = "rhybrid")]
    method: Method,
    /// Target ranks: one value for every mode, or `r1xr2x…`.
    #[arg(long)]
    ranks: Dims,
    #[arg(long, default_value_t = 1)]
    t: usize,
    #[arg(long, default_value_t = 5)]
    p: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Attach the error bound to the record (randomized method only).
    #[arg(long)]
    bound: bool,
    #[command(flatten)]
    constants: Constants,
    /// Directory to store the fitted model in.
    #[arg(long)]
    save_model: Option<PathBuf>,
    /// CSV destination (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Table1Args {
    /// Comma-separated cube edge lengths.
    #[arg(long, value_delimiter = ',', default_value = "50,100,150")]
    sizes: Vec<usize>,
    #[arg(long, default_value = "5x5x5")]
    ranks: Dims,
    #[arg(long, default_value_t = 1)]
    t: usize,
    #[arg(long, default_value_t = 5)]
    p: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of randomized draws per cell, with seeds seed, seed+1, …
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    #[arg(long)]
    bound: bool,
    #[command(flatten)]
    constants: Constants,
    /// Spread cells over threads (timings become indicative only).
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Figure1Args {
    #[arg(long, default_value_t = 10)]
    r_max: usize,
    #[arg(long, default_value = "50x50x50")]
    shape: Dims,
    #[arg(long, default_value_t = 2)]
    t: usize,
    #[arg(long, default_value_t = 5)]
    p: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print per-rank means to stderr.
    #[arg(long)]
    summary: bool,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    ranks: Dims,
    #[arg(long, default_value_t = 1)]
    t: usize,
    #[arg(long, default_value_t = 5)]
    p: usize,
    #[command(flatten)]
    constants: Constants,
}

/// `x`-joined extents, e.g. `50x50x50` or a single `5`.
#[derive(Debug, Clone)]
struct Dims(Vec<usize>);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_dims(s).map(Dims)
    }
}

/// Expands a single rank to every mode.
fn expand_ranks(ranks: &[usize], order: usize) -> anyhow::Result<Vec<usize>> {
    match ranks.len() {
        1 => Ok(vec![ranks[0]; order]),
        n if n == order => Ok(ranks.to_vec()),
        n => bail!("{n} ranks given for an order-{order} tensor"),
    }
}

fn emit(records: &[BenchRecord], out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => hytucker_bench::record::emit_csv(records, path)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(records, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn decompose(args: &DecomposeArgs) -> anyhow::Result<()> {
    let (tensor, kind) = args.source.load()?;
    let ranks = expand_ranks(&args.ranks.0, tensor.order())?;
    let config = SketchConfig::new(ranks, args.t, args.p, args.seed);
    let spectra = if args.bound {
        Some(ModeSpectra::of(&tensor)?)
    } else {
        None
    };
    let settings = args.constants.settings()?;
    let record = run_cell(
        &tensor,
        kind,
        args.method,
        &config,
        spectra.as_ref().map(|s| (s, settings)),
    )?;
    if let Some(dir) = &args.save_model {
        let model = harness::decompose(&tensor, args.method, &config)?;
        write_model(dir, &model).with_context(|| format!("saving model to {}", dir.display()))?;
    }
    emit(&[record], args.out.as_deref())
}

fn bound(args: &BoundArgs) -> anyhow::Result<()> {
    let (tensor, _) = args.source.load()?;
    let ranks = expand_ranks(&args.ranks.0, tensor.order())?;
    let settings = args.constants.settings()?;
    let params = BoundParams {
        beta: settings.beta,
        gamma: settings.gamma,
        oversampling: args.p,
        shape: tensor.shape().to_vec(),
        ranks,
        fiber_modes: args.t,
    };
    let spectra = ModeSpectra::of(&tensor)?;
    let value = randomized_error_bound(&spectra, &params)?;
    let phi = phi_probability(args.p, params.min_extent(), settings.beta, settings.gamma)?;
    let norm = hytucker::frobenius_norm(&tensor);
    println!("bound_sq_error={value:e}");
    println!("bound_rel_error={:e}", value.sqrt() / norm);
    println!("probability={phi:e}");
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate { kind, shape, out } => {
            let t = generate_function_tensor(kind, &shape.0)?;
            write_tensor(&out, &t)?;
        }
        Command::Decompose(args) => decompose(&args)?,
        Command::Bench(Bench::Table1(args)) => {
            let bound = if args.bound {
                Some(args.constants.settings()?)
            } else {
                None
            };
            let cfg = Table1Config {
                sizes: args.sizes,
                ranks: expand_ranks(&args.ranks.0, 3)?,
                p: args.p,
                t: args.t,
                seeds: seed_range(args.seed, args.seeds.max(1)),
                bound,
                parallel: args.parallel,
            };
            emit(&harness::run_table1(&cfg)?, args.out.as_deref())?;
        }
        Command::Bench(Bench::Figure1(args)) => {
            let cfg = Figure1Config {
                r_max: args.r_max,
                p: args.p,
                t: args.t,
                shape: args.shape.0,
                seeds: seed_range(args.seed, args.seeds.max(1)),
                parallel: args.parallel,
            };
            let records = harness::run_figure1(&cfg)?;
            if args.summary {
                for pt in summarize_sweep(&records) {
                    eprintln!(
                        "r={} kind={} hybrid={:e} rhybrid_mean={:e} ratio={:.3}",
                        pt.rank,
                        pt.kind,
                        pt.hybrid,
                        pt.rhybrid_mean,
                        pt.rhybrid_mean / pt.hybrid
                    );
                }
            }
            emit(&records, args.out.as_deref())?;
        }
        Command::Bound(args) => bound(&args)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with success; usage errors are
            // collapsed to a single line.
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let line = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", line.trim_start_matches("error: ").trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
