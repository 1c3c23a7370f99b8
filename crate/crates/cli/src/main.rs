use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bregman_tda::circumball::SolverConfig;
use bregman_tda::complexes::{cech_radius_function_with, rips_radius_function_with, BuildConfig, BuildStats};
use bregman_tda::delaunay::delaunay_radius_function_with;
use bregman_tda::io::{diagram_to_json, encode_diagram, ingest, synth, to_csv, SCHEMA_VERSION};
use bregman_tda::persistence::{compute_persistence, order_filtration, FiltrationOrder};
use bregman_tda::{no_interleaving_demo, Error, GeneratorKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bregman-tda", version, about = "Radius filtrations and persistence under Bregman divergences")]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a filtration of a point cloud and compute its persistence diagram.
    Run(RunArgs),
    /// Tabulate pairwise and triple Kullback–Leibler radii of the three-point construction.
    DemoNoInterleaving(DemoArgs),
    /// Write seeded uniform samples from a box inside the divergence's domain.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Divergence {
    #[value(name = "sq_euclidean")]
    SqEuclidean,
    Kl,
    #[value(name = "itakura_saito")]
    ItakuraSaito,
    Exponential,
}

impl Divergence {
    fn kind(self) -> GeneratorKind {
        match self {
            Divergence::SqEuclidean => GeneratorKind::SqEuclideanHalf,
            Divergence::Kl => GeneratorKind::ShannonNegEntropy,
            Divergence::ItakuraSaito => GeneratorKind::BurgEntropy,
            Divergence::Exponential => GeneratorKind::Exponential,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Complex {
    Cech,
    Rips,
    Delaunay,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    divergence: Divergence,
    #[arg(long, value_enum, default_value = "cech")]
    complex: Complex,
    /// Skeleton dimension; defaults to the ambient dimension.
    #[arg(long)]
    max_dim: Option<usize>,
    /// Largest radius kept, in divergence units; `inf` for none.
    #[arg(long, default_value = "inf")]
    cutoff: f64,
    /// Largest homological dimension reported; defaults to max-dim − 1.
    #[arg(long)]
    max_hom_dim: Option<usize>,
    /// Headerless CSV, or JSON `{"points": [[...], ...]}`.
    #[arg(long)]
    input: PathBuf,
    /// Diagram destination; without it the diagram is printed with the stats.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Distance from a circumball boundary that counts as a general-position violation.
    #[arg(long, default_value_t = 1e-10)]
    gp_tolerance: f64,
    /// Relative chart-gradient size at which the circumball solver stops.
    #[arg(long, default_value_t = 1e-10)]
    solver_tolerance: f64,
}

#[derive(Args)]
struct DemoArgs {
    /// Comma-separated values in (0, 1/6); pass the flag without values for none.
    #[arg(long, num_args = 0.., value_delimiter = ',', default_values_t = [0.1, 0.03, 0.01, 0.003])]
    epsilons: Vec<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    divergence: Divergence,
    #[arg(long)]
    points: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn fail(kind: &str, message: &str) -> ExitCode {
    let line = json!({"error": {"kind": kind, "message": message.replace('\n', " ")}});
    eprintln!("{line}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("InvalidArgument", e.to_string().trim()),
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return fail("InvalidArgument", "--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            return fail("InvalidArgument", &e.to_string());
        }
    }
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::DemoNoInterleaving(args) => demo(args),
        Command::Synth(args) => write_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string()),
    }
}

fn stats_json(stats: &BuildStats, zero_persistence: usize, wall_time_ms: u128) -> serde_json::Value {
    json!({
        "num_points": stats.num_points,
        "num_edges": stats.num_edges,
        "num_simplices": stats.num_simplices,
        "num_circumball_calls": stats.num_circumball_calls,
        "num_function_evals": stats.num_function_evals,
        "num_zero_persistence_pairs": zero_persistence,
        "wall_time_ms": wall_time_ms,
    })
}

fn run(args: RunArgs) -> Result<(), Error> {
    if args.cutoff.is_nan() || args.cutoff < 0.0 {
        return Err(Error::InvalidArgument(format!("cutoff must be nonnegative, got {}", args.cutoff)));
    }
    if !(args.gp_tolerance >= 0.0) || !(args.solver_tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let start = Instant::now();
    let (gen, cloud) = ingest(&args.input, args.divergence.kind())?;
    let max_dim = args.max_dim.unwrap_or(gen.dimension);
    let max_hom_dim = args.max_hom_dim.unwrap_or(max_dim.saturating_sub(1));
    let cfg = BuildConfig {
        solver: SolverConfig {
            gradient_tolerance: args.solver_tolerance,
            ..SolverConfig::default()
        },
        general_position_tolerance: args.gp_tolerance,
    };

    let (order, stats): (FiltrationOrder, BuildStats) = match args.complex {
        Complex::Cech => {
            let (f, stats) = cech_radius_function_with(&gen, &cloud, max_dim, args.cutoff, &cfg)?;
            (order_filtration(&f)?, stats)
        }
        Complex::Rips => {
            let f = rips_radius_function_with(&gen, &cloud, max_dim, args.cutoff, &cfg)?;
            (order_filtration(&f)?, f.stats())
        }
        Complex::Delaunay => {
            let del = delaunay_radius_function_with(&gen, &cloud, &cfg)?;
            (order_filtration(&del)?, del.stats())
        }
    };
    let order = truncate(order, max_dim, args.cutoff);
    let diagram = compute_persistence(&order, max_hom_dim);
    let elapsed = start.elapsed().as_millis();

    let mut report = json!({
        "schema": SCHEMA_VERSION,
        "stats": stats_json(&stats, diagram.zero_persistence, elapsed),
    });
    match &args.output {
        Some(path) => {
            fs::write(path, encode_diagram(&diagram) + "\n")
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        }
        None => {
            report["diagram"] = diagram_to_json(&diagram);
        }
    }
    print_line(&report.to_string())
}

/// Applies skeleton and cutoff limits to a Delaunay order (Čech and Rips
/// orders already respect them).
fn truncate(order: FiltrationOrder, max_dim: usize, cutoff: f64) -> FiltrationOrder {
    if order.iter().all(|(s, r)| s.dim() <= max_dim && r <= cutoff) {
        return order;
    }
    let kept: Vec<_> = order
        .iter()
        .filter(|(s, r)| s.dim() <= max_dim && *r <= cutoff)
        .map(|(s, r)| (s.clone(), r))
        .collect();
    FiltrationOrder::from_sorted(kept)
}

fn print_line(line: &str) -> Result<(), Error> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").map_err(Error::from)
}

fn demo(args: DemoArgs) -> Result<(), Error> {
    let mut rows = Vec::with_capacity(args.epsilons.len());
    for &eps in &args.epsilons {
        let r = no_interleaving_demo(eps)?;
        rows.push(json!({
            "epsilon": eps,
            "pairwise_radius": r.pairwise,
            "triple_radius": r.triple,
            "ratio": r.ratio(),
        }));
    }
    print_line(&json!({"schema": SCHEMA_VERSION, "rows": rows}).to_string())
}

fn write_synth(args: SynthArgs) -> Result<(), Error> {
    if args.dim == 0 {
        return Err(Error::InvalidArgument("--dim must be positive".into()));
    }
    let csv = to_csv(&synth(args.divergence.kind(), args.points, args.dim, args.seed));
    match &args.output {
        Some(path) => fs::write(path, csv).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().lock().write_all(csv.as_bytes()).map_err(Error::from),
    }
}
