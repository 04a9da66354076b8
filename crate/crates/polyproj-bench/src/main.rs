//! `polyproj`: project points onto polytope hulls, compute hull-to-hull
//! distances, and benchmark plain vs. accelerated solvers.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use polyproj::distance::{
    meta_distance_ideal, meta_distance_robust, solve_pair_direct, PairMetaFlags,
};
use polyproj::nearest::{meta_project_ideal, meta_project_robust, solve_direct, MetaFlags};
use polyproj::report::{PairReport, SolveReport, Termination};
use polyproj::solvers::{distance_solver_by_name, nearest_solver_by_name, InnerConfig};
use polyproj::{io as cloud_io, PointCloud, Tolerances};

use polyproj_bench::{emit_csv, emit_plotdata, run_suite, summarize, ProblemKind, SuiteConfig};

#[derive(Parser)]
#[command(
    name = "polyproj",
    version,
    about = "Nearest point in a polytope and distance between polytopes, \
             with subpolytope acceleration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a query point onto the convex hull of a point cloud.
    Project(ProjectArgs),
    /// Compute the distance between the convex hulls of two point clouds.
    Distance(DistanceArgs),
    /// Run benchmark suites over generated instances and emit CSV results.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CommonSolveArgs {
    /// Outer stopping slack eta (default: 1e-4, or 5e-4 from d = 50).
    #[arg(long)]
    eta: Option<f64>,
    /// Run the solver directly on the full problem instead of the
    /// accelerated meta-algorithm.
    #[arg(long)]
    no_accel: bool,
    /// Use the ideal meta-algorithm (exact-grade stopping) instead of the
    /// robust one.
    #[arg(long, conflicts_with = "no_accel")]
    ideal: bool,
    /// Emit one JSON line per outer iteration before the summary.
    #[arg(long)]
    trace: bool,
    /// Cap on accepted outer iterations.
    #[arg(long, default_value_t = 10_000)]
    max_outer: usize,
    /// Inner-solver tolerance override (config key inner.epsilon).
    #[arg(long)]
    inner_epsilon: Option<f64>,
    /// Inner-solver iteration cap override (config key inner.max_iter).
    #[arg(long)]
    inner_max_iter: Option<usize>,
    /// Wall-clock cap in seconds for the whole solve.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Args)]
struct ProjectArgs {
    /// Point-cloud file (plain `d ℓ` header format or x1..xd CSV).
    #[arg(long)]
    cloud: PathBuf,
    /// Query point: `origin` or a file with its coordinates.
    #[arg(long, default_value = "origin")]
    z: String,
    /// Inner solver: wolfe | mdm | qp | oracle.
    #[arg(long, default_value = "qp")]
    solver: String,
    /// Initial index set (comma-separated 0-based indices; default 0..=d).
    #[arg(long, value_delimiter = ',')]
    init: Option<Vec<usize>>,
    /// Use the scaled stopping criterion
    /// `<y-z, x_i-y> >= -eta ||x_i - y||`.
    #[arg(long)]
    scaled_criterion: bool,
    /// After solving, check eta against the (very conservative) consistency
    /// window derived from the cloud diameter and inner accuracy, and warn
    /// when it falls outside.
    #[arg(long)]
    check_params: bool,
    #[command(flatten)]
    common: CommonSolveArgs,
}

#[derive(Args)]
struct DistanceArgs {
    /// First point-cloud file.
    #[arg(long = "cloud-p")]
    cloud_p: PathBuf,
    /// Second point-cloud file.
    #[arg(long = "cloud-q")]
    cloud_q: PathBuf,
    /// Pair solver: wolfe | mdm | qp | oracle (Minkowski-difference
    /// reduction) or pair-qp | pair-oracle (native).
    #[arg(long, default_value = "qp")]
    solver: String,
    /// Initial index set for the first cloud.
    #[arg(long = "init-p", value_delimiter = ',')]
    init_p: Option<Vec<usize>>,
    /// Initial index set for the second cloud.
    #[arg(long = "init-q", value_delimiter = ',')]
    init_q: Option<Vec<usize>>,
    #[command(flatten)]
    common: CommonSolveArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Problem family to benchmark.
    #[arg(long, default_value = "nearest")]
    kind: String,
    /// Dimensions to sweep (comma-separated).
    #[arg(long = "d", value_delimiter = ',', default_value = "3")]
    dims: Vec<usize>,
    /// Point counts to sweep (comma-separated).
    #[arg(long = "ell", value_delimiter = ',', default_value = "100")]
    ells: Vec<usize>,
    /// Instances per cell.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Solvers to benchmark (comma-separated registry names).
    #[arg(long = "solvers", value_delimiter = ',', default_value = "qp")]
    solvers: Vec<String>,
    /// Modes: both, accel, or plain.
    #[arg(long, default_value = "both")]
    modes: String,
    /// Master seed; per-run seeds derive deterministically from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Per-run wall-clock cap in seconds (0 disables it).
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Output CSV path.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Optional grouped mean-time series output.
    #[arg(long)]
    plotdata: Option<PathBuf>,
    /// Run cells sequentially (required for timing comparisons).
    #[arg(long)]
    serial: bool,
    /// Outer stopping slack override.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    max_outer: usize,
    #[arg(long)]
    inner_epsilon: Option<f64>,
    #[arg(long)]
    inner_max_iter: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Project(args) => cmd_project(args),
        Command::Distance(args) => cmd_distance(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(4)
        }
    }
}

fn exit_for(termination: Termination) -> ExitCode {
    ExitCode::from(termination.exit_code() as u8)
}

fn inner_config(common: &CommonSolveArgs, deadline: Option<Instant>) -> InnerConfig {
    InnerConfig {
        epsilon: common.inner_epsilon,
        max_iter: common.inner_max_iter,
        deadline,
    }
}

fn tolerances(common: &CommonSolveArgs, dim: usize) -> Tolerances<f64> {
    let mut tol = Tolerances::default_for_dim(dim).with_max_outer(common.max_outer);
    if let Some(eta) = common.eta {
        tol = tol.with_eta(eta);
    }
    tol
}

fn deadline_of(common: &CommonSolveArgs) -> Option<Instant> {
    common
        .timeout
        .filter(|&t| t > 0.0)
        .map(|t| Instant::now() + Duration::from_secs_f64(t))
}

fn cmd_project(args: ProjectArgs) -> Result<ExitCode> {
    let cloud: PointCloud<f64> = cloud_io::read_cloud(&args.cloud)
        .with_context(|| format!("reading {}", args.cloud.display()))?;
    let z = read_query(&args.z, cloud.dim())?;
    let deadline = deadline_of(&args.common);
    let solver =
        nearest_solver_by_name::<f64>(&args.solver, &inner_config(&args.common, deadline))?;
    let tol = tolerances(&args.common, cloud.dim());

    let report: SolveReport<f64> = if args.common.no_accel {
        solve_direct(&z, &cloud, solver.as_ref(), tol.eta)?
    } else if args.common.ideal {
        meta_project_ideal(
            &z,
            &cloud,
            solver.as_ref(),
            args.init.as_deref(),
            args.common.eta,
            args.common.max_outer,
            &MetaFlags {
                trace: args.common.trace,
                scaled: args.scaled_criterion,
                deadline,
            },
        )?
    } else {
        meta_project_robust(
            &z,
            &cloud,
            solver.as_ref(),
            &tol,
            args.init.as_deref(),
            &MetaFlags {
                trace: args.common.trace,
                scaled: args.scaled_criterion,
                deadline,
            },
        )?
    };

    if let Some(trace) = &report.trace {
        for rec in trace {
            println!(
                "{}",
                serde_json::json!({
                    "n": rec.n,
                    "index_set": rec.index_set,
                    "theta": rec.theta,
                    "worst_value": rec.worst_value,
                    "correction_step3": rec.correction_step3,
                    "correction_step4": rec.correction_step4,
                })
            );
        }
    }
    if args.check_params {
        let inner_eps = args
            .common
            .inner_epsilon
            .unwrap_or(match args.solver.as_str() {
                "mdm" => 1e-8,
                _ => 1e-10,
            });
        let theta0 = report.thetas.first().copied().unwrap_or(report.theta);
        if let Some(warning) = polyproj::geometry::parameters_consistency_warning(
            cloud.diameter(),
            report.theta,
            theta0,
            inner_eps,
            tol.eta,
        ) {
            eprintln!("warning: {warning}");
        }
    }
    print_solve_report(&args.solver, args.common.no_accel, &report);
    Ok(exit_for(report.termination))
}

fn cmd_distance(args: DistanceArgs) -> Result<ExitCode> {
    let cloud_p: PointCloud<f64> = cloud_io::read_cloud(&args.cloud_p)
        .with_context(|| format!("reading {}", args.cloud_p.display()))?;
    let cloud_q: PointCloud<f64> = cloud_io::read_cloud(&args.cloud_q)
        .with_context(|| format!("reading {}", args.cloud_q.display()))?;
    let deadline = deadline_of(&args.common);
    let solver =
        distance_solver_by_name::<f64>(&args.solver, &inner_config(&args.common, deadline))?;
    let tol = tolerances(&args.common, cloud_p.dim());

    let report: PairReport<f64> = if args.common.no_accel {
        solve_pair_direct(&cloud_p, &cloud_q, solver.as_ref(), tol.eta)?
    } else if args.common.ideal {
        meta_distance_ideal(
            &cloud_p,
            &cloud_q,
            solver.as_ref(),
            args.init_p.as_deref(),
            args.init_q.as_deref(),
            args.common.eta,
            args.common.max_outer,
            &PairMetaFlags {
                trace: args.common.trace,
                deadline,
            },
        )?
    } else {
        meta_distance_robust(
            &cloud_p,
            &cloud_q,
            solver.as_ref(),
            &tol,
            args.init_p.as_deref(),
            args.init_q.as_deref(),
            &PairMetaFlags {
                trace: args.common.trace,
                deadline,
            },
        )?
    };

    if let Some(trace) = &report.trace {
        for rec in trace {
            println!(
                "{}",
                serde_json::json!({
                    "n": rec.n,
                    "index_set_p": rec.index_set_p,
                    "index_set_q": rec.index_set_q,
                    "theta": rec.theta,
                    "rho_x": rec.rho_x,
                    "rho_y": rec.rho_y,
                    "correction": rec.correction,
                })
            );
        }
    }
    print_pair_report(&args.solver, args.common.no_accel, &report);
    Ok(exit_for(report.termination))
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let kind = match args.kind.as_str() {
        "nearest" => ProblemKind::Nearest,
        "distance" => ProblemKind::Distance,
        other => return Err(anyhow!("unknown benchmark kind '{other}'")),
    };
    let modes = match args.modes.as_str() {
        "both" => vec![true, false],
        "accel" => vec![true],
        "plain" => vec![false],
        other => return Err(anyhow!("unknown mode selection '{other}'")),
    };
    let config = SuiteConfig {
        kind,
        dims: args.dims,
        ells: args.ells,
        trials: args.trials,
        solvers: args.solvers,
        modes,
        eta: args.eta,
        master_seed: args.seed,
        timeout: (args.timeout > 0.0).then(|| Duration::from_secs_f64(args.timeout)),
        serial: args.serial,
        max_outer: args.max_outer,
        inner_epsilon: args.inner_epsilon,
        inner_max_iter: args.inner_max_iter,
    };

    let records = run_suite(&config);
    emit_csv(&records, &args.out)?;
    if let Some(path) = &args.plotdata {
        emit_plotdata(&records, path)?;
    }

    let failures = records.iter().filter(|r| r.error.is_some()).count();
    println!(
        "{} runs ({} failed) -> {}",
        records.len(),
        failures,
        args.out.display()
    );
    for cell in summarize(&records) {
        println!(
            "d={} ell={} solver={} {}: mean time {:.6}s, mean outer iters {:.1} ({} runs)",
            cell.d,
            cell.ell,
            cell.solver,
            if cell.accelerated { "accel" } else { "plain" },
            cell.mean_wall_time,
            cell.mean_outer_iters,
            cell.runs,
        );
    }
    for rec in records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "failed: d={} ell={} solver={} {} trial={}: {}",
            rec.d,
            rec.ell,
            rec.solver,
            if rec.accelerated { "accel" } else { "plain" },
            rec.trial,
            rec.error.as_deref().unwrap_or("unknown"),
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn read_query(spec: &str, dim: usize) -> Result<Vec<f64>> {
    if spec == "origin" {
        return Ok(vec![0.0; dim]);
    }
    let content =
        std::fs::read_to_string(spec).with_context(|| format!("reading query point {spec}"))?;
    let z = cloud_io::parse_point::<f64>(content.trim())?;
    if z.len() != dim {
        return Err(anyhow!(
            "query point has {} coordinates, cloud dimension is {dim}",
            z.len()
        ));
    }
    Ok(z)
}

fn print_solve_report(solver: &str, plain: bool, report: &SolveReport<f64>) {
    println!(
        "solver: {solver}{}",
        if plain { " (plain)" } else { " (accelerated)" }
    );
    println!("termination: {}", termination_str(report.termination));
    if let Some(diag) = &report.diagnostic {
        println!("diagnostic: {diag}");
    }
    println!("distance: {}", report.theta);
    println!("projection: {}", join(&report.projection));
    println!("support: {}", support_str(report));
    println!(
        "outer_iterations: {} (solver calls {}, inner iterations {})",
        report.outer_iterations, report.solver_calls, report.inner_iterations
    );
    println!(
        "corrections: step3 {}, step4 {}",
        report.corrections_step3, report.corrections_step4
    );
    println!("final_criterion_value: {}", report.final_worst_value);
}

fn print_pair_report(solver: &str, plain: bool, report: &PairReport<f64>) {
    println!(
        "solver: {solver}{}",
        if plain { " (plain)" } else { " (accelerated)" }
    );
    println!("termination: {}", termination_str(report.termination));
    if let Some(diag) = &report.diagnostic {
        println!("diagnostic: {diag}");
    }
    println!("distance: {}", report.distance);
    println!("point_p: {}", join(&report.pair.0));
    println!("point_q: {}", join(&report.pair.1));
    println!(
        "outer_iterations: {} (solver calls {}, inner iterations {})",
        report.outer_iterations, report.solver_calls, report.inner_iterations
    );
    println!("corrections: {}", report.corrections);
    println!("rho_x: {}  rho_y: {}", report.rho_x, report.rho_y);
}

fn termination_str(t: Termination) -> &'static str {
    match t {
        Termination::OptimalEta => "optimal",
        Termination::IterationCap => "iteration-cap",
        Termination::CorrectionFailure => "correction-failure",
    }
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn support_str(report: &SolveReport<f64>) -> String {
    report
        .coeffs_global
        .support()
        .iter()
        .zip(report.coeffs_global.weights().iter())
        .filter(|(_, &w)| w > 0.0)
        .map(|(i, w)| format!("{i}:{w}"))
        .collect::<Vec<_>>()
        .join(" ")
}
