//! Experiment orchestration: runs solver/size/mode cells over freshly
//! generated instances, with per-run timing and wall-clock caps.

use std::time::{Duration, Instant};

use polyproj::distance::{meta_distance_robust, solve_pair_direct, PairMetaFlags};
use polyproj::nearest::{meta_project_robust, solve_direct, MetaFlags};
use polyproj::solvers::{distance_solver_by_name, nearest_solver_by_name, InnerConfig};
use polyproj::{Result, Tolerances};
use rayon::prelude::*;

use crate::gen::{gen_compressed_cube, gen_two_cubes, ProblemInstance, ProblemKind};
use crate::rng::derive_seed;

/// Suite configuration: the cross product of dimensions, point counts,
/// solvers and modes, each run `trials` times on per-trial instances.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub kind: ProblemKind,
    pub dims: Vec<usize>,
    pub ells: Vec<usize>,
    pub trials: usize,
    pub solvers: Vec<String>,
    /// Modes to run: `true` = accelerated meta-algorithm, `false` = plain
    /// solver on the full problem.
    pub modes: Vec<bool>,
    /// Outer stopping slack; `None` uses the per-dimension default.
    pub eta: Option<f64>,
    pub master_seed: u64,
    /// Per-run wall-clock cap.
    pub timeout: Option<Duration>,
    /// Run cells sequentially (required for timing comparisons).
    pub serial: bool,
    pub max_outer: usize,
    pub inner_epsilon: Option<f64>,
    pub inner_max_iter: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            kind: ProblemKind::Nearest,
            dims: vec![3],
            ells: vec![100],
            trials: 10,
            solvers: vec!["qp".into()],
            modes: vec![true, false],
            eta: None,
            master_seed: 1,
            timeout: Some(Duration::from_secs(60)),
            serial: false,
            max_outer: 10_000,
            inner_epsilon: None,
            inner_max_iter: None,
        }
    }
}

/// One finished (or failed) run.
#[derive(Clone, Debug)]
pub struct BenchRecord {
    pub kind: ProblemKind,
    pub d: usize,
    pub ell: usize,
    pub solver: String,
    pub accelerated: bool,
    pub trial: usize,
    pub seed: u64,
    /// Solve wall time in seconds (instance generation and I/O excluded).
    pub wall_time: f64,
    /// Accepted outer iterations (0 for plain runs).
    pub outer_iters: usize,
    pub inner_iters: usize,
    /// Final stopping-criterion value (worst inner product, or the smaller
    /// of the two pair residuals). NaN for failed runs.
    pub final_criterion_value: f64,
    /// `‖y - z‖` or `‖v - w‖`. NaN for failed runs.
    pub result_value: f64,
    /// Error message when the run failed outright.
    pub error: Option<String>,
}

/// Generates the instance for a cell trial. Seeds depend only on
/// `(kind, d, ell, trial)` so every solver/mode combination sees the same
/// instance.
pub fn instance_for(config: &SuiteConfig, d: usize, ell: usize, trial: usize) -> ProblemInstance {
    let kind_tag = match config.kind {
        ProblemKind::Nearest => 1,
        ProblemKind::Distance => 2,
    };
    let seed = derive_seed(
        config.master_seed,
        &[kind_tag, d as u64, ell as u64, trial as u64],
    );
    match config.kind {
        ProblemKind::Nearest => gen_compressed_cube(d, ell, seed),
        ProblemKind::Distance => gen_two_cubes(d, ell, seed),
    }
}

fn tolerances_for(d: usize, eta: Option<f64>, max_outer: usize) -> Tolerances<f64> {
    let mut tol = Tolerances::default_for_dim(d).with_max_outer(max_outer);
    if let Some(e) = eta {
        tol = tol.with_eta(e);
    }
    tol
}

/// Runs one solve, returning the timing and the extracted metrics.
fn run_one(
    config: &SuiteConfig,
    instance: &ProblemInstance,
    solver_name: &str,
    accelerated: bool,
) -> Result<(f64, usize, usize, f64, f64)> {
    let deadline = config.timeout.map(|t| Instant::now() + t);
    let inner = InnerConfig {
        epsilon: config.inner_epsilon,
        max_iter: config.inner_max_iter,
        deadline,
    };
    let tol = tolerances_for(instance.d, config.eta, config.max_outer);

    match instance.kind {
        ProblemKind::Nearest => {
            let solver = nearest_solver_by_name::<f64>(solver_name, &inner)?;
            let z = instance
                .query
                .as_deref()
                .expect("nearest instance has a query");
            let started = Instant::now();
            let report = if accelerated {
                meta_project_robust(
                    z,
                    &instance.cloud_p,
                    solver.as_ref(),
                    &tol,
                    None,
                    &MetaFlags {
                        deadline,
                        ..MetaFlags::default()
                    },
                )?
            } else {
                solve_direct(z, &instance.cloud_p, solver.as_ref(), tol.eta)?
            };
            let wall = started.elapsed().as_secs_f64();
            Ok((
                wall,
                report.outer_iterations,
                report.inner_iterations,
                report.final_worst_value,
                report.theta,
            ))
        }
        ProblemKind::Distance => {
            let solver = distance_solver_by_name::<f64>(solver_name, &inner)?;
            let cloud_q = instance
                .cloud_q
                .as_ref()
                .expect("distance instance has two clouds");
            let started = Instant::now();
            let report = if accelerated {
                meta_distance_robust(
                    &instance.cloud_p,
                    cloud_q,
                    solver.as_ref(),
                    &tol,
                    None,
                    None,
                    &PairMetaFlags {
                        deadline,
                        ..PairMetaFlags::default()
                    },
                )?
            } else {
                solve_pair_direct(&instance.cloud_p, cloud_q, solver.as_ref(), tol.eta)?
            };
            let wall = started.elapsed().as_secs_f64();
            Ok((
                wall,
                report.outer_iterations,
                report.inner_iterations,
                report.rho_x.min(report.rho_y),
                report.distance,
            ))
        }
    }
}

/// Runs every cell of the configuration. Failed runs are recorded with NaN
/// metrics and the suite continues. Records come back in deterministic
/// (d, ell, solver, mode, trial) order regardless of parallelism.
pub fn run_suite(config: &SuiteConfig) -> Vec<BenchRecord> {
    let mut specs = Vec::new();
    for &d in &config.dims {
        for &ell in &config.ells {
            for solver in &config.solvers {
                for &accelerated in &config.modes {
                    for trial in 0..config.trials {
                        specs.push((d, ell, solver.clone(), accelerated, trial));
                    }
                }
            }
        }
    }

    let execute = |(d, ell, solver, accelerated, trial): &(usize, usize, String, bool, usize)| {
        let instance = instance_for(config, *d, *ell, *trial);
        let outcome = run_one(config, &instance, solver, *accelerated);
        let (wall, outer, inner, criterion, value, error) = match outcome {
            Ok((wall, outer, inner, criterion, value)) => {
                (wall, outer, inner, criterion, value, None)
            }
            Err(e) => (0.0, 0, 0, f64::NAN, f64::NAN, Some(e.to_string())),
        };
        BenchRecord {
            kind: config.kind,
            d: *d,
            ell: *ell,
            solver: solver.clone(),
            accelerated: *accelerated,
            trial: *trial,
            seed: instance.seed,
            wall_time: wall,
            outer_iters: outer,
            inner_iters: inner,
            final_criterion_value: criterion,
            result_value: value,
            error,
        }
    };

    if config.serial {
        specs.iter().map(execute).collect()
    } else {
        specs.par_iter().map(execute).collect()
    }
}

/// Per-cell aggregate over trials.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub d: usize,
    pub solver: String,
    pub accelerated: bool,
    pub ell: usize,
    pub mean_wall_time: f64,
    pub mean_outer_iters: f64,
    pub runs: usize,
}

/// Groups records by `(d, solver, accelerated)` and aggregates per `ell`,
/// skipping failed runs. Groups and series come out sorted.
pub fn summarize(records: &[BenchRecord]) -> Vec<CellSummary> {
    let mut cells: Vec<CellSummary> = Vec::new();
    for rec in records {
        if rec.error.is_some() {
            continue;
        }
        let found = cells.iter_mut().find(|c| {
            c.d == rec.d
                && c.solver == rec.solver
                && c.accelerated == rec.accelerated
                && c.ell == rec.ell
        });
        match found {
            Some(c) => {
                c.mean_wall_time += rec.wall_time;
                c.mean_outer_iters += rec.outer_iters as f64;
                c.runs += 1;
            }
            None => cells.push(CellSummary {
                d: rec.d,
                solver: rec.solver.clone(),
                accelerated: rec.accelerated,
                ell: rec.ell,
                mean_wall_time: rec.wall_time,
                mean_outer_iters: rec.outer_iters as f64,
                runs: 1,
            }),
        }
    }
    for c in cells.iter_mut() {
        c.mean_wall_time /= c.runs as f64;
        c.mean_outer_iters /= c.runs as f64;
    }
    cells.sort_by(|a, b| {
        (a.d, &a.solver, a.accelerated, a.ell).cmp(&(b.d, &b.solver, b.accelerated, b.ell))
    });
    cells
}
