//! Acceleration meta-algorithms for the distance between two polytopes
//! given as convex hulls of point sets.
//!
//! The scheme mirrors the nearest-point acceleration with one subpolytope
//! per cloud: solve the pair subproblem, test the two-sided optimality
//! certificate, and exchange one vertex per violating side (the
//! minimum-weight index out, the global argmin of `⟨v - w, x_i⟩`
//! respectively `⟨w - v, y_j⟩` in). The robust variant accepts an exchange
//! only on strict decay of `θ = ‖v - w‖` and otherwise repairs the
//! coefficient vectors with the two-sided correction method.

mod correction;

pub use correction::{coefficients_correction, PairCorrection};

use std::collections::HashSet;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{
    check_pair_optimality, distance_between, ConvexCoefficients, PointCloud, Tolerances,
};
use crate::nearest::index_removal;
use crate::report::{PairReport, PairTraceRecord, Termination};
use crate::scalar::{cast, Scalar};
use crate::solvers::{distance_solver_by_name, DistanceSolver, InnerConfig, StopCause};

const IDEAL_ETA: f64 = 1e-12;

/// Live state of a distance meta-run.
#[derive(Clone, Debug)]
pub struct PairState<T> {
    pub index_set_p: Vec<usize>,
    pub index_set_q: Vec<usize>,
    /// Dense coefficients aligned with `index_set_p`.
    pub weights_p: Vec<T>,
    pub weights_q: Vec<T>,
    /// Current pair `(v, w)` with `v` in the first hull.
    pub v: Vec<T>,
    pub w: Vec<T>,
    /// `θ = ‖v - w‖`.
    pub theta: T,
    /// Latest full-cloud optimality residuals.
    pub rho_x: T,
    pub rho_y: T,
    pub outer_iter: usize,
    pub correction_attempted: bool,
}

impl<T: Scalar> PairState<T> {
    /// Builds a state and evaluates the pair, its objective and both
    /// optimality residuals against the full clouds.
    pub fn new(
        index_set_p: Vec<usize>,
        weights_p: Vec<T>,
        index_set_q: Vec<usize>,
        weights_q: Vec<T>,
        cloud_p: &PointCloud<T>,
        cloud_q: &PointCloud<T>,
    ) -> Result<Self> {
        cloud_p.check_indices(&index_set_p)?;
        cloud_q.check_indices(&index_set_q)?;
        let v = combine(&index_set_p, &weights_p, cloud_p);
        let w = combine(&index_set_q, &weights_q, cloud_q);
        let theta = distance_between(&v, &w);
        let check = check_pair_optimality(&v, &w, cloud_p, cloud_q, T::zero())?;
        Ok(PairState {
            index_set_p,
            index_set_q,
            weights_p,
            weights_q,
            v,
            w,
            theta,
            rho_x: check.rho_x,
            rho_y: check.rho_y,
            outer_iter: 0,
            correction_attempted: false,
        })
    }
}

fn combine<T: Scalar>(indices: &[usize], weights: &[T], cloud: &PointCloud<T>) -> Vec<T> {
    let mut out = vec![T::zero(); cloud.dim()];
    for (&i, &w) in indices.iter().zip(weights.iter()) {
        for (o, &c) in out.iter_mut().zip(cloud.point(i).iter()) {
            *o += w * c;
        }
    }
    out
}

/// Per-side removal selection: an index is produced for a side exactly when
/// that side's residual violates `-tol.eta`. Zero-weight indices are
/// preferred; otherwise the dependence-based removal runs on that side.
pub fn pair_index_removal<T: Scalar>(
    state: &PairState<T>,
    cloud_p: &PointCloud<T>,
    cloud_q: &PointCloud<T>,
    tol: &Tolerances<T>,
) -> Result<(Option<usize>, Option<usize>)> {
    let removal_p = if state.rho_x < -tol.eta {
        let coeffs =
            ConvexCoefficients::from_dense(&state.index_set_p, &state.weights_p, cast(1e-9))?;
        Some(index_removal(
            &state.index_set_p,
            cloud_p,
            &coeffs,
            tol.eps_zero,
        )?)
    } else {
        None
    };
    let removal_q = if state.rho_y < -tol.eta {
        let coeffs =
            ConvexCoefficients::from_dense(&state.index_set_q, &state.weights_q, cast(1e-9))?;
        Some(index_removal(
            &state.index_set_q,
            cloud_q,
            &coeffs,
            tol.eps_zero,
        )?)
    } else {
        None
    };
    Ok((removal_p, removal_q))
}

/// Options for [`distance`].
#[derive(Clone, Debug)]
pub struct DistanceOptions<T> {
    /// Distance-solver registry name; `wolfe`/`mdm`/`qp`/`oracle` select
    /// Minkowski-difference reduction around that inner solver.
    pub solver: String,
    pub inner: InnerConfig,
    pub tolerances: Option<Tolerances<T>>,
    pub init_p: Option<Vec<usize>>,
    pub init_q: Option<Vec<usize>>,
    pub trace: bool,
    pub deadline: Option<Instant>,
}

impl<T> Default for DistanceOptions<T> {
    fn default() -> Self {
        DistanceOptions {
            solver: "qp".into(),
            inner: InnerConfig::default(),
            tolerances: None,
            init_p: None,
            init_q: None,
            trace: false,
            deadline: None,
        }
    }
}

/// Computes the distance between the two hulls with the robust
/// meta-algorithm, building the pair solver from the options.
pub fn distance<T: Scalar>(
    cloud_p: &PointCloud<T>,
    cloud_q: &PointCloud<T>,
    opts: &DistanceOptions<T>,
) -> Result<PairReport<T>> {
    let mut inner = opts.inner;
    inner.deadline = inner.deadline.or(opts.deadline);
    let solver = distance_solver_by_name::<T>(&opts.solver, &inner)?;
    let tol = opts
        .tolerances
        .unwrap_or_else(|| Tolerances::default_for_dim(cloud_p.dim()));
    meta_distance_robust(
        cloud_p,
        cloud_q,
        solver.as_ref(),
        &tol,
        opts.init_p.as_deref(),
        opts.init_q.as_deref(),
        &PairMetaFlags {
            trace: opts.trace,
            deadline: opts.deadline,
        },
    )
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PairMetaFlags {
    pub trace: bool,
    pub deadline: Option<Instant>,
}

struct PairRun<T> {
    state: PairState<T>,
    thetas: Vec<T>,
    trace: Option<Vec<PairTraceRecord<T>>>,
    solver_calls: usize,
    inner_iterations: usize,
    corrections: usize,
}

impl<T: Scalar> PairRun<T> {
    fn record(&mut self, correction: bool) {
        if let Some(tr) = self.trace.as_mut() {
            tr.push(PairTraceRecord {
                n: self.state.outer_iter,
                index_set_p: self.state.index_set_p.clone(),
                index_set_q: self.state.index_set_q.clone(),
                theta: self.state.theta,
                rho_x: self.state.rho_x,
                rho_y: self.state.rho_y,
                correction,
            });
        }
    }

    fn finish(self, termination: Termination, diagnostic: Option<String>) -> Result<PairReport<T>> {
        let coeffs_p = ConvexCoefficients::from_dense(
            &self.state.index_set_p,
            &self.state.weights_p,
            cast(1e-9),
        )?;
        let coeffs_q = ConvexCoefficients::from_dense(
            &self.state.index_set_q,
            &self.state.weights_q,
            cast(1e-9),
        )?;
        Ok(PairReport {
            distance: self.state.theta,
            pair: (self.state.v, self.state.w),
            coeffs_p,
            coeffs_q,
            outer_iterations: self.state.outer_iter,
            solver_calls: self.solver_calls,
            inner_iterations: self.inner_iterations,
            corrections: self.corrections,
            termination,
            rho_x: self.state.rho_x,
            rho_y: self.state.rho_y,
            thetas: self.thetas,
            trace: self.trace,
            diagnostic,
        })
    }
}

struct SideSetup {
    indices: Vec<usize>,
    exchangeable: bool,
}

fn side_setup<T: Scalar>(cloud: &PointCloud<T>, init: Option<&[usize]>) -> Result<SideSetup> {
    let want = cloud.dim() + 1;
    if cloud.len() < want {
        // Deficient side: pin the full index set; it is never exchanged.
        return Ok(SideSetup {
            indices: (0..cloud.len()).collect(),
            exchangeable: false,
        });
    }
    let indices = match init {
        Some(list) => {
            cloud.check_indices(list)?;
            if list.len() != want {
                return Err(Error::InvalidCloud(format!(
                    "initial index set must hold exactly {want} distinct indices, got {}",
                    list.len()
                )));
            }
            list.to_vec()
        }
        None => (0..want).collect(),
    };
    Ok(SideSetup {
        indices,
        exchangeable: true,
    })
}

fn solve_pair_sub<T: Scalar>(
    solver: &dyn DistanceSolver<T>,
    indices_p: &[usize],
    cloud_p: &PointCloud<T>,
    indices_q: &[usize],
    cloud_q: &PointCloud<T>,
    run_calls: &mut usize,
    run_inner: &mut usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let out = solver.solve_pair(indices_p, cloud_p, indices_q, cloud_q)?;
    *run_calls += 1;
    *run_inner += out.stats.inner_iterations;
    Ok((
        out.coeffs_p.dense_over(indices_p)?,
        out.coeffs_q.dense_over(indices_q)?,
    ))
}

/// One-shot solve over the full clouds; baseline for benchmarking and the
/// degenerate-input path.
pub fn solve_pair_direct<T: Scalar>(
    cloud_p: &PointCloud<T>,
    cloud_q: &PointCloud<T>,
    solver: &dyn DistanceSolver<T>,
    eta: T,
) -> Result<PairReport<T>> {
    let all_p: Vec<usize> = (0..cloud_p.len()).collect();
    let all_q: Vec<usize> = (0..cloud_q.len()).collect();
    let out = solver.solve_pair(&all_p, cloud_p, &all_q, cloud_q)?;
    let v = out.coeffs_p.evaluate(cloud_p)?;
    let w = out.coeffs_q.evaluate(cloud_q)?;
    let theta = distance_between(&v, &w);
    let check = check_pair_optimality(&v, &w, cloud_p, cloud_q, eta)?;
    let termination = if check.satisfied && out.stats.terminated_by == StopCause::Tolerance {
        Termination::OptimalEta
    } else {
        Termination::IterationCap
    };
    Ok(PairReport {
        pair: (v, w),
        distance: theta,
        coeffs_p: out.coeffs_p,
        coeffs_q: out.coeffs_q,
        outer_iterations: 0,
        solver_calls: 1,
        inner_iterations: out.stats.inner_iterations,
        corrections: 0,
        termination,
        rho_x: check.rho_x,
        rho_y: check.rho_y,
        thetas: vec![theta],
        trace: None,
        diagnostic: None,
    })
}

enum SideExchange {
    Unchanged,
    Replace { remove: usize, insert: usize },
}

fn plan_side_exchange<T: Scalar>(
    rho: T,
    eta: T,
    exchangeable: bool,
    index_set: &[usize],
    weights: &[T],
    insert: usize,
) -> Result<SideExchange> {
    if rho >= -eta || !exchangeable {
        return Ok(SideExchange::Unchanged);
    }
    let remove = min_weight_index(index_set, weights);
    if insert != remove && index_set.contains(&insert) {
        return Err(Error::CorrectionFailure(format!(
            "insertion candidate {insert} already active: eta too small relative to the \
             inner solver accuracy"
        )));
    }
    if insert == remove {
        return Ok(SideExchange::Unchanged);
    }
    Ok(SideExchange::Replace { remove, insert })
}

fn min_weight_index<T: Scalar>(index_set: &[usize], weights: &[T]) -> usize {
    let mut best = 0;
    for pos in 1..weights.len() {
        let better = weights[pos] < weights[best]
            || (weights[pos] == weights[best] && index_set[pos] < index_set[best]);
        if better {
            best = pos;
        }
    }
    index_set[best]
}

fn apply_exchange(index_set: &[usize], exchange: &SideExchange) -> Vec<usize> {
    match exchange {
        SideExchange::Unchanged => index_set.to_vec(),
        SideExchange::Replace { remove, insert } => {
            let mut next = index_set.to_vec();
            let pos = next.iter().position(|i| i == remove).unwrap();
            next[pos] = *insert;
            next
        }
    }
}

/// Ideal meta-algorithm for the distance problem: exchange on every side
/// whose optimality residual is negative (at an essentially exact grade),
/// with removals through [`index_removal`]. Revisiting an index-set pair
/// aborts the run, mirroring the finite-termination argument.
#[allow(clippy::too_many_arguments)]
pub fn meta_distance_ideal<T: Scalar>(
    cloud_p: &PointCloud<T>,
    cloud_q: &PointCloud<T>,
    solver: &dyn DistanceSolver<T>,
    init_p: Option<&[usize]>,
    init_q: Option<&[usize]>,
    eta: Option<T>,
    max_outer: usize,
    flags: &PairMetaFlags,
) -> Result<PairReport<T>> {
    check_dims(cloud_p, cloud_q)?;
    let setup_p = side_setup(cloud_p, init_p)?;
    let setup_q = side_setup(cloud_q, init_q)?;
    if !setup_p.exchangeable && !setup_q.exchangeable {
        return solve_pair_direct(
            cloud_p,
            cloud_q,
            solver,
            eta.unwrap_or_else(|| cast(IDEAL_ETA)),
        );
    }

    let mut run = init_pair_run(
        cloud_p,
        cloud_q,
        solver,
        setup_p.indices,
        setup_q.indices,
        flags,
    )?;
    let mut visited: HashSet<(Vec<usize>, Vec<usize>)> = HashSet::new();
    visited.insert(visit_key(&run.state));

    loop {
        let slack = eta.unwrap_or_else(|| {
            cast::<T>(IDEAL_ETA) * (run.state.theta * run.state.theta).max(T::one())
        });
        let check = check_pair_optimality(&run.state.v, &run.state.w, cloud_p, cloud_q, slack)?;
        run.state.rho_x = check.rho_x;
        run.state.rho_y = check.rho_y;
        run.record(false);
        if check.satisfied {
            return run.finish(Termination::OptimalEta, None);
        }
        if run.state.outer_iter >= max_outer {
            return run.finish(Termination::IterationCap, None);
        }
        if flags.deadline.is_some_and(|dl| Instant::now() >= dl) {
            return run.finish(Termination::IterationCap, Some("deadline exceeded".into()));
        }

        let ideal_tol = Tolerances::new(slack.max(cast(1e-300)), cast(1e-12), cast(1e-12), 1)
            .unwrap_or_else(|_| Tolerances::default_for_dim(cloud_p.dim()));
        let (removal_p, removal_q) =
            match pair_index_removal(&run.state, cloud_p, cloud_q, &ideal_tol) {
                Ok(r) => r,
                Err(Error::CorrectionFailure(msg)) => {
                    return run.finish(Termination::CorrectionFailure, Some(msg));
                }
                Err(e) => return Err(e),
            };

        let mut changed = false;
        if let Some(remove) = removal_p.filter(|_| setup_p.exchangeable) {
            let insert = check.insert_index_p;
            if insert != remove && run.state.index_set_p.contains(&insert) {
                return run.finish(
                    Termination::CorrectionFailure,
                    Some(format!(
                        "insertion candidate {insert} already active on the first side"
                    )),
                );
            }
            if insert != remove {
                let pos = run
                    .state
                    .index_set_p
                    .iter()
                    .position(|&i| i == remove)
                    .unwrap();
                run.state.index_set_p[pos] = insert;
                changed = true;
            }
        }
        if let Some(remove) = removal_q.filter(|_| setup_q.exchangeable) {
            let insert = check.insert_index_q;
            if insert != remove && run.state.index_set_q.contains(&insert) {
                return run.finish(
                    Termination::CorrectionFailure,
                    Some(format!(
                        "insertion candidate {insert} already active on the second side"
                    )),
                );
            }
            if insert != remove {
                let pos = run
                    .state
                    .index_set_q
                    .iter()
                    .position(|&i| i == remove)
                    .unwrap();
                run.state.index_set_q[pos] = insert;
                changed = true;
            }
        }
        if !changed {
            return run.finish(
                Termination::CorrectionFailure,
                Some(
                    "no side can be exchanged; inner accuracy below the ideal stopping grade"
                        .into(),
                ),
            );
        }
        if !visited.insert(visit_key(&run.state)) {
            return run.finish(
                Termination::CorrectionFailure,
                Some("index-set pair revisited: distance decay broke down".into()),
            );
        }

        let (dense_p, dense_q) = solve_pair_sub(
            solver,
            &run.state.index_set_p,
            cloud_p,
            &run.state.index_set_q,
            cloud_q,
            &mut run.solver_calls,
            &mut run.inner_iterations,
        )?;
        run.state.weights_p = dense_p;
        run.state.weights_q = dense_q;
        run.state.v = combine(&run.state.index_set_p, &run.state.weights_p, cloud_p);
        run.state.w = combine(&run.state.index_set_q, &run.state.weights_q, cloud_q);
        run.state.theta = distance_between(&run.state.v, &run.state.w);
        run.state.outer_iter += 1;
        run.thetas.push(run.state.theta);
    }
}

/// Robust meta-algorithm for approximate pair solvers: exchanges on the
/// violating side(s), accepts only on strict decay of `θ`, repairs
/// coefficients through [`coefficients_correction`] otherwise (at most once
/// per iteration).
pub fn meta_distance_robust<T: Scalar>(
    cloud_p: &PointCloud<T>,
    cloud_q: &PointCloud<T>,
    solver: &dyn DistanceSolver<T>,
    tol: &Tolerances<T>,
    init_p: Option<&[usize]>,
    init_q: Option<&[usize]>,
    flags: &PairMetaFlags,
) -> Result<PairReport<T>> {
    check_dims(cloud_p, cloud_q)?;
    let setup_p = side_setup(cloud_p, init_p)?;
    let setup_q = side_setup(cloud_q, init_q)?;
    if !setup_p.exchangeable && !setup_q.exchangeable {
        return solve_pair_direct(cloud_p, cloud_q, solver, tol.eta);
    }

    let mut run = init_pair_run(
        cloud_p,
        cloud_q,
        solver,
        setup_p.indices,
        setup_q.indices,
        flags,
    )?;
    let mut prev_theta: Option<T> = None;
    let mut pending_correction = false;

    loop {
        let check = check_pair_optimality(&run.state.v, &run.state.w, cloud_p, cloud_q, tol.eta)?;
        run.state.rho_x = check.rho_x;
        run.state.rho_y = check.rho_y;
        run.record(pending_correction);
        pending_correction = false;
        if check.satisfied {
            return run.finish(Termination::OptimalEta, None);
        }
        if run.state.outer_iter >= tol.max_outer {
            return run.finish(Termination::IterationCap, None);
        }
        if flags.deadline.is_some_and(|dl| Instant::now() >= dl) {
            return run.finish(Termination::IterationCap, Some("deadline exceeded".into()));
        }

        let plan_p = match plan_side_exchange(
            check.rho_x,
            tol.eta,
            setup_p.exchangeable,
            &run.state.index_set_p,
            &run.state.weights_p,
            check.insert_index_p,
        ) {
            Ok(p) => p,
            Err(Error::CorrectionFailure(msg)) => {
                return run.finish(Termination::CorrectionFailure, Some(msg));
            }
            Err(e) => return Err(e),
        };
        let plan_q = match plan_side_exchange(
            check.rho_y,
            tol.eta,
            setup_q.exchangeable,
            &run.state.index_set_q,
            &run.state.weights_q,
            check.insert_index_q,
        ) {
            Ok(p) => p,
            Err(Error::CorrectionFailure(msg)) => {
                return run.finish(Termination::CorrectionFailure, Some(msg));
            }
            Err(e) => return Err(e),
        };

        let next_p = apply_exchange(&run.state.index_set_p, &plan_p);
        let next_q = apply_exchange(&run.state.index_set_q, &plan_q);

        let (dense_p, dense_q) = solve_pair_sub(
            solver,
            &next_p,
            cloud_p,
            &next_q,
            cloud_q,
            &mut run.solver_calls,
            &mut run.inner_iterations,
        )?;
        let v = combine(&next_p, &dense_p, cloud_p);
        let w = combine(&next_q, &dense_q, cloud_q);
        let theta = distance_between(&v, &w);
        if theta < run.state.theta {
            prev_theta = Some(run.state.theta);
            run.state.index_set_p = next_p;
            run.state.index_set_q = next_q;
            run.state.weights_p = dense_p;
            run.state.weights_q = dense_q;
            run.state.v = v;
            run.state.w = w;
            run.state.theta = theta;
            run.state.outer_iter += 1;
            run.state.correction_attempted = false;
            run.thetas.push(theta);
            continue;
        }

        if run.state.correction_attempted {
            return run.finish(
                Termination::CorrectionFailure,
                Some("second correction attempt within one iteration".into()),
            );
        }
        run.state.correction_attempted = true;
        match coefficients_correction(&run.state, cloud_p, cloud_q, tol, prev_theta) {
            Ok(c) => {
                if let Some(tp) = prev_theta {
                    if c.theta >= tp {
                        return run.finish(
                            Termination::CorrectionFailure,
                            Some("correction did not preserve the distance decay".into()),
                        );
                    }
                }
                run.corrections += 1;
                pending_correction = true;
                run.state.weights_p = c.weights_p;
                run.state.weights_q = c.weights_q;
                run.state.v = c.v;
                run.state.w = c.w;
                run.state.theta = c.theta;
                let n = run.thetas.len() - 1;
                run.thetas[n] = c.theta;
            }
            Err(Error::CorrectionFailure(msg)) => {
                return run.finish(Termination::CorrectionFailure, Some(msg));
            }
            Err(e) => return Err(e),
        }
    }
}

fn check_dims<T: Scalar>(cloud_p: &PointCloud<T>, cloud_q: &PointCloud<T>) -> Result<()> {
    if cloud_p.dim() != cloud_q.dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud_p.dim(),
            found: cloud_q.dim(),
        });
    }
    Ok(())
}

fn init_pair_run<T: Scalar>(
    cloud_p: &PointCloud<T>,
    cloud_q: &PointCloud<T>,
    solver: &dyn DistanceSolver<T>,
    indices_p: Vec<usize>,
    indices_q: Vec<usize>,
    flags: &PairMetaFlags,
) -> Result<PairRun<T>> {
    let mut solver_calls = 0;
    let mut inner_iterations = 0;
    let (dense_p, dense_q) = solve_pair_sub(
        solver,
        &indices_p,
        cloud_p,
        &indices_q,
        cloud_q,
        &mut solver_calls,
        &mut inner_iterations,
    )?;
    let state = PairState::new(indices_p, dense_p, indices_q, dense_q, cloud_p, cloud_q)?;
    let theta = state.theta;
    Ok(PairRun {
        state,
        thetas: vec![theta],
        trace: flags.trace.then(Vec::new),
        solver_calls,
        inner_iterations,
        corrections: 0,
    })
}

fn visit_key<T>(state: &PairState<T>) -> (Vec<usize>, Vec<usize>) {
    let mut p = state.index_set_p.clone();
    let mut q = state.index_set_q.clone();
    p.sort_unstable();
    q.sort_unstable();
    (p, q)
}
