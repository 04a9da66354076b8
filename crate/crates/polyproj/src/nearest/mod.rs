//! Acceleration meta-algorithms for projecting a query point onto the
//! convex hull of a large point set.
//!
//! Instead of handing all `ℓ` points to a nearest-point solver, the
//! meta-algorithm applies the solver to a moving subpolytope of `d + 1`
//! points. While the subproblem solution fails the global optimality
//! certificate, one active index is removed (the minimum-weight one, or a
//! provably removable one found through an affine dependence) and the
//! globally most violating vertex is inserted. Strict decay of
//! `θ_n = ‖y_n - z‖` across accepted exchanges makes index sets unrepeatable
//! and termination finite.
//!
//! Two variants are provided: [`meta_project_ideal`] assumes exact-grade
//! inner solves and stops on an essentially exact certificate, while
//! [`meta_project_robust`] works with approximate solvers, testing decay
//! explicitly and repairing coefficient vectors when the minimum-weight
//! removal heuristic misfires.

mod correction;

pub use correction::{correct_nearest_coefficients, CorrectionBranch, NearestCorrection};

use std::collections::HashSet;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{
    best_affine_dependence, check_optimality, check_optimality_scaled, distance_between, dot,
    ConvexCoefficients, PointCloud, Tolerances,
};
use crate::report::{NearestTraceRecord, SolveReport, Termination};
use crate::scalar::{cast, Scalar};
use crate::solvers::{nearest_solver_by_name, InnerConfig, NearestPointSolver, StopCause};

/// Stopping slack of the ideal variant, relative to `max(1, θ²)`.
const IDEAL_ETA: f64 = 1e-12;

/// Live state of a projection meta-run: the active index set, the solver's
/// coefficients over it, and the trial point they evaluate to.
#[derive(Clone, Debug)]
pub struct SubpolytopeState<T> {
    /// Active indices `I_n`, in working order (insertions happen in place).
    pub index_set: Vec<usize>,
    /// Dense coefficients aligned with `index_set`.
    pub weights: Vec<T>,
    /// `y_n = Σ weights · x`, kept consistent with the weights.
    pub trial_point: Vec<T>,
    /// `θ_n = ‖y_n - z‖`.
    pub theta: T,
    /// Accepted outer iterations so far.
    pub outer_iter: usize,
    /// Whether a coefficient correction already ran in this iteration.
    pub correction_attempted: bool,
}

impl<T: Scalar> SubpolytopeState<T> {
    /// Builds a state from dense coefficients, computing the trial point and
    /// its distance to `z`.
    pub fn new(
        index_set: Vec<usize>,
        weights: Vec<T>,
        z: &[T],
        cloud: &PointCloud<T>,
    ) -> Result<Self> {
        cloud.check_indices(&index_set)?;
        if weights.len() != index_set.len() {
            return Err(Error::InvalidCoefficients(
                "weight vector length does not match the index set".into(),
            ));
        }
        let trial_point = combine(&index_set, &weights, cloud);
        let theta = distance_between(&trial_point, z);
        Ok(SubpolytopeState {
            index_set,
            weights,
            trial_point,
            theta,
            outer_iter: 0,
            correction_attempted: false,
        })
    }

    fn refresh(&mut self, z: &[T], cloud: &PointCloud<T>) {
        self.trial_point = combine(&self.index_set, &self.weights, cloud);
        self.theta = distance_between(&self.trial_point, z);
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

/// One application of the steepest-descent exchange rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExchangeDecision {
    /// Index leaving the subpolytope.
    pub remove_index: usize,
    /// Index entering it: the global minimizer of `⟨y - z, x_i⟩`.
    pub insert_index: usize,
}

/// Selects the exchange for a state whose trial point fails the stopping
/// test: removes a minimum-weight index (smallest index on ties) and inserts
/// the global minimizer of `⟨y - z, x_i⟩`.
///
/// An insertion candidate that is already active (other than the removed
/// index itself) signals that the stopping slack is too small relative to
/// the inner solver's accuracy and is reported as a correction failure.
pub fn steepest_descent_exchange<T: Scalar>(
    state: &SubpolytopeState<T>,
    z: &[T],
    cloud: &PointCloud<T>,
) -> Result<ExchangeDecision> {
    let remove_index = min_weight_index(&state.index_set, &state.weights);
    let dir: Vec<T> = state
        .trial_point
        .iter()
        .zip(z.iter())
        .map(|(a, b)| *a - *b)
        .collect();
    let mut insert_index = 0;
    let mut insert_value = T::infinity();
    for (i, p) in cloud.iter_points().enumerate() {
        let val = dot(&dir, p);
        if val < insert_value {
            insert_value = val;
            insert_index = i;
        }
    }
    if insert_index != remove_index && state.index_set.contains(&insert_index) {
        return Err(Error::CorrectionFailure(format!(
            "insertion candidate {insert_index} is already active: stopping slack too small \
             for the inner solver accuracy"
        )));
    }
    Ok(ExchangeDecision {
        remove_index,
        insert_index,
    })
}

/// Residual above which a least-squares dependence vector is rejected as
/// evidence of affine dependence: relative to the spread of the selected
/// points. Genuine dependencies solve to round-off; independent points
/// leave residuals at the geometry's own scale.
pub(crate) fn dependence_residual_bound<T: Scalar>(indices: &[usize], cloud: &PointCloud<T>) -> T {
    let base = cloud.point(indices[0]);
    let mut spread = T::one();
    for &i in &indices[1..] {
        let mut n2 = T::zero();
        for (a, b) in cloud.point(i).iter().zip(base.iter()) {
            let d = *a - *b;
            n2 += d * d;
        }
        let n = n2.sqrt();
        if n > spread {
            spread = n;
        }
    }
    cast::<T>(1e-8) * spread
}

/// Minimum-weight index of the set, breaking weight ties toward the
/// smallest cloud index.
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

/// Finds an index whose removal keeps the current combination inside the
/// hull of the remaining points.
///
/// If some weight is at most `eps_zero`, the smallest such index is
/// returned directly. Otherwise the points must be affinely dependent; a
/// least-squares dependence vector is computed and the index attaining
/// `min { -α_k / γ_k : γ_k < 0 }` is returned, which zeroes that weight in
/// the adjusted combination without moving the point.
pub fn index_removal<T: Scalar>(
    indices: &[usize],
    cloud: &PointCloud<T>,
    alpha: &ConvexCoefficients<T>,
    eps_zero: T,
) -> Result<usize> {
    let dense = alpha.dense_over(indices)?;
    let min_index = min_weight_index(indices, &dense);
    let min_pos = indices.iter().position(|&i| i == min_index).unwrap();
    if dense[min_pos] <= eps_zero {
        return Ok(min_index);
    }

    let dep = best_affine_dependence(indices, cloud)?;
    if dep.residual > dependence_residual_bound(indices, cloud) {
        return Err(Error::CorrectionFailure(format!(
            "all weights positive but the support is not affinely dependent \
             (residual {}); no index is provably removable",
            dep.residual
        )));
    }
    let mut best: Option<(T, usize)> = None;
    for (pos, (&g, &a)) in dep.gamma.iter().zip(dense.iter()).enumerate() {
        if g < -eps_zero {
            let ratio = -a / g;
            let better = match best {
                None => true,
                Some((br, bi)) => ratio < br || (ratio == br && indices[pos] < bi),
            };
            if better {
                best = Some((ratio, indices[pos]));
            }
        }
    }
    match best {
        Some((_, k)) => Ok(k),
        None => Err(Error::CorrectionFailure(
            "no negative dependence coefficient: cannot select a removable index".into(),
        )),
    }
}

/// Options for [`project`].
#[derive(Clone, Debug)]
pub struct ProjectOptions<T> {
    /// Inner solver registry name: `wolfe`, `mdm`, `qp` or `oracle`.
    pub solver: String,
    /// Tolerance overrides for the inner solver.
    pub inner: InnerConfig,
    /// Outer tolerances; `None` picks defaults for the cloud dimension.
    pub tolerances: Option<Tolerances<T>>,
    /// Initial index set; defaults to the first `d + 1` indices.
    pub init: Option<Vec<usize>>,
    /// Record a per-iteration trace in the report.
    pub trace: bool,
    /// Use the distance-scaled stopping criterion
    /// `⟨y - z, x_i - y⟩ >= -eta ‖x_i - y‖` instead of the plain one.
    pub scaled_criterion: bool,
    /// Optional wall-clock cutoff.
    pub deadline: Option<Instant>,
}

impl<T> Default for ProjectOptions<T> {
    fn default() -> Self {
        ProjectOptions {
            solver: "qp".into(),
            inner: InnerConfig::default(),
            tolerances: None,
            init: None,
            trace: false,
            scaled_criterion: false,
            deadline: None,
        }
    }
}

/// Projects `z` onto the hull of `cloud` with the robust meta-algorithm,
/// building the inner solver from the options.
pub fn project<T: Scalar>(
    z: &[T],
    cloud: &PointCloud<T>,
    opts: &ProjectOptions<T>,
) -> Result<SolveReport<T>> {
    let mut inner = opts.inner;
    inner.deadline = inner.deadline.or(opts.deadline);
    let solver = nearest_solver_by_name::<T>(&opts.solver, &inner)?;
    let tol = opts
        .tolerances
        .unwrap_or_else(|| Tolerances::default_for_dim(cloud.dim()));
    meta_project_robust(
        z,
        cloud,
        solver.as_ref(),
        &tol,
        opts.init.as_deref(),
        &MetaFlags {
            trace: opts.trace,
            scaled: opts.scaled_criterion,
            deadline: opts.deadline,
        },
    )
}

/// Behavioural flags shared by both meta variants.
#[derive(Clone, Copy, Debug, Default)]
pub struct MetaFlags {
    pub trace: bool,
    pub scaled: bool,
    pub deadline: Option<Instant>,
}

struct BestIterate<T> {
    theta: T,
    index_set: Vec<usize>,
    weights: Vec<T>,
    trial_point: Vec<T>,
}

struct RunState<T> {
    state: SubpolytopeState<T>,
    thetas: Vec<T>,
    trace: Option<Vec<NearestTraceRecord<T>>>,
    solver_calls: usize,
    inner_iterations: usize,
    corrections_step3: usize,
    corrections_step4: usize,
    best: Option<BestIterate<T>>,
}

impl<T: Scalar> RunState<T> {
    /// Snapshots the current state when it beats every earlier iterate, so
    /// abnormal terminations can report the best point seen.
    fn remember_best(&mut self) {
        if self
            .best
            .as_ref()
            .is_none_or(|b| self.state.theta < b.theta)
        {
            self.best = Some(BestIterate {
                theta: self.state.theta,
                index_set: self.state.index_set.clone(),
                weights: self.state.weights.clone(),
                trial_point: self.state.trial_point.clone(),
            });
        }
    }

    fn record(&mut self, worst: T, step3: bool, step4: bool) {
        if let Some(tr) = self.trace.as_mut() {
            tr.push(NearestTraceRecord {
                n: self.state.outer_iter,
                index_set: self.state.index_set.clone(),
                theta: self.state.theta,
                worst_value: worst,
                correction_step3: step3,
                correction_step4: step4,
            });
        }
    }

    fn finish(
        mut self,
        z: &[T],
        cloud: &PointCloud<T>,
        termination: Termination,
        diagnostic: Option<String>,
    ) -> Result<SolveReport<T>> {
        if termination != Termination::OptimalEta {
            if let Some(best) = self.best.take() {
                if best.theta < self.state.theta {
                    self.state.index_set = best.index_set;
                    self.state.weights = best.weights;
                    self.state.trial_point = best.trial_point;
                    self.state.theta = best.theta;
                }
            }
        }
        let coeffs_global =
            ConvexCoefficients::from_dense(&self.state.index_set, &self.state.weights, cast(1e-9))?;
        let final_check = check_optimality(&self.state.trial_point, z, cloud, T::zero())?;
        Ok(SolveReport {
            projection: self.state.trial_point,
            coeffs_global,
            outer_iterations: self.state.outer_iter,
            solver_calls: self.solver_calls,
            inner_iterations: self.inner_iterations,
            corrections_step3: self.corrections_step3,
            corrections_step4: self.corrections_step4,
            termination,
            final_worst_value: final_check.worst_value,
            theta: self.state.theta,
            thetas: self.thetas,
            trace: self.trace,
            diagnostic,
        })
    }
}

fn solve_sub<T: Scalar>(
    solver: &dyn NearestPointSolver<T>,
    z: &[T],
    indices: &[usize],
    cloud: &PointCloud<T>,
    calls: &mut usize,
    inner: &mut usize,
) -> Result<Vec<T>> {
    let out = solver.solve(z, indices, cloud)?;
    *calls += 1;
    *inner += out.stats.inner_iterations;
    out.coeffs.dense_over(indices)
}

fn initial_indices<T: Scalar>(cloud: &PointCloud<T>, init: Option<&[usize]>) -> Result<Vec<usize>> {
    let d = cloud.dim();
    let want = d + 1;
    match init {
        Some(list) => {
            cloud.check_indices(list)?;
            if list.len() != want {
                return Err(Error::InvalidCloud(format!(
                    "initial index set must hold exactly {want} distinct indices, got {}",
                    list.len()
                )));
            }
            Ok(list.to_vec())
        }
        None => Ok((0..want).collect()),
    }
}

/// Solves the whole problem with one direct solver call; used whenever the
/// cloud has fewer than `d + 1` points and for unaccelerated baselines.
pub fn solve_direct<T: Scalar>(
    z: &[T],
    cloud: &PointCloud<T>,
    solver: &dyn NearestPointSolver<T>,
    eta: T,
) -> Result<SolveReport<T>> {
    let all: Vec<usize> = (0..cloud.len()).collect();
    let out = solver.solve(z, &all, cloud)?;
    let projection = out.coeffs.evaluate(cloud)?;
    let theta = distance_between(&projection, z);
    let check = check_optimality(&projection, z, cloud, eta)?;
    let termination = if check.satisfied && out.stats.terminated_by == StopCause::Tolerance {
        Termination::OptimalEta
    } else {
        Termination::IterationCap
    };
    Ok(SolveReport {
        projection,
        coeffs_global: out.coeffs,
        outer_iterations: 0,
        solver_calls: 1,
        inner_iterations: out.stats.inner_iterations,
        corrections_step3: 0,
        corrections_step4: 0,
        termination,
        final_worst_value: check.worst_value,
        theta,
        thetas: vec![theta],
        trace: None,
        diagnostic: None,
    })
}

/// Ideal meta-algorithm: exchange while the (essentially exact) global
/// optimality certificate fails.
///
/// The stopping slack defaults to `1e-12 · max(1, θ²)`; pass `eta` to loosen
/// it when the inner solver cannot certify at that grade (the MDM gap
/// tolerance, for instance, sits well above it). Removal uses
/// [`index_removal`], so affinely dependent subpolytopes are handled. As a
/// programmatic counterpart of the finite-termination argument, a revisited
/// index set aborts the run.
pub fn meta_project_ideal<T: Scalar>(
    z: &[T],
    cloud: &PointCloud<T>,
    solver: &dyn NearestPointSolver<T>,
    init: Option<&[usize]>,
    eta: Option<T>,
    max_outer: usize,
    flags: &MetaFlags,
) -> Result<SolveReport<T>> {
    let d = cloud.dim();
    if cloud.len() < d + 1 {
        return solve_direct(z, cloud, solver, eta.unwrap_or_else(|| cast(IDEAL_ETA)));
    }
    let index_set = initial_indices(cloud, init)?;
    let mut run = RunState {
        state: SubpolytopeState::new(index_set, vec![T::zero(); d + 1], z, cloud)?,
        thetas: Vec::new(),
        trace: flags.trace.then(Vec::new),
        solver_calls: 0,
        inner_iterations: 0,
        corrections_step3: 0,
        corrections_step4: 0,
        best: None,
    };
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    visited.insert(sorted(&run.state.index_set));

    loop {
        let dense = solve_sub(
            solver,
            z,
            &run.state.index_set,
            cloud,
            &mut run.solver_calls,
            &mut run.inner_iterations,
        )?;
        run.state.weights = dense;
        run.state.refresh(z, cloud);
        run.thetas.push(run.state.theta);
        run.remember_best();

        let slack = eta.unwrap_or_else(|| {
            cast::<T>(IDEAL_ETA) * (run.state.theta * run.state.theta).max(T::one())
        });
        let check = check_optimality(&run.state.trial_point, z, cloud, slack)?;
        run.record(check.worst_value, false, false);
        if check.satisfied {
            return run.finish(z, cloud, Termination::OptimalEta, None);
        }
        if run.state.outer_iter >= max_outer {
            return run.finish(z, cloud, Termination::IterationCap, None);
        }
        if flags.deadline.is_some_and(|dl| Instant::now() >= dl) {
            return run.finish(
                z,
                cloud,
                Termination::IterationCap,
                Some("deadline exceeded".into()),
            );
        }

        let coeffs =
            ConvexCoefficients::from_dense(&run.state.index_set, &run.state.weights, cast(1e-9))?;
        let eps_zero = cast::<T>(1e-12);
        let remove = match index_removal(&run.state.index_set, cloud, &coeffs, eps_zero) {
            Ok(k) => k,
            Err(Error::CorrectionFailure(msg)) => {
                return run.finish(z, cloud, Termination::CorrectionFailure, Some(msg));
            }
            Err(e) => return Err(e),
        };
        let insert = check.insert_index;
        if insert != remove && run.state.index_set.contains(&insert) {
            return run.finish(
                z,
                cloud,
                Termination::CorrectionFailure,
                Some(format!(
                    "insertion candidate {insert} already active: inner accuracy below the \
                     ideal stopping grade"
                )),
            );
        }
        if insert == remove {
            return run.finish(
                z,
                cloud,
                Termination::CorrectionFailure,
                Some("exchange is a no-op; inner accuracy below the ideal stopping grade".into()),
            );
        }
        let pos = run
            .state
            .index_set
            .iter()
            .position(|&i| i == remove)
            .expect("removal index is active");
        run.state.index_set[pos] = insert;
        if !visited.insert(sorted(&run.state.index_set)) {
            return run.finish(
                z,
                cloud,
                Termination::CorrectionFailure,
                Some("index set revisited: distance decay broke down".into()),
            );
        }
        run.state.outer_iter += 1;
    }
}

/// Robust meta-algorithm for approximate inner solvers.
///
/// Per iteration: test the global certificate with slack `tol.eta`; exchange
/// the minimum-weight index against the global minimizer; accept the new
/// subpolytope only if `θ` strictly decreased. On rejection the coefficient
/// vector over the *old* index set is corrected (by blending toward the
/// affine-hull projection of `z` or through an affine-dependence step) so
/// that a zero weight identifies a provably removable index; a second
/// correction within one iteration terminates the run as failed.
pub fn meta_project_robust<T: Scalar>(
    z: &[T],
    cloud: &PointCloud<T>,
    solver: &dyn NearestPointSolver<T>,
    tol: &Tolerances<T>,
    init: Option<&[usize]>,
    flags: &MetaFlags,
) -> Result<SolveReport<T>> {
    let d = cloud.dim();
    if z.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: z.len(),
        });
    }
    if cloud.len() < d + 1 {
        return solve_direct(z, cloud, solver, tol.eta);
    }

    let index_set = initial_indices(cloud, init)?;
    let mut run = RunState {
        state: SubpolytopeState::new(index_set, vec![T::zero(); d + 1], z, cloud)?,
        thetas: Vec::new(),
        trace: flags.trace.then(Vec::new),
        solver_calls: 0,
        inner_iterations: 0,
        corrections_step3: 0,
        corrections_step4: 0,
        best: None,
    };

    // Step 0: solve on the initial subpolytope.
    let dense = solve_sub(
        solver,
        z,
        &run.state.index_set,
        cloud,
        &mut run.solver_calls,
        &mut run.inner_iterations,
    )?;
    run.state.weights = dense;
    run.state.refresh(z, cloud);
    run.thetas.push(run.state.theta);
    run.remember_best();

    // θ of the previously accepted iteration, once one exists.
    let mut prev_theta: Option<T> = None;
    let mut pending_step3 = false;
    let mut pending_step4 = false;

    loop {
        // Step 1: stopping test and exchange selection.
        let check = if flags.scaled {
            check_optimality_scaled(&run.state.trial_point, z, cloud, tol.eta)?
        } else {
            check_optimality(&run.state.trial_point, z, cloud, tol.eta)?
        };
        run.record(check.worst_value, pending_step3, pending_step4);
        pending_step3 = false;
        pending_step4 = false;
        if check.satisfied {
            return run.finish(z, cloud, Termination::OptimalEta, None);
        }
        if run.state.outer_iter >= tol.max_outer {
            return run.finish(z, cloud, Termination::IterationCap, None);
        }
        if flags.deadline.is_some_and(|dl| Instant::now() >= dl) {
            return run.finish(
                z,
                cloud,
                Termination::IterationCap,
                Some("deadline exceeded".into()),
            );
        }

        let remove = min_weight_index(&run.state.index_set, &run.state.weights);
        let insert = check.insert_index;
        if insert != remove && run.state.index_set.contains(&insert) {
            return run.finish(
                z,
                cloud,
                Termination::CorrectionFailure,
                Some(format!(
                    "insertion candidate {insert} already active: eta too small relative to \
                     the inner solver accuracy"
                )),
            );
        }
        let mut next_set = run.state.index_set.clone();
        if insert != remove {
            let pos = next_set.iter().position(|&i| i == remove).unwrap();
            next_set[pos] = insert;
        }

        // Step 2: trial solve and decay test.
        let dense = solve_sub(
            solver,
            z,
            &next_set,
            cloud,
            &mut run.solver_calls,
            &mut run.inner_iterations,
        )?;
        let trial_point = combine(&next_set, &dense, cloud);
        let trial_theta = distance_between(&trial_point, z);
        if trial_theta < run.state.theta {
            prev_theta = Some(run.state.theta);
            run.state.index_set = next_set;
            run.state.weights = dense;
            run.state.trial_point = trial_point;
            run.state.theta = trial_theta;
            run.state.outer_iter += 1;
            run.state.correction_attempted = false;
            run.thetas.push(trial_theta);
            run.remember_best();
            continue;
        }

        // Steps 3/4: correct the coefficients over the old index set.
        if run.state.correction_attempted {
            return run.finish(
                z,
                cloud,
                Termination::CorrectionFailure,
                Some("second correction attempt within one iteration".into()),
            );
        }
        run.state.correction_attempted = true;
        let corrected = correct_nearest_coefficients(
            &run.state.index_set,
            &run.state.weights,
            z,
            cloud,
            tol,
            prev_theta,
        );
        match corrected {
            Ok(c) => {
                if let Some(tp) = prev_theta {
                    if c.theta >= tp {
                        return run.finish(
                            z,
                            cloud,
                            Termination::CorrectionFailure,
                            Some("correction did not preserve the distance decay".into()),
                        );
                    }
                }
                match c.branch {
                    CorrectionBranch::Blend | CorrectionBranch::Adopt => {
                        run.corrections_step3 += 1;
                        pending_step3 = true;
                    }
                    CorrectionBranch::Caratheodory => {
                        run.corrections_step4 += 1;
                        pending_step4 = true;
                    }
                }
                run.state.weights = c.weights;
                run.state.trial_point = c.trial_point;
                run.state.theta = c.theta;
                let n = run.thetas.len() - 1;
                run.thetas[n] = c.theta;
                run.remember_best();
            }
            Err(Error::CorrectionFailure(msg)) => {
                return run.finish(z, cloud, Termination::CorrectionFailure, Some(msg));
            }
            Err(e) => return Err(e),
        }
    }
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}
