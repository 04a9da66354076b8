//! Interchangeable inner solvers for the nearest-point and distance
//! subproblems.
//!
//! Every solver returns convex-combination coefficients rather than a bare
//! point: the meta-algorithms need the weights to drive their exchange rules.
//! Four nearest-point solvers are provided (Wolfe, MDM, a dense active-set
//! QP and a brute-force enumeration oracle) plus distance solvers built by
//! Minkowski-difference reduction, a native pair QP, and a pair enumeration
//! oracle.

mod mdm;
mod oracle;
mod pair;
mod qp;
mod wolfe;

pub use mdm::MdmSolver;
pub use oracle::{OracleSolver, PairOracleSolver};
pub use pair::{distance_by_reduction, PairQpSolver, ReductionDistanceSolver};
pub use qp::QpSolver;
pub use wolfe::WolfeSolver;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{ConvexCoefficients, PointCloud};
use crate::linalg::{min_norm_least_squares, Mat};
use crate::scalar::Scalar;

/// How a solver run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopCause {
    /// The solver's own stopping rule fired.
    Tolerance,
    /// Iteration cap or deadline hit; the best iterate so far was returned.
    IterationCap,
}

/// Per-call solver accounting.
#[derive(Clone, Copy, Debug)]
pub struct SolverStats {
    pub inner_iterations: usize,
    pub terminated_by: StopCause,
}

/// Coefficients plus accounting returned by a nearest-point solver.
#[derive(Clone, Debug)]
pub struct SolverOutcome<T> {
    pub coeffs: ConvexCoefficients<T>,
    pub stats: SolverStats,
}

/// Coefficient pair plus accounting returned by a distance solver.
#[derive(Clone, Debug)]
pub struct PairOutcome<T> {
    pub coeffs_p: ConvexCoefficients<T>,
    pub coeffs_q: ConvexCoefficients<T>,
    pub stats: SolverStats,
}

/// A solver for `min_{x in conv{x_i : i in indices}} ‖x - w‖` returning
/// convex coefficients supported inside `indices`.
pub trait NearestPointSolver<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn solve(&self, w: &[T], indices: &[usize], cloud: &PointCloud<T>) -> Result<SolverOutcome<T>>;
}

/// A solver for the closest pair between two point-cloud hulls.
pub trait DistanceSolver<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn solve_pair(
        &self,
        indices_p: &[usize],
        cloud_p: &PointCloud<T>,
        indices_q: &[usize],
        cloud_q: &PointCloud<T>,
    ) -> Result<PairOutcome<T>>;
}

/// Tolerance overrides applied on top of a solver's defaults
/// (`inner.epsilon` and `inner.max_iter`).
#[derive(Clone, Copy, Debug, Default)]
pub struct InnerConfig {
    pub epsilon: Option<f64>,
    pub max_iter: Option<usize>,
    pub deadline: Option<Instant>,
}

pub const NEAREST_SOLVER_NAMES: &str = "wolfe, mdm, qp, oracle";
pub const DISTANCE_SOLVER_NAMES: &str = "wolfe, mdm, qp, oracle, pair-qp, pair-oracle";

/// Builds a nearest-point solver from its registry name.
pub fn nearest_solver_by_name<T: Scalar>(
    name: &str,
    cfg: &InnerConfig,
) -> Result<Box<dyn NearestPointSolver<T>>> {
    match name {
        "wolfe" => Ok(Box::new(WolfeSolver::from_config(cfg))),
        "mdm" => Ok(Box::new(MdmSolver::from_config(cfg))),
        "qp" => Ok(Box::new(QpSolver::from_config(cfg))),
        "oracle" => Ok(Box::new(OracleSolver::from_config(cfg))),
        other => Err(Error::UnknownSolver(other.into(), NEAREST_SOLVER_NAMES)),
    }
}

/// Builds a distance solver from its registry name. The four nearest-solver
/// names select Minkowski-difference reduction around that inner solver;
/// `pair-qp` is the native two-sided active-set QP and `pair-oracle` the
/// enumeration oracle.
pub fn distance_solver_by_name<T: Scalar>(
    name: &str,
    cfg: &InnerConfig,
) -> Result<Box<dyn DistanceSolver<T>>> {
    match name {
        "wolfe" | "mdm" | "qp" | "oracle" => Ok(Box::new(ReductionDistanceSolver::new(
            nearest_solver_by_name::<T>(name, cfg)?,
        ))),
        "pair-qp" => Ok(Box::new(PairQpSolver::from_config(cfg))),
        "pair-oracle" => Ok(Box::new(PairOracleSolver::from_config(cfg))),
        other => Err(Error::UnknownSolver(other.into(), DISTANCE_SOLVER_NAMES)),
    }
}

/// Copies the selected cloud points into a flat buffer translated by `-w`,
/// so solvers can work on the origin-projection form.
pub(crate) fn translated_points<T: Scalar>(
    w: &[T],
    indices: &[usize],
    cloud: &PointCloud<T>,
) -> Result<Vec<T>> {
    let d = cloud.dim();
    if w.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: w.len(),
        });
    }
    cloud.check_indices(indices)?;
    let mut flat = Vec::with_capacity(indices.len() * d);
    for &i in indices {
        for (c, t) in cloud.point(i).iter().zip(w.iter()) {
            flat.push(*c - *t);
        }
    }
    Ok(flat)
}

#[inline]
pub(crate) fn flat_point<T>(flat: &[T], dim: usize, pos: usize) -> &[T] {
    &flat[pos * dim..(pos + 1) * dim]
}

/// Coefficients of the minimum-norm point of the affine hull of the selected
/// translated points: minimizes `‖Σ c_s p_s‖` subject to `Σ c_s = 1`.
pub(crate) fn affine_minimum<T: Scalar>(flat: &[T], dim: usize, positions: &[usize]) -> Vec<T> {
    let n = positions.len();
    debug_assert!(n >= 1);
    if n == 1 {
        return vec![T::one()];
    }
    let base = flat_point(flat, dim, positions[0]);
    let mut a = Mat::zeros(dim, n - 1);
    for (c, &pos) in positions[1..].iter().enumerate() {
        let p = flat_point(flat, dim, pos);
        for r in 0..dim {
            a.set(r, c, p[r] - base[r]);
        }
    }
    let rhs: Vec<T> = base.iter().map(|v| -*v).collect();
    let g = min_norm_least_squares(a, rhs);
    let tail: T = g.iter().copied().sum();
    let mut beta = Vec::with_capacity(n);
    beta.push(T::one() - tail);
    beta.extend_from_slice(&g);
    beta
}

pub(crate) fn deadline_exceeded(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}
