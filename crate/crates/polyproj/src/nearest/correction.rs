//! Coefficient correction for the robust projection meta-algorithm.
//!
//! Invoked when exchanging the minimum-weight index failed to decrease
//! `θ = ‖y - z‖`: the weight vector over the current index set is repaired
//! so that at least one weight is exactly zero and `θ` does not grow, after
//! which the minimum-weight removal is provably safe.

use crate::error::{Error, Result};
use crate::geometry::{
    best_affine_dependence, distance_between, project_affine_hull, PointCloud, Tolerances,
};
use crate::scalar::{cast, Scalar};

/// Which repair was applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectionBranch {
    /// The affine-hull projection had a negative coefficient: the weights
    /// were blended toward it just far enough to zero one of them.
    Blend,
    /// The affine-hull projection was itself a convex combination (minimum
    /// coefficient zero within tolerance) and was adopted wholesale.
    Adopt,
    /// All affine coefficients were strictly positive, so the points are
    /// affinely dependent; a dependence vector was added to zero one weight
    /// without moving the point.
    Caratheodory,
}

/// Corrected weights and the trial point they evaluate to.
#[derive(Clone, Debug)]
pub struct NearestCorrection<T> {
    pub weights: Vec<T>,
    pub trial_point: Vec<T>,
    pub theta: T,
    pub branch: CorrectionBranch,
}

/// Relative slack for the `‖h - z‖ <= θ` and `θ` non-increase checks.
const CHECK_SLACK: f64 = 1e-9;

/// Repairs a convex-coefficient vector over `index_set` as described in the
/// module docs. `prev_theta`, when given, is the objective of the previous
/// accepted iteration; the dependence branch verifies that its residual is
/// small enough to keep the corrected `θ` strictly below it.
///
/// Violations of the built-in quality checks (coefficient sum, affine
/// projection not closer than the convex one, no usable dependence
/// direction) surface as [`Error::CorrectionFailure`].
pub fn correct_nearest_coefficients<T: Scalar>(
    index_set: &[usize],
    weights: &[T],
    z: &[T],
    cloud: &PointCloud<T>,
    tol: &Tolerances<T>,
    prev_theta: Option<T>,
) -> Result<NearestCorrection<T>> {
    cloud.check_indices(index_set)?;
    if weights.len() != index_set.len() {
        return Err(Error::InvalidCoefficients(
            "weight vector length does not match the index set".into(),
        ));
    }
    let y = combine(index_set, weights, cloud);
    let theta = distance_between(&y, z);
    let slack = cast::<T>(CHECK_SLACK);

    let proj = project_affine_hull(index_set, cloud, z)?;
    let beta_sum: T = proj.beta.iter().copied().sum();
    if (beta_sum - T::one()).abs() > cast(1e-9) {
        return Err(Error::CorrectionFailure(format!(
            "affine projection coefficients sum to {beta_sum}, not 1"
        )));
    }
    let h_dist = distance_between(&proj.point, z);
    if h_dist > theta * (T::one() + slack) + cast(1e-15) {
        return Err(Error::CorrectionFailure(format!(
            "affine-hull projection ({h_dist}) farther than the convex iterate ({theta})"
        )));
    }

    let beta_min = proj.beta.iter().fold(T::infinity(), |m, &b| m.min(b));

    let correction = if beta_min < -tol.eps_zero {
        // Blend toward the affine projection until a weight hits zero.
        let mut lambda = T::infinity();
        let mut blocker = usize::MAX;
        for (pos, (&a, &b)) in weights.iter().zip(proj.beta.iter()).enumerate() {
            if b < -tol.eps_zero {
                let denom = a - b;
                let ratio = a / denom;
                let better = blocker == usize::MAX
                    || ratio < lambda
                    || (ratio == lambda && index_set[pos] < index_set[blocker]);
                if better {
                    lambda = ratio;
                    blocker = pos;
                }
            }
        }
        let mut new_weights: Vec<T> = weights
            .iter()
            .zip(proj.beta.iter())
            .map(|(&a, &b)| (T::one() - lambda) * a + lambda * b)
            .collect();
        sanitize(&mut new_weights, Some(blocker), tol.eps_zero)?;
        let trial_point: Vec<T> = y
            .iter()
            .zip(proj.point.iter())
            .map(|(&a, &b)| (T::one() - lambda) * a + lambda * b)
            .collect();
        let new_theta = distance_between(&trial_point, z);
        NearestCorrection {
            weights: new_weights,
            trial_point,
            theta: new_theta,
            branch: CorrectionBranch::Blend,
        }
    } else if beta_min <= tol.eps_zero {
        // The affine projection is already a convex combination.
        let mut new_weights = proj.beta.clone();
        sanitize(&mut new_weights, None, tol.eps_zero)?;
        NearestCorrection {
            weights: new_weights,
            trial_point: proj.point.clone(),
            theta: h_dist,
            branch: CorrectionBranch::Adopt,
        }
    } else {
        // All affine coefficients strictly positive: the points must be
        // affinely dependent. Zero a weight along the dependence direction.
        let dep = best_affine_dependence(index_set, cloud)?;
        if dep.residual > crate::nearest::dependence_residual_bound(index_set, cloud) {
            return Err(Error::CorrectionFailure(format!(
                "all affine coefficients positive on an affinely independent support \
                 (dependence residual {}); cannot restore a zero weight",
                dep.residual
            )));
        }
        if dep.coeff_sum.abs() <= tol.eps_zero {
            return Err(Error::CorrectionFailure(
                "degenerate dependence normalization (coefficients sum to zero)".into(),
            ));
        }
        let mut lambda = T::infinity();
        let mut blocker = usize::MAX;
        for (pos, (&g, &a)) in dep.gamma.iter().zip(weights.iter()).enumerate() {
            if g < -tol.eps_zero {
                let ratio = -a / g;
                let better = blocker == usize::MAX
                    || ratio < lambda
                    || (ratio == lambda && index_set[pos] < index_set[blocker]);
                if better {
                    lambda = ratio;
                    blocker = pos;
                }
            }
        }
        if blocker == usize::MAX {
            return Err(Error::CorrectionFailure(
                "no negative dependence coefficient available for the correction".into(),
            ));
        }
        if let Some(tp) = prev_theta {
            // The correction moves y by at most lambda * residual; demand
            // that this cannot push θ back above the previous iteration.
            if tp <= theta || dep.residual >= (tp - theta) / lambda {
                return Err(Error::CorrectionFailure(format!(
                    "dependence residual {} too large to preserve the distance decay",
                    dep.residual
                )));
            }
        }
        let mut new_weights: Vec<T> = weights
            .iter()
            .zip(dep.gamma.iter())
            .map(|(&a, &g)| a + lambda * g)
            .collect();
        sanitize(&mut new_weights, Some(blocker), tol.eps_zero)?;
        let trial_point = combine_dense(index_set, &new_weights, cloud);
        let new_theta = distance_between(&trial_point, z);
        NearestCorrection {
            weights: new_weights,
            trial_point,
            theta: new_theta,
            branch: CorrectionBranch::Caratheodory,
        }
    };

    if correction.theta > theta * (T::one() + slack) + cast(1e-15) {
        return Err(Error::CorrectionFailure(format!(
            "correction increased the objective from {theta} to {}",
            correction.theta
        )));
    }
    Ok(correction)
}

/// Zeroes the blocker exactly, clamps round-off negatives, and rejects
/// anything genuinely negative.
fn sanitize<T: Scalar>(weights: &mut [T], blocker: Option<usize>, eps_zero: T) -> Result<()> {
    if let Some(b) = blocker {
        weights[b] = T::zero();
    }
    let floor = -eps_zero * cast::<T>(16.0) - cast::<T>(1e-15);
    for w in weights.iter_mut() {
        if *w < floor {
            return Err(Error::CorrectionFailure(format!(
                "corrected weight {w} is negative beyond tolerance"
            )));
        }
        if *w <= eps_zero {
            *w = T::zero();
        }
    }
    Ok(())
}

fn combine<T: Scalar>(indices: &[usize], weights: &[T], cloud: &PointCloud<T>) -> Vec<T> {
    combine_dense(indices, weights, cloud)
}

fn combine_dense<T: Scalar>(indices: &[usize], weights: &[T], cloud: &PointCloud<T>) -> Vec<T> {
    let mut out = vec![T::zero(); cloud.dim()];
    for (&i, &w) in indices.iter().zip(weights.iter()) {
        for (o, &c) in out.iter_mut().zip(cloud.point(i).iter()) {
            *o += w * c;
        }
    }
    out
}
