//! Coefficients correction method for the robust distance meta-algorithm.
//!
//! When the two-sided minimum-weight exchange fails to decrease
//! `θ = ‖v - w‖`, each side's weights are repaired in turn: the first
//! cloud's side only when its optimality residual is genuinely violated,
//! the second side unconditionally. Each side reuses the single-polytope
//! repair with the *other* side's current point as the projection target,
//! refreshing that point between the two passes.

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Tolerances};
use crate::nearest::{correct_nearest_coefficients, CorrectionBranch};
use crate::scalar::Scalar;

use super::PairState;

/// Corrected pair state produced by [`coefficients_correction`].
#[derive(Clone, Debug)]
pub struct PairCorrection<T> {
    pub weights_p: Vec<T>,
    pub weights_q: Vec<T>,
    pub v: Vec<T>,
    pub w: Vec<T>,
    pub theta: T,
    /// Repair applied to the first cloud's weights, when its residual
    /// warranted one.
    pub branch_p: Option<CorrectionBranch>,
    /// Repair applied to the second cloud's weights (always runs).
    pub branch_q: CorrectionBranch,
}

/// Runs the two-sided coefficient repair on a state whose trial exchange
/// did not decrease `θ`. `prev_theta` is the objective of the previous
/// accepted iteration and bounds the admissible dependence residuals.
pub fn coefficients_correction<T: Scalar>(
    state: &PairState<T>,
    cloud_p: &PointCloud<T>,
    cloud_q: &PointCloud<T>,
    tol: &Tolerances<T>,
    prev_theta: Option<T>,
) -> Result<PairCorrection<T>> {
    let mut weights_p = state.weights_p.clone();
    let mut v = state.v.clone();
    let mut theta = state.theta;

    // First side, guarded by its optimality residual.
    let branch_p = if state.rho_x < -tol.eta {
        let c = correct_nearest_coefficients(
            &state.index_set_p,
            &weights_p,
            &state.w,
            cloud_p,
            tol,
            prev_theta,
        )?;
        weights_p = c.weights;
        v = c.trial_point;
        theta = c.theta;
        Some(c.branch)
    } else {
        None
    };

    // Second side, unconditional, against the refreshed first-side point.
    let c = correct_nearest_coefficients(
        &state.index_set_q,
        &state.weights_q,
        &v,
        cloud_q,
        tol,
        prev_theta,
    )?;
    let weights_q = c.weights;
    let w = c.trial_point;
    let theta_q = c.theta;
    if theta_q > theta * (T::one() + crate::scalar::cast(1e-9)) + crate::scalar::cast(1e-15) {
        return Err(Error::CorrectionFailure(format!(
            "second-side correction increased the objective from {theta} to {theta_q}"
        )));
    }

    Ok(PairCorrection {
        weights_p,
        weights_q,
        v,
        w,
        theta: theta_q,
        branch_p,
        branch_q: c.branch,
    })
}
