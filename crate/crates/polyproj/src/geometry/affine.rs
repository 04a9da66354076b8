//! Affine-hull projection and affine-dependence detection for small index
//! sets. Both reduce to small least-squares systems after eliminating the
//! sum constraint against a pivot point.

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::linalg::{min_norm_least_squares, Mat};
use crate::scalar::Scalar;

/// Result of projecting a target onto the affine hull of selected points.
#[derive(Clone, Debug)]
pub struct AffineProjection<T> {
    /// Affine coefficients aligned with the index list; they sum to 1 but
    /// may be negative.
    pub beta: Vec<T>,
    /// The projected point `Σ beta_i x_i`.
    pub point: Vec<T>,
}

/// Minimizes `‖Σ beta_i x_i - target‖` subject to `Σ beta_i = 1` with signs
/// unrestricted, i.e. projects `target` onto the affine hull of the selected
/// points.
///
/// The constraint is eliminated against the first index: with free
/// coefficients `g` on the remaining points, the problem becomes an
/// unconstrained least squares in the difference directions. Rank-deficient
/// hulls are handled by the minimum-norm solve, so the projected point is
/// always the true affine-hull projection and the returned coefficients are
/// deterministic.
pub fn project_affine_hull<T: Scalar>(
    indices: &[usize],
    cloud: &PointCloud<T>,
    target: &[T],
) -> Result<AffineProjection<T>> {
    cloud.check_indices(indices)?;
    let d = cloud.dim();
    if target.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: target.len(),
        });
    }
    let k = indices.len();
    let pivot = cloud.point(indices[0]);
    if k == 1 {
        return Ok(AffineProjection {
            beta: vec![T::one()],
            point: pivot.to_vec(),
        });
    }

    let mut a = Mat::zeros(d, k - 1);
    for (c, &idx) in indices[1..].iter().enumerate() {
        let p = cloud.point(idx);
        for r in 0..d {
            a.set(r, c, p[r] - pivot[r]);
        }
    }
    let rhs: Vec<T> = target
        .iter()
        .zip(pivot.iter())
        .map(|(t, p)| *t - *p)
        .collect();
    let g = min_norm_least_squares(a, rhs);

    let mut beta = Vec::with_capacity(k);
    let tail_sum: T = g.iter().copied().sum();
    beta.push(T::one() - tail_sum);
    beta.extend_from_slice(&g);

    let mut point = vec![T::zero(); d];
    for (&idx, &b) in indices.iter().zip(beta.iter()) {
        for (o, &c) in point.iter_mut().zip(cloud.point(idx).iter()) {
            *o += b * c;
        }
    }
    Ok(AffineProjection { beta, point })
}

/// An affine dependence among selected points.
#[derive(Clone, Debug)]
pub struct AffineDependence<T> {
    /// Coefficients aligned with the index list. The pivot entry is the
    /// exact negation of the float sum of the others, so the whole vector
    /// sums to zero by construction.
    pub gamma: Vec<T>,
    /// Position of the pivot within the index list.
    pub pivot_pos: usize,
    /// `‖Σ gamma_i x_i‖`: zero (up to round-off) exactly when the points are
    /// affinely dependent. Callers decide how much residual to accept.
    pub residual: T,
    /// Sum of the non-pivot coefficients (targets 1 in the least-squares
    /// system); a value near zero signals a failed normalization.
    pub coeff_sum: T,
}

/// Computes a least-squares affine-dependence vector for the selected
/// points: coefficients `gamma` with `Σ gamma_i (x_i - x_pivot) ≈ 0` over
/// the non-pivot entries, normalized by `Σ gamma_i = 1` there, and the pivot
/// entry set to minus their sum.
///
/// When the points are affinely dependent the system is consistent and the
/// residual vanishes; otherwise the residual reports how far from dependent
/// the points are.
pub fn affine_dependence_vector<T: Scalar>(
    indices: &[usize],
    cloud: &PointCloud<T>,
    pivot: usize,
) -> Result<AffineDependence<T>> {
    cloud.check_indices(indices)?;
    if indices.len() < 2 {
        return Err(Error::InvalidCoefficients(
            "affine dependence needs at least two indices".into(),
        ));
    }
    let pivot_pos = indices
        .iter()
        .position(|&i| i == pivot)
        .ok_or(Error::IndexOutOfRange {
            index: pivot,
            len: indices.len(),
        })?;

    let d = cloud.dim();
    let k = indices.len();
    let others: Vec<usize> = indices.iter().copied().filter(|&i| i != pivot).collect();
    let base = cloud.point(pivot);

    // Stacked system: d rows of difference directions plus one row of ones.
    let mut a = Mat::zeros(d + 1, k - 1);
    for (c, &idx) in others.iter().enumerate() {
        let p = cloud.point(idx);
        for r in 0..d {
            a.set(r, c, p[r] - base[r]);
        }
        a.set(d, c, T::one());
    }
    let mut rhs = vec![T::zero(); d + 1];
    rhs[d] = T::one();
    let g = min_norm_least_squares(a, rhs);

    let coeff_sum: T = g.iter().copied().sum();
    let mut gamma = vec![T::zero(); k];
    let mut gi = g.iter();
    for (pos, _) in indices.iter().enumerate() {
        if pos == pivot_pos {
            gamma[pos] = -coeff_sum;
        } else {
            gamma[pos] = *gi.next().expect("one coefficient per non-pivot index");
        }
    }

    // Residual of the direction block, evaluated on the original data.
    let mut r2 = T::zero();
    for (dim, &b) in base.iter().enumerate() {
        let mut s = T::zero();
        for (c, &idx) in others.iter().enumerate() {
            s += g[c] * (cloud.point(idx)[dim] - b);
        }
        r2 += s * s;
    }

    Ok(AffineDependence {
        gamma,
        pivot_pos,
        residual: r2.sqrt(),
        coeff_sum,
    })
}

/// Computes an affine dependence trying every index as pivot and keeping
/// the smallest direction-block residual (earliest pivot on ties).
///
/// The fixed-pivot normalization `Σ gamma = 1` over the non-pivot entries is
/// infeasible when every dependence of the points has coefficient zero at
/// that pivot (duplicate-point pairs are the typical case). Any nonzero
/// dependence has a nonzero coefficient somewhere, so some pivot always
/// normalizes; scanning pivots recovers it.
pub fn best_affine_dependence<T: Scalar>(
    indices: &[usize],
    cloud: &PointCloud<T>,
) -> Result<AffineDependence<T>> {
    let mut best: Option<AffineDependence<T>> = None;
    for &pivot in indices {
        let dep = affine_dependence_vector(indices, cloud, pivot)?;
        if best.as_ref().is_none_or(|b| dep.residual < b.residual) {
            best = Some(dep);
        }
    }
    Ok(best.expect("indices are nonempty"))
}

/// Checks the defining property of an affine-hull projection: the residual
/// `h - target` is orthogonal to every difference direction of the hull.
/// Returns the largest inner-product magnitude.
pub fn max_orthogonality_defect<T: Scalar>(
    indices: &[usize],
    cloud: &PointCloud<T>,
    target: &[T],
    h: &[T],
) -> T {
    let resid: Vec<T> = h.iter().zip(target.iter()).map(|(a, b)| *a - *b).collect();
    let mut worst = T::zero();
    for (pos, &i) in indices.iter().enumerate() {
        for &j in &indices[pos + 1..] {
            let mut ip = T::zero();
            for ((a, b), r) in cloud
                .point(i)
                .iter()
                .zip(cloud.point(j).iter())
                .zip(resid.iter())
            {
                ip += (*a - *b) * *r;
            }
            if ip.abs() > worst {
                worst = ip.abs();
            }
        }
    }
    worst
}
