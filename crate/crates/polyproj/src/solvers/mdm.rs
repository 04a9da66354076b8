//! Mitchell–Dem'yanov–Malozemov weight-transfer method.
//!
//! Each iteration moves mass from the supported index maximizing
//! `⟨v, p_i⟩` to the index minimizing it over the whole set, stepping by the
//! clipped exact line minimum, until the gap
//! `delta = ⟨v, p_max - p_min⟩` falls below the tolerance.

use crate::error::Result;
use crate::geometry::{dot, ConvexCoefficients, PointCloud};
use crate::scalar::{cast, Scalar};
use crate::solvers::{
    deadline_exceeded, flat_point, translated_points, InnerConfig, NearestPointSolver,
    SolverOutcome, SolverStats, StopCause,
};

#[derive(Clone, Debug)]
pub struct MdmSolver {
    /// Gap tolerance: stop once `delta < epsilon`.
    pub epsilon: f64,
    pub max_iter: usize,
    pub deadline: Option<std::time::Instant>,
}

impl Default for MdmSolver {
    fn default() -> Self {
        MdmSolver {
            epsilon: 1e-8,
            max_iter: 1_000_000,
            deadline: None,
        }
    }
}

impl MdmSolver {
    pub fn from_config(cfg: &InnerConfig) -> Self {
        let mut s = MdmSolver::default();
        if let Some(eps) = cfg.epsilon {
            s.epsilon = eps;
        }
        if let Some(cap) = cfg.max_iter {
            s.max_iter = cap;
        }
        s.deadline = cfg.deadline;
        s
    }
}

/// The running point drifts from `Σ α_i p_i` under incremental updates;
/// recompute it from scratch this often.
const REFRESH_EVERY: usize = 1024;

impl<T: Scalar> NearestPointSolver<T> for MdmSolver {
    fn name(&self) -> &str {
        "mdm"
    }

    fn solve(&self, w: &[T], indices: &[usize], cloud: &PointCloud<T>) -> Result<SolverOutcome<T>> {
        let d = cloud.dim();
        let flat = translated_points(w, indices, cloud)?;
        let k = indices.len();
        let eps = cast::<T>(self.epsilon);

        // Start from the vertex nearest the query.
        let mut start = 0;
        let mut best_n2 = T::infinity();
        for pos in 0..k {
            let p = flat_point(&flat, d, pos);
            let n2 = dot(p, p);
            if n2 < best_n2 {
                best_n2 = n2;
                start = pos;
            }
        }
        let mut alpha = vec![T::zero(); k];
        alpha[start] = T::one();
        let mut v: Vec<T> = flat_point(&flat, d, start).to_vec();

        let mut iterations = 0usize;
        let mut cause = StopCause::IterationCap;
        while iterations < self.max_iter {
            iterations += 1;
            if iterations.is_multiple_of(REFRESH_EVERY) {
                refresh(&mut v, &alpha, &flat, d);
                if deadline_exceeded(self.deadline) {
                    break;
                }
            }

            let mut imax = usize::MAX;
            let mut max_val = T::neg_infinity();
            let mut imin = 0;
            let mut min_val = T::infinity();
            for (pos, &a) in alpha.iter().enumerate() {
                let val = dot(&v, flat_point(&flat, d, pos));
                if a > T::zero() && val > max_val {
                    max_val = val;
                    imax = pos;
                }
                if val < min_val {
                    min_val = val;
                    imin = pos;
                }
            }
            let delta = max_val - min_val;
            if delta < eps {
                cause = StopCause::Tolerance;
                break;
            }

            // Exact line minimum along transферring mass imax -> imin,
            // clipped to a full transfer.
            let pmax = flat_point(&flat, d, imax);
            let pmin = flat_point(&flat, d, imin);
            let mut dir_n2 = T::zero();
            for (a, b) in pmin.iter().zip(pmax.iter()) {
                let diff = *a - *b;
                dir_n2 += diff * diff;
            }
            let amax = alpha[imax];
            let t = if dir_n2 <= T::zero() {
                T::one()
            } else {
                (delta / (amax * dir_n2)).min(T::one())
            };
            let shift = t * amax;
            alpha[imax] = amax * (T::one() - t);
            alpha[imin] += shift;
            for ((c, &pn), &px) in v.iter_mut().zip(pmin.iter()).zip(pmax.iter()) {
                *c += shift * (pn - px);
            }
        }

        let mut support = Vec::new();
        let mut weights = Vec::new();
        for (pos, &a) in alpha.iter().enumerate() {
            if a > T::zero() {
                support.push(indices[pos]);
                weights.push(a);
            }
        }
        let coeffs = ConvexCoefficients::from_dense(&support, &weights, cast(1e-9))?;
        Ok(SolverOutcome {
            coeffs,
            stats: SolverStats {
                inner_iterations: iterations,
                terminated_by: cause,
            },
        })
    }
}

fn refresh<T: Scalar>(v: &mut [T], alpha: &[T], flat: &[T], d: usize) {
    for c in v.iter_mut() {
        *c = T::zero();
    }
    for (pos, &a) in alpha.iter().enumerate() {
        if a > T::zero() {
            for (c, &p) in v.iter_mut().zip(flat_point(flat, d, pos).iter()) {
                *c += a * p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance_between;

    #[test]
    fn singleton_index_set() {
        let cloud = PointCloud::from_rows(&[vec![3.0, 4.0]]).unwrap();
        let out = MdmSolver::default()
            .solve(&[0.0, 0.0], &[0], &cloud)
            .unwrap();
        assert_eq!(out.coeffs.support(), &[0]);
        assert_eq!(out.coeffs.weights(), &[1.0]);
        assert_eq!(out.stats.terminated_by, StopCause::Tolerance);
    }

    #[test]
    fn symmetric_segment_midpoint() {
        let cloud: PointCloud<f64> =
            PointCloud::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let out = MdmSolver::default()
            .solve(&[0.0, 0.0], &[0, 1], &cloud)
            .unwrap();
        let p = out.coeffs.evaluate(&cloud).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-7);
        assert!(p[1].abs() < 1e-7);
        assert!((out.coeffs.weight_of(0) - 0.5).abs() < 1e-7);
        assert!((out.coeffs.weight_of(1) - 0.5).abs() < 1e-7);
    }

    #[test]
    fn worked_example_within_gap_accuracy() {
        let cloud = PointCloud::from_rows(&[
            vec![0.0, 4.0],
            vec![0.0, 2.0],
            vec![2.0, 2.0],
            vec![-2.0, 1.0],
        ])
        .unwrap();
        let out = MdmSolver::default()
            .solve(&[0.0, 0.0], &[0, 1, 2, 3], &cloud)
            .unwrap();
        let p = out.coeffs.evaluate(&cloud).unwrap();
        assert!(distance_between(&p, &[-6.0 / 17.0, 24.0 / 17.0]) < 1e-4);
    }
}
