//! Primal active-set solver for the simplex-constrained least-norm QP
//! `min ½‖Σ α_i p_i‖²  s.t.  Σ α_i = 1, α ≥ 0`.
//!
//! Mirrors the classical dense-QP setup: the Gram matrix of the selected
//! points is materialized once and its columns drive the gradient and KKT
//! pricing scans, while the equality-constrained subproblems are solved
//! stably on the point coordinates via orthogonal factorization. Degenerate
//! subproblems fall back to the minimum-norm least-squares solution, and
//! pivoting is deterministic (smallest index wins every tie).

use crate::error::{Error, Result};
use crate::geometry::{dot, ConvexCoefficients, PointCloud};
use crate::scalar::{cast, Scalar};
use crate::solvers::{
    affine_minimum, deadline_exceeded, flat_point, translated_points, InnerConfig,
    NearestPointSolver, SolverOutcome, SolverStats, StopCause,
};

const WEIGHT_EPS: f64 = 1e-12;
/// Consecutive majors without objective progress before giving up.
const STALL_LIMIT: usize = 100;

#[derive(Clone, Debug)]
pub struct QpSolver {
    /// KKT pricing tolerance: stop once every reduced cost is at least
    /// `-kkt_tol`.
    pub kkt_tol: f64,
    pub max_iter: usize,
    /// Refuse problems whose dense Gram matrix would not fit comfortably.
    pub max_points: usize,
    pub deadline: Option<std::time::Instant>,
}

impl Default for QpSolver {
    fn default() -> Self {
        QpSolver {
            kkt_tol: 1e-10,
            max_iter: 100_000,
            max_points: 6000,
            deadline: None,
        }
    }
}

impl QpSolver {
    pub fn from_config(cfg: &InnerConfig) -> Self {
        let mut s = QpSolver::default();
        if let Some(eps) = cfg.epsilon {
            s.kkt_tol = eps;
        }
        if let Some(cap) = cfg.max_iter {
            s.max_iter = cap;
        }
        s.deadline = cfg.deadline;
        s
    }
}

impl<T: Scalar> NearestPointSolver<T> for QpSolver {
    fn name(&self) -> &str {
        "qp"
    }

    fn solve(&self, w: &[T], indices: &[usize], cloud: &PointCloud<T>) -> Result<SolverOutcome<T>> {
        let d = cloud.dim();
        let flat = translated_points(w, indices, cloud)?;
        let k = indices.len();
        if k > self.max_points {
            return Err(Error::ProblemTooLarge(format!(
                "dense QP limited to {} points, got {}",
                self.max_points, k
            )));
        }
        let kkt_tol = cast::<T>(self.kkt_tol);
        let weight_eps = cast::<T>(WEIGHT_EPS);

        // Dense Gram matrix of the translated points.
        let mut gram = vec![T::zero(); k * k];
        for i in 0..k {
            let pi = flat_point(&flat, d, i);
            for j in i..k {
                let val = dot(pi, flat_point(&flat, d, j));
                gram[i * k + j] = val;
                gram[j * k + i] = val;
            }
        }

        // Start from the nearest vertex.
        let mut start = 0;
        let mut best_n2 = T::infinity();
        for i in 0..k {
            if gram[i * k + i] < best_n2 {
                best_n2 = gram[i * k + i];
                start = i;
            }
        }
        let mut working: Vec<usize> = vec![start];
        let mut alpha = vec![T::zero(); k];
        alpha[start] = T::one();

        let mut iterations = 0usize;
        let mut cause = StopCause::IterationCap;
        let mut best_obj = T::infinity();
        let mut stall = 0usize;

        while iterations < self.max_iter {
            iterations += 1;
            if deadline_exceeded(self.deadline) {
                break;
            }

            let beta = affine_minimum(&flat, d, &working);
            let beta_min = beta.iter().fold(T::infinity(), |m, &b| m.min(b));

            if beta_min > -weight_eps {
                // Adopt the subproblem optimum.
                for a in alpha.iter_mut() {
                    *a = T::zero();
                }
                for (&pos, &b) in working.iter().zip(beta.iter()) {
                    alpha[pos] = b.max(T::zero());
                }

                // Price the remaining vertices: g_i = ⟨y, p_i⟩ via Gram
                // columns of the support, mu = its common value on the
                // working set.
                let mut mu = T::zero();
                for &ws in &working {
                    let mut g = T::zero();
                    for (&pos, &b) in working.iter().zip(beta.iter()) {
                        g += b * gram[ws * k + pos];
                    }
                    mu += g;
                }
                mu /= T::from_usize(working.len()).unwrap();

                let mut add = usize::MAX;
                let mut most_negative = -kkt_tol;
                for i in 0..k {
                    if working.contains(&i) {
                        continue;
                    }
                    let mut g = T::zero();
                    for (&pos, &b) in working.iter().zip(beta.iter()) {
                        g += b * gram[i * k + pos];
                    }
                    let reduced = g - mu;
                    if reduced < most_negative {
                        most_negative = reduced;
                        add = i;
                    }
                }
                if add == usize::MAX {
                    cause = StopCause::Tolerance;
                    break;
                }

                let obj = objective(&flat, d, &working, &beta);
                if obj < best_obj {
                    best_obj = obj;
                    stall = 0;
                } else {
                    stall += 1;
                    if stall > STALL_LIMIT {
                        break;
                    }
                }
                let insert_at = working.partition_point(|&p| p < add);
                working.insert(insert_at, add);
            } else {
                // Blocked: step toward beta as far as feasibility allows and
                // drop the blocking vertex.
                let mut lambda = T::one();
                let mut blocker = usize::MAX;
                for (s, (&pos, &b)) in working.iter().zip(beta.iter()).enumerate() {
                    if b <= weight_eps {
                        let cur = alpha[pos];
                        let denom = cur - b;
                        let ratio = if denom <= T::zero() {
                            T::zero()
                        } else {
                            cur / denom
                        };
                        if ratio < lambda {
                            lambda = ratio;
                            blocker = s;
                        }
                    }
                }
                for (&pos, &b) in working.iter().zip(beta.iter()) {
                    alpha[pos] = (T::one() - lambda) * alpha[pos] + lambda * b;
                }
                if blocker != usize::MAX {
                    alpha[working[blocker]] = T::zero();
                }
                let mut s = 0;
                while s < working.len() {
                    let pos = working[s];
                    if alpha[pos] <= weight_eps {
                        alpha[pos] = T::zero();
                        working.remove(s);
                    } else {
                        s += 1;
                    }
                }
                if working.is_empty() {
                    working.push(start);
                    alpha[start] = T::one();
                }
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

fn objective<T: Scalar>(flat: &[T], d: usize, working: &[usize], beta: &[T]) -> T {
    let mut y = vec![T::zero(); d];
    for (&pos, &b) in working.iter().zip(beta.iter()) {
        for (c, &p) in y.iter_mut().zip(flat_point(flat, d, pos).iter()) {
            *c += b * p;
        }
    }
    dot(&y, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance_between;

    fn example_cloud() -> PointCloud<f64> {
        PointCloud::from_rows(&[
            vec![0.0, 4.0],
            vec![0.0, 2.0],
            vec![2.0, 2.0],
            vec![-2.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn worked_example_optimum() {
        let out = QpSolver::default()
            .solve(&[0.0, 0.0], &[0, 1, 2, 3], &example_cloud())
            .unwrap();
        assert_eq!(out.stats.terminated_by, StopCause::Tolerance);
        let p = out.coeffs.evaluate(&example_cloud()).unwrap();
        assert!((p[0] + 6.0 / 17.0).abs() < 1e-10);
        assert!((p[1] - 24.0 / 17.0).abs() < 1e-10);
        assert!((out.coeffs.weight_of(2) - 7.0 / 17.0).abs() < 1e-10);
        assert!((out.coeffs.weight_of(3) - 10.0 / 17.0).abs() < 1e-10);
    }

    #[test]
    fn interior_query_reaches_zero_objective() {
        let cloud = example_cloud();
        let w = [0.0, 2.5];
        let out = QpSolver::default()
            .solve(&w, &[0, 1, 2, 3], &cloud)
            .unwrap();
        let p = out.coeffs.evaluate(&cloud).unwrap();
        assert!(distance_between(&p, &w) < 1e-10);
    }

    #[test]
    fn refuses_oversized_problems() {
        let cloud = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let solver = QpSolver {
            max_points: 2,
            ..QpSolver::default()
        };
        assert!(matches!(
            solver.solve(&[0.0], &[0, 1, 2], &cloud),
            Err(Error::ProblemTooLarge(_))
        ));
    }
}
