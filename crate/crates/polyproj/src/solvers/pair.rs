//! Distance solvers: Minkowski-difference reduction around any
//! nearest-point solver, and a native two-sided active-set QP.

use crate::error::{Error, Result};
use crate::geometry::{dot, ConvexCoefficients, PointCloud};
use crate::scalar::{cast, Scalar};
use crate::solvers::oracle::joint_affine_pair;
use crate::solvers::{
    deadline_exceeded, DistanceSolver, InnerConfig, NearestPointSolver, PairOutcome, SolverOutcome,
    SolverStats, StopCause,
};

const WEIGHT_EPS: f64 = 1e-12;
const STALL_LIMIT: usize = 100;

/// Default cap on the size of the Minkowski-difference cloud.
pub const DEFAULT_PRODUCT_CAP: usize = 250_000;

/// Solves the distance problem by projecting the origin onto the hull of
/// the pairwise differences `x_i - y_j` and redistributing the resulting
/// weights to the two sides: `α_i = Σ_j μ_ij`, `β_j = Σ_i μ_ij`.
///
/// The pair `(Σ α_i x_i, Σ β_j y_j)` reproduces the difference-cloud
/// projection exactly up to summation order. Difference point `(i, j)` sits
/// at position `i * |indices_q| + j`, so duplicate geometric differences
/// keep distinct indices and the inner solver's smallest-index tie rules
/// resolve them lexicographically in `(i, j)`.
pub fn distance_by_reduction<T: Scalar>(
    indices_p: &[usize],
    cloud_p: &PointCloud<T>,
    indices_q: &[usize],
    cloud_q: &PointCloud<T>,
    inner: &dyn NearestPointSolver<T>,
    product_cap: usize,
) -> Result<PairOutcome<T>> {
    cloud_p.check_indices(indices_p)?;
    cloud_q.check_indices(indices_q)?;
    let d = cloud_p.dim();
    if cloud_q.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: cloud_q.dim(),
        });
    }
    let kp = indices_p.len();
    let kq = indices_q.len();
    if kp.saturating_mul(kq) > product_cap {
        return Err(Error::ProblemTooLarge(format!(
            "difference cloud would hold {} points (cap {})",
            kp * kq,
            product_cap
        )));
    }

    let mut diff = Vec::with_capacity(kp * kq * d);
    for &i in indices_p {
        let xi = cloud_p.point(i);
        for &j in indices_q {
            let yj = cloud_q.point(j);
            for (a, b) in xi.iter().zip(yj.iter()) {
                diff.push(*a - *b);
            }
        }
    }
    let diff_cloud = PointCloud::new(d, diff)?;
    let all: Vec<usize> = (0..kp * kq).collect();
    let origin = vec![T::zero(); d];
    let SolverOutcome { coeffs, stats } = inner.solve(&origin, &all, &diff_cloud)?;

    let mut alpha = vec![T::zero(); kp];
    let mut beta = vec![T::zero(); kq];
    for (&t, &mu) in coeffs.support().iter().zip(coeffs.weights().iter()) {
        alpha[t / kq] += mu;
        beta[t % kq] += mu;
    }
    let (sup_p, w_p) = nonzero(indices_p, &alpha);
    let (sup_q, w_q) = nonzero(indices_q, &beta);
    Ok(PairOutcome {
        coeffs_p: ConvexCoefficients::from_dense(&sup_p, &w_p, cast(1e-9))?,
        coeffs_q: ConvexCoefficients::from_dense(&sup_q, &w_q, cast(1e-9))?,
        stats,
    })
}

fn nonzero<T: Scalar>(indices: &[usize], dense: &[T]) -> (Vec<usize>, Vec<T>) {
    let mut sup = Vec::new();
    let mut w = Vec::new();
    for (pos, &v) in dense.iter().enumerate() {
        if v > T::zero() {
            sup.push(indices[pos]);
            w.push(v);
        }
    }
    (sup, w)
}

/// [`DistanceSolver`] adapter running [`distance_by_reduction`] around a
/// chosen inner solver.
pub struct ReductionDistanceSolver<T> {
    inner: Box<dyn NearestPointSolver<T>>,
    name: String,
    pub product_cap: usize,
}

impl<T: Scalar> ReductionDistanceSolver<T> {
    pub fn new(inner: Box<dyn NearestPointSolver<T>>) -> Self {
        let name = format!("reduction-{}", inner.name());
        ReductionDistanceSolver {
            inner,
            name,
            product_cap: DEFAULT_PRODUCT_CAP,
        }
    }
}

impl<T: Scalar> DistanceSolver<T> for ReductionDistanceSolver<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn solve_pair(
        &self,
        indices_p: &[usize],
        cloud_p: &PointCloud<T>,
        indices_q: &[usize],
        cloud_q: &PointCloud<T>,
    ) -> Result<PairOutcome<T>> {
        distance_by_reduction(
            indices_p,
            cloud_p,
            indices_q,
            cloud_q,
            self.inner.as_ref(),
            self.product_cap,
        )
    }
}

/// Native primal active-set QP on the product of the two simplices:
/// `min ½‖Σ α_i x_i - Σ β_j y_j‖²` with each coefficient block summing
/// to 1 and nonnegative.
#[derive(Clone, Debug)]
pub struct PairQpSolver {
    pub kkt_tol: f64,
    pub max_iter: usize,
    pub deadline: Option<std::time::Instant>,
}

impl Default for PairQpSolver {
    fn default() -> Self {
        PairQpSolver {
            kkt_tol: 1e-10,
            max_iter: 100_000,
            deadline: None,
        }
    }
}

impl PairQpSolver {
    pub fn from_config(cfg: &InnerConfig) -> Self {
        let mut s = PairQpSolver::default();
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

impl<T: Scalar> DistanceSolver<T> for PairQpSolver {
    fn name(&self) -> &str {
        "pair-qp"
    }

    fn solve_pair(
        &self,
        indices_p: &[usize],
        cloud_p: &PointCloud<T>,
        indices_q: &[usize],
        cloud_q: &PointCloud<T>,
    ) -> Result<PairOutcome<T>> {
        cloud_p.check_indices(indices_p)?;
        cloud_q.check_indices(indices_q)?;
        let d = cloud_p.dim();
        if cloud_q.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: cloud_q.dim(),
            });
        }
        let kkt_tol = cast::<T>(self.kkt_tol);
        let weight_eps = cast::<T>(WEIGHT_EPS);
        let kp = indices_p.len();
        let kq = indices_q.len();

        // Warm start from the closest vertex pair.
        let (mut i0, mut j0) = (0, 0);
        let mut best = T::infinity();
        for (pi, &i) in indices_p.iter().enumerate() {
            let xi = cloud_p.point(i);
            for (qj, &j) in indices_q.iter().enumerate() {
                let yj = cloud_q.point(j);
                let mut n2 = T::zero();
                for (a, b) in xi.iter().zip(yj.iter()) {
                    let diff = *a - *b;
                    n2 += diff * diff;
                }
                if n2 < best {
                    best = n2;
                    i0 = pi;
                    j0 = qj;
                }
            }
        }
        let mut working_p: Vec<usize> = vec![i0];
        let mut working_q: Vec<usize> = vec![j0];
        let mut alpha = vec![T::zero(); kp];
        let mut beta = vec![T::zero(); kq];
        alpha[i0] = T::one();
        beta[j0] = T::one();

        let mut iterations = 0usize;
        let mut cause = StopCause::IterationCap;
        let mut best_obj = T::infinity();
        let mut stall = 0usize;

        while iterations < self.max_iter {
            iterations += 1;
            if deadline_exceeded(self.deadline) {
                break;
            }
            let sub_p: Vec<usize> = working_p.iter().map(|&p| indices_p[p]).collect();
            let sub_q: Vec<usize> = working_q.iter().map(|&q| indices_q[q]).collect();
            let joint = joint_affine_pair(&sub_p, cloud_p, &sub_q, cloud_q)?;
            let min_p = joint.beta_p.iter().fold(T::infinity(), |m, &b| m.min(b));
            let min_q = joint.beta_q.iter().fold(T::infinity(), |m, &b| m.min(b));

            if min_p.min(min_q) > -weight_eps {
                // Adopt and price.
                for a in alpha.iter_mut() {
                    *a = T::zero();
                }
                for b in beta.iter_mut() {
                    *b = T::zero();
                }
                for (&pos, &b) in working_p.iter().zip(joint.beta_p.iter()) {
                    alpha[pos] = b.max(T::zero());
                }
                for (&pos, &b) in working_q.iter().zip(joint.beta_q.iter()) {
                    beta[pos] = b.max(T::zero());
                }
                let dir: Vec<T> = joint
                    .point_p
                    .iter()
                    .zip(joint.point_q.iter())
                    .map(|(a, b)| *a - *b)
                    .collect();

                let mut mu_p = T::zero();
                for &pos in &working_p {
                    mu_p += dot(&dir, cloud_p.point(indices_p[pos]));
                }
                mu_p /= T::from_usize(working_p.len()).unwrap();
                let mut mu_q = T::zero();
                for &pos in &working_q {
                    mu_q -= dot(&dir, cloud_q.point(indices_q[pos]));
                }
                mu_q /= T::from_usize(working_q.len()).unwrap();

                let mut add_side_p = true;
                let mut add_pos = usize::MAX;
                let mut most_negative = -kkt_tol;
                for (pos, &gi) in indices_p.iter().enumerate() {
                    if working_p.contains(&pos) {
                        continue;
                    }
                    let reduced = dot(&dir, cloud_p.point(gi)) - mu_p;
                    if reduced < most_negative {
                        most_negative = reduced;
                        add_pos = pos;
                        add_side_p = true;
                    }
                }
                for (pos, &gj) in indices_q.iter().enumerate() {
                    if working_q.contains(&pos) {
                        continue;
                    }
                    let reduced = -dot(&dir, cloud_q.point(gj)) - mu_q;
                    if reduced < most_negative {
                        most_negative = reduced;
                        add_pos = pos;
                        add_side_p = false;
                    }
                }
                if add_pos == usize::MAX {
                    cause = StopCause::Tolerance;
                    break;
                }

                let obj = dot(&dir, &dir);
                if obj < best_obj {
                    best_obj = obj;
                    stall = 0;
                } else {
                    stall += 1;
                    if stall > STALL_LIMIT {
                        break;
                    }
                }
                if add_side_p {
                    let at = working_p.partition_point(|&p| p < add_pos);
                    working_p.insert(at, add_pos);
                } else {
                    let at = working_q.partition_point(|&p| p < add_pos);
                    working_q.insert(at, add_pos);
                }
            } else {
                // Joint blocking step toward the subproblem target.
                let mut lambda = T::one();
                for (&pos, &b) in working_p.iter().zip(joint.beta_p.iter()) {
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
                        }
                    }
                }
                for (&pos, &b) in working_q.iter().zip(joint.beta_q.iter()) {
                    if b <= weight_eps {
                        let cur = beta[pos];
                        let denom = cur - b;
                        let ratio = if denom <= T::zero() {
                            T::zero()
                        } else {
                            cur / denom
                        };
                        if ratio < lambda {
                            lambda = ratio;
                        }
                    }
                }
                for (&pos, &b) in working_p.iter().zip(joint.beta_p.iter()) {
                    alpha[pos] = (T::one() - lambda) * alpha[pos] + lambda * b;
                }
                for (&pos, &b) in working_q.iter().zip(joint.beta_q.iter()) {
                    beta[pos] = (T::one() - lambda) * beta[pos] + lambda * b;
                }
                prune(&mut working_p, &mut alpha, weight_eps, i0);
                prune(&mut working_q, &mut beta, weight_eps, j0);
            }
        }

        let (sup_p, w_p) = nonzero(indices_p, &alpha);
        let (sup_q, w_q) = nonzero(indices_q, &beta);
        Ok(PairOutcome {
            coeffs_p: ConvexCoefficients::from_dense(&sup_p, &w_p, cast(1e-9))?,
            coeffs_q: ConvexCoefficients::from_dense(&sup_q, &w_q, cast(1e-9))?,
            stats: SolverStats {
                inner_iterations: iterations,
                terminated_by: cause,
            },
        })
    }
}

fn prune<T: Scalar>(working: &mut Vec<usize>, dense: &mut [T], eps: T, fallback: usize) {
    let mut s = 0;
    while s < working.len() {
        let pos = working[s];
        if dense[pos] <= eps {
            dense[pos] = T::zero();
            working.remove(s);
        } else {
            s += 1;
        }
    }
    if working.is_empty() {
        working.push(fallback);
        dense[fallback] = T::one();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance_between;
    use crate::solvers::QpSolver;

    #[test]
    fn reduction_singletons() {
        let p: PointCloud<f64> = PointCloud::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let q = PointCloud::from_rows(&[vec![-1.0, 0.0]]).unwrap();
        let out = distance_by_reduction(&[0], &p, &[0], &q, &QpSolver::default(), 1000).unwrap();
        assert_eq!(out.coeffs_p.weights(), &[1.0]);
        assert_eq!(out.coeffs_q.weights(), &[1.0]);
        let v = out.coeffs_p.evaluate(&p).unwrap();
        let w = out.coeffs_q.evaluate(&q).unwrap();
        assert!((distance_between(&v, &w) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reduction_identical_clouds_give_zero_distance() {
        let c = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let out = distance_by_reduction(&[0, 1, 2], &c, &[0, 1, 2], &c, &QpSolver::default(), 1000)
            .unwrap();
        let v = out.coeffs_p.evaluate(&c).unwrap();
        let w = out.coeffs_q.evaluate(&c).unwrap();
        assert!(distance_between(&v, &w) < 1e-9);
    }

    #[test]
    fn reduction_respects_product_cap() {
        let c = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let err = distance_by_reduction(&[0, 1, 2], &c, &[0, 1, 2], &c, &QpSolver::default(), 8)
            .unwrap_err();
        assert!(matches!(err, Error::ProblemTooLarge(_)));
    }

    #[test]
    fn pair_qp_parallel_segments() {
        let p: PointCloud<f64> = PointCloud::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let q = PointCloud::from_rows(&[vec![0.5, 1.0], vec![1.5, 1.0]]).unwrap();
        let out = PairQpSolver::default()
            .solve_pair(&[0, 1], &p, &[0, 1], &q)
            .unwrap();
        let v = out.coeffs_p.evaluate(&p).unwrap();
        let w = out.coeffs_q.evaluate(&q).unwrap();
        assert!((distance_between(&v, &w) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pair_qp_agrees_with_reduction() {
        let p: PointCloud<f64> = PointCloud::from_rows(&[
            vec![1.0, 0.2],
            vec![1.5, -0.4],
            vec![2.0, 1.0],
            vec![1.2, 0.9],
        ])
        .unwrap();
        let q = PointCloud::from_rows(&[
            vec![-1.0, 0.0],
            vec![-1.5, 0.8],
            vec![-0.7, -0.6],
            vec![-2.0, 0.3],
        ])
        .unwrap();
        let idx = [0, 1, 2, 3];
        let native = PairQpSolver::default()
            .solve_pair(&idx, &p, &idx, &q)
            .unwrap();
        let reduced =
            distance_by_reduction(&idx, &p, &idx, &q, &QpSolver::default(), 1000).unwrap();
        let dn = distance_between(
            &native.coeffs_p.evaluate(&p).unwrap(),
            &native.coeffs_q.evaluate(&q).unwrap(),
        );
        let dr = distance_between(
            &reduced.coeffs_p.evaluate(&p).unwrap(),
            &reduced.coeffs_q.evaluate(&q).unwrap(),
        );
        assert!((dn - dr).abs() < 1e-9, "native {dn} vs reduction {dr}");
    }
}
