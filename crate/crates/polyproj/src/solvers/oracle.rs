//! Brute-force verification oracles.
//!
//! The nearest-point oracle enumerates every support subset of at most
//! `d + 1` indices, projects the query onto each affine hull, filters by
//! barycentric feasibility and keeps the closest candidate. The pair oracle
//! does the same over subset pairs with a joint least-squares system. Both
//! are ground truth for the iterative solvers and are guarded against
//! combinatorial blow-up.

use crate::error::{Error, Result};
use crate::geometry::{
    check_optimality, check_pair_optimality, distance_between, project_affine_hull,
    ConvexCoefficients, PointCloud,
};
use crate::linalg::{min_norm_least_squares, Mat};
use crate::scalar::{cast, Scalar};
use crate::solvers::{
    DistanceSolver, InnerConfig, NearestPointSolver, PairOutcome, SolverOutcome, SolverStats,
    StopCause,
};

const MAX_INDICES: usize = 12;
const MAX_DIM: usize = 4;
/// Barycentric feasibility slack for enumated candidates.
const FEASIBILITY_TOL: f64 = 1e-12;
/// Relative slack of the final self-check.
const VALIDATION_TOL: f64 = 1e-9;

/// Exhaustive-enumeration nearest-point solver.
#[derive(Clone, Debug, Default)]
pub struct OracleSolver;

impl OracleSolver {
    pub fn new() -> Self {
        OracleSolver
    }

    /// The oracle has no tunable tolerances; overrides are ignored.
    pub fn from_config(_cfg: &InnerConfig) -> Self {
        OracleSolver
    }
}

impl<T: Scalar> NearestPointSolver<T> for OracleSolver {
    fn name(&self) -> &str {
        "oracle"
    }

    fn solve(&self, w: &[T], indices: &[usize], cloud: &PointCloud<T>) -> Result<SolverOutcome<T>> {
        cloud.check_indices(indices)?;
        let d = cloud.dim();
        if w.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: w.len(),
            });
        }
        if indices.len() > MAX_INDICES || d > MAX_DIM {
            return Err(Error::OracleGuard {
                indices: indices.len(),
                dim: d,
                max_indices: MAX_INDICES,
                max_dim: MAX_DIM,
            });
        }

        let feas = cast::<T>(-FEASIBILITY_TOL);
        // (distance, subset, coefficients, point)
        type NearestCandidate<T> = (T, Vec<usize>, Vec<T>, Vec<T>);
        let mut best: Option<NearestCandidate<T>> = None;
        let mut examined = 0usize;
        let k = indices.len();
        for size in 1..=k.min(d + 1) {
            for_each_combination(k, size, |subset_pos| {
                examined += 1;
                let subset: Vec<usize> = subset_pos.iter().map(|&p| indices[p]).collect();
                let proj = project_affine_hull(&subset, cloud, w)?;
                if proj.beta.iter().any(|&b| b < feas) {
                    return Ok(());
                }
                let dist = distance_between(&proj.point, w);
                if best.as_ref().is_none_or(|(bd, ..)| dist < *bd) {
                    best = Some((dist, subset, proj.beta, proj.point));
                }
                Ok(())
            })?;
        }
        let (_, subset, beta, point) =
            best.expect("singleton subsets are always barycentric-feasible");

        // Self-check against the optimality certificate on the restricted
        // cloud.
        let sub_rows: Vec<Vec<T>> = indices.iter().map(|&i| cloud.point(i).to_vec()).collect();
        let sub_cloud = PointCloud::from_rows(&sub_rows)?;
        let mut scale = T::one();
        for row in &sub_rows {
            let n2 = {
                let mut s = T::zero();
                for (a, b) in row.iter().zip(w.iter()) {
                    let d = *a - *b;
                    s += d * d;
                }
                s
            };
            if n2 > scale {
                scale = n2;
            }
        }
        let check = check_optimality(&point, w, &sub_cloud, cast::<T>(VALIDATION_TOL) * scale)?;
        if !check.satisfied {
            return Err(Error::Numerical(format!(
                "enumeration oracle candidate failed its optimality self-check \
                 (worst value {})",
                check.worst_value
            )));
        }

        let coeffs = ConvexCoefficients::from_dense(&subset, &beta, cast(FEASIBILITY_TOL))?;
        Ok(SolverOutcome {
            coeffs,
            stats: SolverStats {
                inner_iterations: examined,
                terminated_by: StopCause::Tolerance,
            },
        })
    }
}

/// Exhaustive-enumeration solver for the two-polytope distance problem.
#[derive(Clone, Debug, Default)]
pub struct PairOracleSolver;

impl PairOracleSolver {
    pub fn new() -> Self {
        PairOracleSolver
    }

    pub fn from_config(_cfg: &InnerConfig) -> Self {
        PairOracleSolver
    }
}

impl<T: Scalar> DistanceSolver<T> for PairOracleSolver {
    fn name(&self) -> &str {
        "pair-oracle"
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
        if indices_p.len() > MAX_INDICES || indices_q.len() > MAX_INDICES || d > MAX_DIM {
            return Err(Error::OracleGuard {
                indices: indices_p.len().max(indices_q.len()),
                dim: d,
                max_indices: MAX_INDICES,
                max_dim: MAX_DIM,
            });
        }

        let feas = cast::<T>(-FEASIBILITY_TOL);
        let kp = indices_p.len();
        let kq = indices_q.len();
        let mut examined = 0usize;
        let mut best: Option<Candidate<T>> = None;

        for size_p in 1..=kp.min(d + 1) {
            for_each_combination(kp, size_p, |sub_p_pos| {
                let sub_p: Vec<usize> = sub_p_pos.iter().map(|&p| indices_p[p]).collect();
                for size_q in 1..=kq.min(d + 1) {
                    for_each_combination(kq, size_q, |sub_q_pos| {
                        examined += 1;
                        let sub_q: Vec<usize> = sub_q_pos.iter().map(|&p| indices_q[p]).collect();
                        let joint = joint_affine_pair(&sub_p, cloud_p, &sub_q, cloud_q)?;
                        if joint
                            .beta_p
                            .iter()
                            .chain(joint.beta_q.iter())
                            .any(|&b| b < feas)
                        {
                            return Ok(());
                        }
                        let dist = distance_between(&joint.point_p, &joint.point_q);
                        if best.as_ref().is_none_or(|b| dist < b.dist) {
                            best = Some(Candidate {
                                dist,
                                sub_p: sub_p.clone(),
                                sub_q,
                                joint,
                            });
                        }
                        Ok(())
                    })?;
                }
                Ok(())
            })?;
        }
        let best = best.expect("singleton subset pairs are always feasible");

        let sub_rows_p: Vec<Vec<T>> = indices_p
            .iter()
            .map(|&i| cloud_p.point(i).to_vec())
            .collect();
        let sub_rows_q: Vec<Vec<T>> = indices_q
            .iter()
            .map(|&i| cloud_q.point(i).to_vec())
            .collect();
        let sub_cloud_p = PointCloud::from_rows(&sub_rows_p)?;
        let sub_cloud_q = PointCloud::from_rows(&sub_rows_q)?;
        let reach = sub_cloud_p.diameter() + sub_cloud_q.diameter() + best.dist;
        let scale = (best.dist * reach).max(T::one());
        let check = check_pair_optimality(
            &best.joint.point_p,
            &best.joint.point_q,
            &sub_cloud_p,
            &sub_cloud_q,
            cast::<T>(VALIDATION_TOL) * scale,
        )?;
        if !check.satisfied {
            return Err(Error::Numerical(format!(
                "pair oracle candidate failed its optimality self-check \
                 (rho_x {}, rho_y {})",
                check.rho_x, check.rho_y
            )));
        }

        Ok(PairOutcome {
            coeffs_p: ConvexCoefficients::from_dense(
                &best.sub_p,
                &best.joint.beta_p,
                cast(FEASIBILITY_TOL),
            )?,
            coeffs_q: ConvexCoefficients::from_dense(
                &best.sub_q,
                &best.joint.beta_q,
                cast(FEASIBILITY_TOL),
            )?,
            stats: SolverStats {
                inner_iterations: examined,
                terminated_by: StopCause::Tolerance,
            },
        })
    }
}

struct Candidate<T> {
    dist: T,
    sub_p: Vec<usize>,
    sub_q: Vec<usize>,
    joint: JointAffinePair<T>,
}

pub(crate) struct JointAffinePair<T> {
    pub beta_p: Vec<T>,
    pub beta_q: Vec<T>,
    pub point_p: Vec<T>,
    pub point_q: Vec<T>,
}

/// Minimizes `‖Σ beta_p x_i - Σ beta_q y_j‖` over both affine hulls
/// (coefficients sum to 1 on each side, signs unrestricted) by eliminating
/// one pivot per side and solving the joint least-squares system.
pub(crate) fn joint_affine_pair<T: Scalar>(
    sub_p: &[usize],
    cloud_p: &PointCloud<T>,
    sub_q: &[usize],
    cloud_q: &PointCloud<T>,
) -> Result<JointAffinePair<T>> {
    let d = cloud_p.dim();
    let np = sub_p.len();
    let nq = sub_q.len();
    let base_p = cloud_p.point(sub_p[0]);
    let base_q = cloud_q.point(sub_q[0]);

    let cols = (np - 1) + (nq - 1);
    let mut beta_p;
    let mut beta_q;
    if cols == 0 {
        beta_p = vec![T::one()];
        beta_q = vec![T::one()];
    } else {
        let mut a = Mat::zeros(d, cols);
        for (c, &i) in sub_p[1..].iter().enumerate() {
            let p = cloud_p.point(i);
            for r in 0..d {
                a.set(r, c, p[r] - base_p[r]);
            }
        }
        for (c, &j) in sub_q[1..].iter().enumerate() {
            let q = cloud_q.point(j);
            for r in 0..d {
                a.set(r, np - 1 + c, -(q[r] - base_q[r]));
            }
        }
        let rhs: Vec<T> = base_q
            .iter()
            .zip(base_p.iter())
            .map(|(q, p)| *q - *p)
            .collect();
        let sol = min_norm_least_squares(a, rhs);
        let (u, v) = sol.split_at(np - 1);
        let su: T = u.iter().copied().sum();
        let sv: T = v.iter().copied().sum();
        beta_p = Vec::with_capacity(np);
        beta_p.push(T::one() - su);
        beta_p.extend_from_slice(u);
        beta_q = Vec::with_capacity(nq);
        beta_q.push(T::one() - sv);
        beta_q.extend_from_slice(v);
    }

    let mut point_p = vec![T::zero(); d];
    for (&i, &b) in sub_p.iter().zip(beta_p.iter()) {
        for (o, &c) in point_p.iter_mut().zip(cloud_p.point(i).iter()) {
            *o += b * c;
        }
    }
    let mut point_q = vec![T::zero(); d];
    for (&j, &b) in sub_q.iter().zip(beta_q.iter()) {
        for (o, &c) in point_q.iter_mut().zip(cloud_q.point(j).iter()) {
            *o += b * c;
        }
    }
    Ok(JointAffinePair {
        beta_p,
        beta_q,
        point_p,
        point_q,
    })
}

/// Calls `f` on every `size`-combination of `0..n` in lexicographic order.
fn for_each_combination(
    n: usize,
    size: usize,
    mut f: impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    debug_assert!(size >= 1 && size <= n);
    let mut comb: Vec<usize> = (0..size).collect();
    loop {
        f(&comb)?;
        // Advance to the next combination, rightmost digit first.
        let mut i = size;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if comb[i] != i + n - size {
                comb[i] += 1;
                for j in i + 1..size {
                    comb[j] = comb[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn remark_cloud() -> PointCloud<f64> {
        PointCloud::from_rows(&[
            vec![2.0, 2.0],
            vec![3.0, 1.0],
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
        ])
        .unwrap()
    }

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
    fn combinations_are_lexicographic_and_complete() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| {
            seen.push(c.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn oracle_finds_vertex_projection() {
        // Projection of the origin onto the first three points is the vertex
        // (1,1).
        let out = OracleSolver
            .solve(&[0.0, 0.0], &[0, 1, 2], &remark_cloud())
            .unwrap();
        assert_eq!(out.coeffs.support(), &[2]);
        assert_eq!(out.coeffs.weights(), &[1.0]);
    }

    #[test]
    fn oracle_projects_onto_segment() {
        // Over {x_2, x_3, x_4} of the remark cloud, the projection of the
        // origin is (0,1) on the line y = 1. The three points are collinear,
        // so several supports represent it; the enumeration keeps the first
        // feasible one but the point is unique.
        let out = OracleSolver
            .solve(&[0.0, 0.0], &[1, 2, 3], &remark_cloud())
            .unwrap();
        let p = out.coeffs.evaluate(&remark_cloud()).unwrap();
        assert!((p[0] - 0.0).abs() < 1e-12);
        assert!((p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_worked_example_optimum() {
        let out = OracleSolver
            .solve(&[0.0, 0.0], &[0, 1, 2, 3], &example_cloud())
            .unwrap();
        let p = out.coeffs.evaluate(&example_cloud()).unwrap();
        assert!((p[0] + 6.0 / 17.0).abs() < 1e-12);
        assert!((p[1] - 24.0 / 17.0).abs() < 1e-12);
        assert_eq!(out.coeffs.support(), &[2, 3]);
        assert!((out.coeffs.weight_of(2) - 7.0 / 17.0).abs() < 1e-12);
        assert!((out.coeffs.weight_of(3) - 10.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_guard_refuses_large_inputs() {
        let rows: Vec<Vec<f64>> = (0..13).map(|i| vec![i as f64, 0.0]).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let indices: Vec<usize> = (0..13).collect();
        assert!(matches!(
            OracleSolver.solve(&[0.0, 0.0], &indices, &cloud),
            Err(Error::OracleGuard { .. })
        ));
    }

    #[test]
    fn pair_oracle_singletons() {
        let p: PointCloud<f64> = PointCloud::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let q = PointCloud::from_rows(&[vec![-1.0, 0.0]]).unwrap();
        let out = PairOracleSolver.solve_pair(&[0], &p, &[0], &q).unwrap();
        let vp = out.coeffs_p.evaluate(&p).unwrap();
        let wq = out.coeffs_q.evaluate(&q).unwrap();
        assert!((distance_between(&vp, &wq) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pair_oracle_segment_to_segment() {
        // Two parallel unit segments at distance 1.
        let p: PointCloud<f64> = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let q = PointCloud::from_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let out = PairOracleSolver
            .solve_pair(&[0, 1], &p, &[0, 1], &q)
            .unwrap();
        let vp = out.coeffs_p.evaluate(&p).unwrap();
        let wq = out.coeffs_q.evaluate(&q).unwrap();
        assert!((distance_between(&vp, &wq) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_oracle_identical_clouds_touch() {
        let c = remark_cloud();
        let out = PairOracleSolver
            .solve_pair(&[0, 1, 2, 3], &c, &[0, 1, 2, 3], &c)
            .unwrap();
        let vp = out.coeffs_p.evaluate(&c).unwrap();
        let wq = out.coeffs_q.evaluate(&c).unwrap();
        assert!(distance_between(&vp, &wq) < 1e-10);
    }
}
