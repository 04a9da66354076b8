//! Wolfe's minimum-norm-point method.
//!
//! Maintains a corral: an affinely independent working set whose affine-hull
//! minimizer has strictly positive coefficients. Major cycles add the vertex
//! minimizing `⟨X, p_j⟩`; minor cycles move toward the affine minimizer over
//! the working set and delete points whose coefficients hit zero. Because
//! non-corral indices never receive weight, the returned coefficient vector
//! has an exact zero at every index outside the final corral, the property
//! the meta-algorithm's removal heuristic relies on whenever the query lies
//! outside the subpolytope.

use crate::error::Result;
use crate::geometry::{dot, ConvexCoefficients, PointCloud};
use crate::scalar::{cast, Scalar};
use crate::solvers::{
    affine_minimum, deadline_exceeded, flat_point, translated_points, InnerConfig,
    NearestPointSolver, SolverOutcome, SolverStats, StopCause,
};

/// Working-set weight (and affine-coefficient sign) threshold.
const WEIGHT_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct WolfeSolver {
    /// Stopping slack: terminate once `min_j ⟨X, p_j⟩ > ⟨X, X⟩ - epsilon`.
    /// Subproblems in the meta-algorithm are tiny, so the default is much
    /// tighter than what one would use on a large standalone problem.
    pub epsilon: f64,
    /// Combined cap on major and minor cycles.
    pub max_iter: usize,
    /// Optional wall-clock cutoff, checked once per major cycle.
    pub deadline: Option<std::time::Instant>,
}

impl Default for WolfeSolver {
    fn default() -> Self {
        WolfeSolver {
            epsilon: 1e-10,
            max_iter: 1_000_000,
            deadline: None,
        }
    }
}

impl WolfeSolver {
    pub fn from_config(cfg: &InnerConfig) -> Self {
        let mut s = WolfeSolver::default();
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

impl<T: Scalar> NearestPointSolver<T> for WolfeSolver {
    fn name(&self) -> &str {
        "wolfe"
    }

    fn solve(&self, w: &[T], indices: &[usize], cloud: &PointCloud<T>) -> Result<SolverOutcome<T>> {
        let d = cloud.dim();
        let flat = translated_points(w, indices, cloud)?;
        let k = indices.len();
        let eps = cast::<T>(self.epsilon);
        let weight_eps = cast::<T>(WEIGHT_EPS);

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
        let mut corral: Vec<usize> = vec![start];
        let mut weights: Vec<T> = vec![T::one()];
        let mut x = vec![T::zero(); d];
        let mut iterations = 0usize;
        let mut cause = StopCause::IterationCap;

        'major: loop {
            iterations += 1;
            if iterations > self.max_iter || deadline_exceeded(self.deadline) {
                break;
            }

            // Current point X = Σ weights * p.
            for c in x.iter_mut() {
                *c = T::zero();
            }
            for (&pos, &wt) in corral.iter().zip(weights.iter()) {
                for (c, &v) in x.iter_mut().zip(flat_point(&flat, d, pos).iter()) {
                    *c += wt * v;
                }
            }
            let xtx = dot(&x, &x);

            let mut add = 0;
            let mut add_val = T::infinity();
            for pos in 0..k {
                let val = dot(&x, flat_point(&flat, d, pos));
                if val < add_val {
                    add_val = val;
                    add = pos;
                }
            }
            if add_val > xtx - eps {
                cause = StopCause::Tolerance;
                break;
            }
            if corral.contains(&add) {
                // The affine minimizer over the corral should already price
                // this vertex out; hitting it again means epsilon is below
                // the attainable accuracy. Return the current iterate.
                break;
            }
            corral.push(add);
            weights.push(T::zero());

            // Minor cycles: move to the affine minimizer, deleting points
            // whose coefficients become zero, until it is feasible.
            loop {
                iterations += 1;
                if iterations > self.max_iter {
                    break 'major;
                }
                let v = affine_minimum(&flat, d, &corral);
                let v_min = v.iter().fold(T::infinity(), |m, &b| m.min(b));
                if v_min > -weight_eps {
                    for (wt, &b) in weights.iter_mut().zip(v.iter()) {
                        *wt = b.max(T::zero());
                    }
                    continue 'major;
                }
                // Largest feasible step toward v; coefficients with
                // nonpositive target bound the step at w_i / (w_i - v_i).
                let mut theta = T::one();
                let mut blocker = usize::MAX;
                for (s, (&wt, &b)) in weights.iter().zip(v.iter()).enumerate() {
                    if b <= weight_eps {
                        let denom = wt - b;
                        let ratio = if denom <= T::zero() {
                            T::zero()
                        } else {
                            wt / denom
                        };
                        if ratio < theta {
                            theta = ratio;
                            blocker = s;
                        }
                    }
                }
                for (wt, &b) in weights.iter_mut().zip(v.iter()) {
                    *wt = (T::one() - theta) * *wt + theta * b;
                }
                if blocker != usize::MAX {
                    weights[blocker] = T::zero();
                }
                // Drop zeroed points (the blocker at least).
                let mut s = 0;
                while s < corral.len() {
                    if weights[s] <= weight_eps {
                        corral.remove(s);
                        weights.remove(s);
                    } else {
                        s += 1;
                    }
                }
                if corral.is_empty() {
                    // Cannot happen for consistent data; restart defensively
                    // from the best vertex.
                    corral.push(start);
                    weights.push(T::one());
                    continue 'major;
                }
            }
        }

        let mut pairs: Vec<(usize, T)> = corral
            .iter()
            .zip(weights.iter())
            .map(|(&pos, &wt)| (indices[pos], wt))
            .collect();
        pairs.sort_by_key(|&(idx, _)| idx);
        let support: Vec<usize> = pairs.iter().map(|&(i, _)| i).collect();
        let dense: Vec<T> = pairs.iter().map(|&(_, w)| w).collect();
        let coeffs = ConvexCoefficients::from_dense(&support, &dense, cast(1e-9))?;
        Ok(SolverOutcome {
            coeffs,
            stats: SolverStats {
                inner_iterations: iterations,
                terminated_by: cause,
            },
        })
    }
}
