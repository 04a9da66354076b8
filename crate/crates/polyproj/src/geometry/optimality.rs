//! Variational-inequality optimality certificates for the projection and
//! distance problems, plus the tolerance bundle used by the meta-algorithms.

use crate::error::{Error, Result};
use crate::geometry::{dot, PointCloud};
use crate::scalar::Scalar;

/// Tolerances steering the robust meta-algorithms.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances<T> {
    /// Outer stopping slack: the run stops once
    /// `min_i ⟨y - z, x_i - y⟩ >= -eta` (and the analogous pair conditions).
    pub eta: T,
    /// Treat-as-zero threshold for coefficient sign tests. Exact-zero tests
    /// on computed weights are meaningless in floating point.
    pub eps_zero: T,
    /// Accepted slack on `|Σ weights - 1|` for coefficient vectors.
    pub tau_sum: T,
    /// Cap on accepted outer iterations.
    pub max_outer: usize,
}

impl<T: Scalar> Tolerances<T> {
    pub fn new(eta: T, eps_zero: T, tau_sum: T, max_outer: usize) -> Result<Self> {
        if eta.is_nan() || eta <= T::zero() || !eta.is_finite() {
            return Err(Error::InvalidTolerances(format!(
                "eta must be positive and finite, got {eta}"
            )));
        }
        if eps_zero < T::zero() || tau_sum < T::zero() {
            return Err(Error::InvalidTolerances(
                "eps_zero and tau_sum must be nonnegative".into(),
            ));
        }
        if max_outer == 0 {
            return Err(Error::InvalidTolerances(
                "max_outer must be positive".into(),
            ));
        }
        Ok(Tolerances {
            eta,
            eps_zero,
            tau_sum,
            max_outer,
        })
    }

    /// Default stopping slack for the given dimension: `1e-4` in low to
    /// moderate dimensions, loosened to `5e-4` from `d = 50` on, where the
    /// tighter value intermittently becomes unreachable.
    pub fn default_for_dim(dim: usize) -> Self {
        let eta = if dim >= 50 { 5e-4 } else { 1e-4 };
        Tolerances {
            eta: crate::scalar::cast(eta),
            eps_zero: crate::scalar::cast(1e-12),
            tau_sum: crate::scalar::cast(1e-12),
            max_outer: 10_000,
        }
    }

    pub fn with_eta(mut self, eta: T) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_max_outer(mut self, max_outer: usize) -> Self {
        self.max_outer = max_outer;
        self
    }
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances::default_for_dim(0)
    }
}

/// Conservative consistency check between the outer stopping slack and the
/// inner solver accuracy: warns unless
/// `max{2 (diam + dist) eps, diam sqrt(max(0, 2 eps theta0 - eps²))} < eta
/// <= diam²`.
///
/// The bound is known to be far too pessimistic in practice; runs whose
/// parameters violate it usually still succeed, so this is informational
/// only and nothing acts on it automatically.
pub fn parameters_consistency_warning<T: Scalar>(
    diameter: T,
    distance: T,
    theta0: T,
    inner_epsilon: T,
    eta: T,
) -> Option<String> {
    let two = T::one() + T::one();
    let lower_a = two * (diameter + distance) * inner_epsilon;
    let lower_b = diameter
        * (two * inner_epsilon * theta0 - inner_epsilon * inner_epsilon)
            .max(T::zero())
            .sqrt();
    let lower = lower_a.max(lower_b);
    let upper = diameter * diameter;
    if eta > lower && eta <= upper {
        return None;
    }
    Some(format!(
        "eta = {eta} is outside the conservative consistency window ({lower}, {upper}] \
         derived from diameter {diameter}, distance {distance}, theta0 {theta0} and inner \
         accuracy {inner_epsilon}; the bound is loose and runs typically still succeed"
    ))
}

/// Outcome of the single-polytope optimality test.
#[derive(Clone, Copy, Debug)]
pub struct OptimalityCheck<T> {
    /// Whether `min_i ⟨y - z, x_i - y⟩ >= -eta`.
    pub satisfied: bool,
    /// Index attaining the minimum (smallest on ties).
    pub worst_index: usize,
    /// The attained minimum.
    pub worst_value: T,
    /// Index minimizing the raw inner product `⟨y - z, x_i⟩`; this is the
    /// steepest-descent insertion candidate. Same minimizer as
    /// `worst_index` up to round-off in the constant shift.
    pub insert_index: usize,
}

/// Tests global optimality of `y` for the projection of `z` onto the hull of
/// `cloud`: `y` is optimal iff every inner product `⟨y - z, x_i - y⟩` is
/// nonnegative. `eta >= 0` relaxes the test; `eta = 0` is the exact
/// criterion.
pub fn check_optimality<T: Scalar>(
    y: &[T],
    z: &[T],
    cloud: &PointCloud<T>,
    eta: T,
) -> Result<OptimalityCheck<T>> {
    let d = cloud.dim();
    if y.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: y.len(),
        });
    }
    if z.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: z.len(),
        });
    }
    let dir: Vec<T> = y.iter().zip(z.iter()).map(|(a, b)| *a - *b).collect();
    let y_term = dot(&dir, y);

    let mut worst_index = 0;
    let mut worst_value = T::infinity();
    let mut insert_index = 0;
    let mut insert_value = T::infinity();
    for (i, p) in cloud.iter_points().enumerate() {
        let raw = dot(&dir, p);
        if raw < insert_value {
            insert_value = raw;
            insert_index = i;
        }
        let shifted = raw - y_term;
        if shifted < worst_value {
            worst_value = shifted;
            worst_index = i;
        }
    }
    Ok(OptimalityCheck {
        satisfied: worst_value >= -eta,
        worst_index,
        worst_value,
        insert_index,
    })
}

/// Scaled variant of the stopping test: requires
/// `⟨y - z, x_i - y⟩ >= -eta ‖x_i - y‖` for every `i`. Returns the same
/// fields, with `worst_value` holding the most negative margin
/// `⟨y - z, x_i - y⟩ + eta ‖x_i - y‖`.
pub fn check_optimality_scaled<T: Scalar>(
    y: &[T],
    z: &[T],
    cloud: &PointCloud<T>,
    eta: T,
) -> Result<OptimalityCheck<T>> {
    let d = cloud.dim();
    if y.len() != d || z.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if y.len() != d { y.len() } else { z.len() },
        });
    }
    let dir: Vec<T> = y.iter().zip(z.iter()).map(|(a, b)| *a - *b).collect();
    let y_term = dot(&dir, y);

    let mut worst_index = 0;
    let mut worst_value = T::infinity();
    let mut insert_index = 0;
    let mut insert_value = T::infinity();
    for (i, p) in cloud.iter_points().enumerate() {
        let raw = dot(&dir, p);
        if raw < insert_value {
            insert_value = raw;
            insert_index = i;
        }
        let mut gap = T::zero();
        for (a, b) in p.iter().zip(y.iter()) {
            let d = *a - *b;
            gap += d * d;
        }
        let margin = (raw - y_term) + eta * gap.sqrt();
        if margin < worst_value {
            worst_value = margin;
            worst_index = i;
        }
    }
    Ok(OptimalityCheck {
        satisfied: worst_value >= T::zero(),
        worst_index,
        worst_value,
        insert_index,
    })
}

/// Outcome of the two-polytope optimality test.
#[derive(Clone, Copy, Debug)]
pub struct PairOptimalityCheck<T> {
    /// `min_i ⟨v - w, x_i - v⟩` over the first cloud.
    pub rho_x: T,
    /// `min_j ⟨w - v, y_j - w⟩` over the second cloud.
    pub rho_y: T,
    /// Whether both minima are at least `-eta`.
    pub satisfied: bool,
    /// Index attaining `rho_x` (smallest on ties); also the steepest-descent
    /// insertion candidate for the first cloud.
    pub insert_index_p: usize,
    /// Index attaining `rho_y`.
    pub insert_index_q: usize,
}

/// Tests whether the pair `(v, w)` is an (eta-approximate) optimal solution
/// of the distance problem between the hulls of `cloud_p` and `cloud_q`:
/// `v` must be the projection of `w` onto the first hull and vice versa.
pub fn check_pair_optimality<T: Scalar>(
    v: &[T],
    w: &[T],
    cloud_p: &PointCloud<T>,
    cloud_q: &PointCloud<T>,
    eta: T,
) -> Result<PairOptimalityCheck<T>> {
    let d = cloud_p.dim();
    if cloud_q.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: cloud_q.dim(),
        });
    }
    if v.len() != d || w.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if v.len() != d { v.len() } else { w.len() },
        });
    }
    let dir: Vec<T> = v.iter().zip(w.iter()).map(|(a, b)| *a - *b).collect();
    let v_term = dot(&dir, v);
    let w_term = dot(&dir, w);

    let mut rho_x = T::infinity();
    let mut insert_index_p = 0;
    for (i, p) in cloud_p.iter_points().enumerate() {
        let val = dot(&dir, p) - v_term;
        if val < rho_x {
            rho_x = val;
            insert_index_p = i;
        }
    }
    let mut rho_y = T::infinity();
    let mut insert_index_q = 0;
    for (j, q) in cloud_q.iter_points().enumerate() {
        let val = w_term - dot(&dir, q);
        if val < rho_y {
            rho_y = val;
            insert_index_q = j;
        }
    }
    Ok(PairOptimalityCheck {
        rho_x,
        rho_y,
        satisfied: rho_x >= -eta && rho_y >= -eta,
        insert_index_p,
        insert_index_q,
    })
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
    fn optimal_point_passes() {
        // The projection of the origin onto the example quadrilateral; the
        // worst inner product is 0 up to round-off, so allow a whisker of
        // slack instead of eta = 0 exactly.
        let y = [-6.0 / 17.0, 24.0 / 17.0];
        let check = check_optimality(&y, &[0.0, 0.0], &example_cloud(), 1e-12).unwrap();
        assert!(check.satisfied, "worst = {}", check.worst_value);
    }

    #[test]
    fn suboptimal_vertex_fails_with_expected_witness() {
        let y = [1.0, 1.0];
        let check = check_optimality(&y, &[0.0, 0.0], &remark_cloud(), 0.0).unwrap();
        assert!(!check.satisfied);
        assert_eq!(check.worst_index, 3);
        assert_eq!(check.worst_value, -2.0);
        assert_eq!(check.insert_index, 3);
    }

    #[test]
    fn query_at_vertex_is_optimal_for_any_eta() {
        let cloud = remark_cloud();
        let y = [2.0, 2.0];
        let check = check_optimality(&y, &y, &cloud, 0.0).unwrap();
        assert!(check.satisfied);
        assert_eq!(check.worst_value, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let cloud = remark_cloud();
        assert!(check_optimality(&[0.0], &[0.0, 0.0], &cloud, 0.0).is_err());
        assert!(check_optimality(&[0.0, 0.0], &[0.0], &cloud, 0.0).is_err());
    }

    #[test]
    fn pair_check_coincident_points() {
        let p = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let q = PointCloud::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let v = [0.0, 0.0];
        let check = check_pair_optimality(&v, &v, &p, &q, 0.0).unwrap();
        assert_eq!(check.rho_x, 0.0);
        assert_eq!(check.rho_y, 0.0);
        assert!(check.satisfied);
    }

    #[test]
    fn pair_check_singletons() {
        let p = PointCloud::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let q = PointCloud::from_rows(&[vec![-1.0, 0.0]]).unwrap();
        let check = check_pair_optimality(&[1.0, 0.0], &[-1.0, 0.0], &p, &q, 0.0).unwrap();
        assert_eq!(check.rho_x, 0.0);
        assert_eq!(check.rho_y, 0.0);
        assert!(check.satisfied);
    }

    #[test]
    fn scaled_criterion_agrees_on_clear_cases() {
        let cloud = remark_cloud();
        let strict = check_optimality(&[1.0, 1.0], &[0.0, 0.0], &cloud, 0.0).unwrap();
        let scaled = check_optimality_scaled(&[1.0, 1.0], &[0.0, 0.0], &cloud, 1e-9).unwrap();
        assert!(!strict.satisfied && !scaled.satisfied);
        assert_eq!(strict.insert_index, scaled.insert_index);
    }

    #[test]
    fn consistency_window_behaves() {
        // diam 2.83, dist 1, theta0 1.5, eps 1e-10: lower bound about
        // 2.9e-5, upper 8; eta = 1e-4 sits inside.
        assert!(parameters_consistency_warning(2.83, 1.0, 1.5, 1e-10, 1e-4).is_none());
        // Sloppy inner solver: eps = 1e-3 pushes the lower bound above eta.
        assert!(parameters_consistency_warning(2.83, 1.0, 1.5, 1e-3, 1e-4).is_some());
        // eta above diam² is flagged too.
        assert!(parameters_consistency_warning(2.83, 1.0, 1.5, 1e-10, 10.0).is_some());
    }

    #[test]
    fn tolerances_validation() {
        assert!(Tolerances::new(1e-4, 1e-12, 1e-12, 100).is_ok());
        assert!(Tolerances::<f64>::new(0.0, 1e-12, 1e-12, 100).is_err());
        assert!(Tolerances::new(1e-4, -1.0, 1e-12, 100).is_err());
        assert!(Tolerances::new(1e-4, 1e-12, 1e-12, 0).is_err());
        assert_eq!(Tolerances::<f64>::default_for_dim(3).eta, 1e-4);
        assert_eq!(Tolerances::<f64>::default_for_dim(50).eta, 5e-4);
    }
}
