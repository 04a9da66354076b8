//! Convex combination coefficients returned by every inner solver.

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::scalar::Scalar;

/// Barycentric weight vector over an index set of a [`PointCloud`].
///
/// Invariants enforced at construction: support indices are distinct and the
/// weights are nonnegative, finite and aligned with the support. The sum of
/// the weights is expected to be 1 up to a caller-chosen slack; see
/// [`ConvexCoefficients::sum_error`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexCoefficients<T> {
    support: Vec<usize>,
    weights: Vec<T>,
}

impl<T: Scalar> ConvexCoefficients<T> {
    pub fn new(support: Vec<usize>, weights: Vec<T>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidCoefficients("empty support".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidCoefficients(format!(
                "support has {} indices but {} weights given",
                support.len(),
                weights.len()
            )));
        }
        for (pos, &i) in support.iter().enumerate() {
            if support[..pos].contains(&i) {
                return Err(Error::DuplicateIndex { index: i });
            }
        }
        for (&i, &w) in support.iter().zip(weights.iter()) {
            if !w.is_finite() || w < T::zero() {
                return Err(Error::InvalidCoefficients(format!(
                    "weight {w} for index {i} is negative or non-finite"
                )));
            }
        }
        Ok(ConvexCoefficients { support, weights })
    }

    /// Places all mass on a single point.
    pub fn vertex(index: usize) -> Self {
        ConvexCoefficients {
            support: vec![index],
            weights: vec![T::one()],
        }
    }

    /// Builds coefficients from a dense weight vector aligned with `indices`,
    /// clamping tiny negative round-off (at most `clamp_tol` in magnitude) to
    /// zero and renormalizing the sum to 1. Larger negative entries are
    /// rejected.
    pub fn from_dense(indices: &[usize], dense: &[T], clamp_tol: T) -> Result<Self> {
        if indices.len() != dense.len() {
            return Err(Error::InvalidCoefficients(
                "dense weight vector length does not match index list".into(),
            ));
        }
        let mut weights = Vec::with_capacity(dense.len());
        for (&i, &w) in indices.iter().zip(dense.iter()) {
            if !w.is_finite() {
                return Err(Error::InvalidCoefficients(format!(
                    "non-finite weight for index {i}"
                )));
            }
            if w < -clamp_tol {
                return Err(Error::InvalidCoefficients(format!(
                    "weight {w} for index {i} below -{clamp_tol}"
                )));
            }
            weights.push(w.max(T::zero()));
        }
        let total: T = weights.iter().copied().sum();
        if total <= T::zero() {
            return Err(Error::InvalidCoefficients("weights sum to zero".into()));
        }
        for w in &mut weights {
            *w /= total;
        }
        ConvexCoefficients::new(indices.to_vec(), weights)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `|Σ weights - 1|`.
    pub fn sum_error(&self) -> T {
        let s: T = self.weights.iter().copied().sum();
        (s - T::one()).abs()
    }

    /// Weight attached to cloud index `i` (0 when outside the support).
    pub fn weight_of(&self, i: usize) -> T {
        match self.support.iter().position(|&s| s == i) {
            Some(pos) => self.weights[pos],
            None => T::zero(),
        }
    }

    /// Dense weight vector aligned with `indices`; all support indices must
    /// appear in `indices`.
    pub fn dense_over(&self, indices: &[usize]) -> Result<Vec<T>> {
        let mut dense = vec![T::zero(); indices.len()];
        for (&i, &w) in self.support.iter().zip(self.weights.iter()) {
            match indices.iter().position(|&s| s == i) {
                Some(pos) => dense[pos] += w,
                None => {
                    if w != T::zero() {
                        return Err(Error::InvalidCoefficients(format!(
                            "support index {i} carries weight but is absent from the index list"
                        )));
                    }
                }
            }
        }
        Ok(dense)
    }

    /// The convex combination `Σ α_i x_i` these coefficients describe.
    pub fn evaluate(&self, cloud: &PointCloud<T>) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); cloud.dim()];
        for (&i, &w) in self.support.iter().zip(self.weights.iter()) {
            let p = cloud.try_point(i)?;
            for (o, &c) in out.iter_mut().zip(p.iter()) {
                *o += w * c;
            }
        }
        Ok(out)
    }

    /// Restricts the support to indices with weight above `tol`, keeping at
    /// least the single heaviest index.
    pub fn pruned(&self, tol: T) -> Self {
        let mut support = Vec::new();
        let mut weights = Vec::new();
        for (&i, &w) in self.support.iter().zip(self.weights.iter()) {
            if w > tol {
                support.push(i);
                weights.push(w);
            }
        }
        if support.is_empty() {
            let mut best = 0;
            for (pos, &w) in self.weights.iter().enumerate() {
                if w > self.weights[best] {
                    best = pos;
                }
            }
            support.push(self.support[best]);
            weights.push(self.weights[best]);
        }
        ConvexCoefficients { support, weights }
    }
}

/// The point `Σ α_i x_i` described by `coeffs` over `cloud`.
pub fn evaluate_point<T: Scalar>(
    coeffs: &ConvexCoefficients<T>,
    cloud: &PointCloud<T>,
) -> Result<Vec<T>> {
    coeffs.evaluate(cloud)
}
