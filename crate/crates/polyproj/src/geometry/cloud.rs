//! Finite point sets whose convex hulls are the polytopes being projected on.

use crate::error::{Error, Result};
use crate::geometry::distance_between;
use crate::scalar::Scalar;

/// An indexed set of points in `R^d`, stored contiguously row-major.
///
/// The convex hull of the points is the polytope all operations refer to.
/// Points are addressed by 0-based index; duplicates are permitted and all
/// set logic in the meta-algorithms is driven by index identity, not by
/// geometric identity.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> PointCloud<T> {
    /// Builds a cloud from a flat row-major buffer of `len * dim` coordinates.
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidCloud("dimension must be positive".into()));
        }
        if data.is_empty() {
            return Err(Error::InvalidCloud(
                "cloud must contain at least one point".into(),
            ));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidCloud(format!(
                "buffer of {} coordinates is not a multiple of dimension {}",
                data.len(),
                dim
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidCloud(format!(
                "non-finite coordinate at point {}, component {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(PointCloud { dim, data })
    }

    /// Builds a cloud from one row per point.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidCloud(format!(
                    "point {} has {} coordinates, expected {}",
                    i,
                    row.len(),
                    dim
                )));
            }
            data.extend_from_slice(row);
        }
        PointCloud::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one point
    }

    /// Coordinates of point `i`.
    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Checked access to point `i`.
    pub fn try_point(&self, i: usize) -> Result<&[T]> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(self.point(i))
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    /// Validates an index list against this cloud: nonempty, in range,
    /// pairwise distinct.
    pub fn check_indices(&self, indices: &[usize]) -> Result<()> {
        if indices.is_empty() {
            return Err(Error::EmptyIndices);
        }
        let len = self.len();
        for (pos, &i) in indices.iter().enumerate() {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
            if indices[..pos].contains(&i) {
                return Err(Error::DuplicateIndex { index: i });
            }
        }
        Ok(())
    }

    /// Exact diameter `max_{i,j} ‖x_i - x_j‖` over all point pairs.
    ///
    /// Quadratic in the number of points; intended for diagnostics on
    /// desk-scale inputs, not for hot paths.
    pub fn diameter(&self) -> T {
        let n = self.len();
        let mut best = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                let d = distance_between(self.point(i), self.point(j));
                if d > best {
                    best = d;
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = PointCloud::new(2, vec![0.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::InvalidCloud(_)));
    }

    #[test]
    fn diameter_single_point_is_zero() {
        let c = PointCloud::new(3, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.diameter(), 0.0);
    }

    #[test]
    fn diameter_worked_quadrilateral() {
        // Pairwise distances: max is between (2,2) and (-2,1), sqrt(17).
        let c = PointCloud::from_rows(&[
            vec![0.0, 4.0],
            vec![0.0, 2.0],
            vec![2.0, 2.0],
            vec![-2.0, 1.0],
        ])
        .unwrap();
        assert!((c.diameter() - 17.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn diameter_unit_cube_corners() {
        let mut rows = Vec::new();
        for i in 0..8 {
            rows.push(vec![
                (i & 1) as f64,
                ((i >> 1) & 1) as f64,
                ((i >> 2) & 1) as f64,
            ]);
        }
        let c = PointCloud::from_rows(&rows).unwrap();
        assert!((c.diameter() - 3.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn diameter_permutation_and_scaling() {
        let rows = vec![vec![0.5, -1.0], vec![2.0, 0.25], vec![-1.5, 3.0]];
        let base = PointCloud::from_rows(&rows).unwrap();
        let mut perm = rows.clone();
        perm.rotate_left(1);
        let permuted = PointCloud::from_rows(&perm).unwrap();
        assert_eq!(base.diameter(), permuted.diameter());

        let scaled_rows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v * 4.0).collect())
            .collect();
        let scaled = PointCloud::from_rows(&scaled_rows).unwrap();
        assert!((scaled.diameter() - 4.0 * base.diameter()).abs() < 1e-12);
    }

    #[test]
    fn index_validation() {
        let c = PointCloud::new(2, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(c.check_indices(&[0, 1]).is_ok());
        assert!(matches!(c.check_indices(&[]), Err(Error::EmptyIndices)));
        assert!(matches!(
            c.check_indices(&[0, 2]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            c.check_indices(&[1, 1]),
            Err(Error::DuplicateIndex { .. })
        ));
    }
}
