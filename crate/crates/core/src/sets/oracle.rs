//! Closed-form ground truth for projections onto intersections.

use nalgebra::DMatrix;

use super::{ConvexSet, Vector};
use crate::error::{Error, Result};
use crate::geometry;

/// Projection of `x` onto the intersection of `sets`, computed without iteration.
///
/// Supported families: a single set of any kind; any number of linear or affine
/// subspaces (hyperplanes included); any number of boxes. Two linear subspaces go
/// through the principal-vector intersection basis, general affine families through
/// the least-norm correction `x - M⁺(Mx - c)` of the stacked normal equations, and
/// boxes through the componentwise intersection box. `tol` bounds the consistency
/// check on affine families.
pub fn project_intersection_oracle(sets: &[ConvexSet], x: &Vector, tol: f64) -> Result<Vector> {
    let first = sets.first().ok_or_else(|| {
        Error::InvalidParameter("intersection oracle needs at least one set".into())
    })?;
    for s in sets {
        Error::check_dim(first.dim(), s.dim())?;
    }
    Error::check_dim(first.dim(), x.len())?;

    if sets.len() == 1 {
        return Ok(first.project(x));
    }
    if let [ConvexSet::Subspace(u), ConvexSet::Subspace(v)] = sets {
        let basis = geometry::subspace_intersection(u.basis(), v.basis(), geometry::ZERO_ANGLE_TOL);
        return Ok(crate::linalg::project_onto_columns(&basis, x));
    }
    if let Some(boxes) = sets
        .iter()
        .map(ConvexSet::as_box)
        .collect::<Option<Vec<_>>>()
    {
        let n = x.len();
        let lower = Vector::from_fn(n, |i, _| {
            boxes
                .iter()
                .map(|b| b.lower()[i])
                .fold(f64::NEG_INFINITY, f64::max)
        });
        let upper = Vector::from_fn(n, |i, _| {
            boxes
                .iter()
                .map(|b| b.upper()[i])
                .fold(f64::INFINITY, f64::min)
        });
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::EmptyIntersection);
        }
        return Ok(Vector::from_fn(n, |i, _| x[i].clamp(lower[i], upper[i])));
    }
    if let Some(affine) = sets
        .iter()
        .map(ConvexSet::as_affine)
        .collect::<Option<Vec<_>>>()
    {
        let n = x.len();
        let mut rows: Vec<Vector> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        for a in &affine {
            let normals = a.direction().orthogonal_complement();
            for col in normals.basis().column_iter() {
                rhs.push(col.dot(a.offset()));
                rows.push(col.into_owned());
            }
        }
        if rows.is_empty() {
            return Ok(x.clone());
        }
        let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        let c = Vector::from_vec(rhs);
        let residual = &m * x - c;
        let svd = m.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max().max(1.0);
        let correction = svd
            .solve(&residual, cutoff)
            .map_err(|e| Error::InvalidParameter(format!("affine oracle solve failed: {e}")))?;
        let z = x - correction;
        for a in &affine {
            if (a.project(&z) - &z).norm() > tol.max(1e-9) * (1.0 + z.norm()) {
                return Err(Error::EmptyIntersection);
            }
        }
        return Ok(z);
    }
    let kinds: Vec<&str> = sets.iter().map(ConvexSet::kind).collect();
    Err(Error::NoOracle(kinds.join(", ")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn overlapping_boxes_clamp_into_the_common_box() {
        let sets = [
            ConvexSet::boxed(dvector![0.0, 0.0], dvector![2.0, 2.0]).unwrap(),
            ConvexSet::boxed(dvector![1.0, 1.0], dvector![3.0, 3.0]).unwrap(),
        ];
        let p = project_intersection_oracle(&sets, &dvector![0.0, 0.0], 1e-12).unwrap();
        assert_eq!(p, dvector![1.0, 1.0]);
    }

    #[test]
    fn coordinate_planes_meet_in_the_shared_axis() {
        let sets = [
            ConvexSet::span(3, &[dvector![1.0, 0.0, 0.0], dvector![0.0, 1.0, 0.0]]).unwrap(),
            ConvexSet::span(3, &[dvector![0.0, 1.0, 0.0], dvector![0.0, 0.0, 1.0]]).unwrap(),
        ];
        let p = project_intersection_oracle(&sets, &dvector![1.0, 2.0, 3.0], 1e-12).unwrap();
        assert!((p - dvector![0.0, 2.0, 0.0]).norm() < 1e-12);
    }

    #[test]
    fn single_set_reduces_to_its_projector() {
        let b = ConvexSet::ball(dvector![0.0, 0.0], 1.0).unwrap();
        let x = dvector![3.0, 4.0];
        let p = project_intersection_oracle(std::slice::from_ref(&b), &x, 1e-12).unwrap();
        assert_eq!(p, b.project(&x));
    }

    #[test]
    fn hyperplanes_meet_in_a_point() {
        let sets = [
            ConvexSet::hyperplane(dvector![1.0, 0.0], 1.0).unwrap(),
            ConvexSet::hyperplane(dvector![1.0, 1.0], 3.0).unwrap(),
        ];
        let p = project_intersection_oracle(&sets, &dvector![-5.0, 7.0], 1e-12).unwrap();
        assert!((p - dvector![1.0, 2.0]).norm() < 1e-12);
    }

    #[test]
    fn parallel_hyperplanes_are_reported_empty() {
        let sets = [
            ConvexSet::hyperplane(dvector![1.0, 0.0], 1.0).unwrap(),
            ConvexSet::hyperplane(dvector![1.0, 0.0], 2.0).unwrap(),
        ];
        assert_eq!(
            project_intersection_oracle(&sets, &dvector![0.0, 0.0], 1e-12),
            Err(Error::EmptyIntersection)
        );
    }

    #[test]
    fn disjoint_boxes_are_reported_empty() {
        let sets = [
            ConvexSet::boxed(dvector![0.0], dvector![1.0]).unwrap(),
            ConvexSet::boxed(dvector![2.0], dvector![3.0]).unwrap(),
        ];
        assert_eq!(
            project_intersection_oracle(&sets, &dvector![0.0], 1e-12),
            Err(Error::EmptyIntersection)
        );
    }

    #[test]
    fn balls_have_no_oracle() {
        let sets = [
            ConvexSet::ball(dvector![0.0, 0.0], 1.0).unwrap(),
            ConvexSet::ball(dvector![1.0, 0.0], 1.0).unwrap(),
        ];
        assert!(matches!(
            project_intersection_oracle(&sets, &dvector![0.0, 0.0], 1e-12),
            Err(Error::NoOracle(_))
        ));
    }
}
