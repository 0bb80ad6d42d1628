//! JSON problem descriptions.
//!
//! ```json
//! {"dim": 2, "sets": [
//!   {"type": "ball", "center": [1, 1], "radius": 1},
//!   {"type": "subspace", "basis": [[1], [0]]},
//!   {"type": "halfspace", "a": [1, 0], "b": 0},
//!   {"type": "box", "lower": [0, 0], "upper": [1, 1]}
//! ]}
//! ```
//!
//! Matrices are row-major: a subspace basis in Rⁿ spanned by `d` vectors is given as
//! `n` rows of `d` entries each, the columns being the spanning vectors.

use serde::{Deserialize, Serialize};

use super::{ConvexSet, LinearSubspace, Vector};
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub dim: usize,
    pub sets: Vec<SetSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Subspace {
        basis: Vec<Vec<f64>>,
    },
    Affine {
        offset: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
    Halfspace {
        a: Vec<f64>,
        b: f64,
    },
    Hyperplane {
        a: Vec<f64>,
        b: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Problem(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem serializes")
    }

    /// Validates every set against `dim` and builds the projectors. Errors name the
    /// offending field, e.g. `sets[1].radius`.
    pub fn build(&self) -> Result<Vec<ConvexSet>> {
        if self.dim == 0 {
            return Err(Error::Problem("dim: must be positive".into()));
        }
        self.sets
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.build(self.dim)
                    .map_err(|e| Error::Problem(format!("sets[{i}].{e}")))
            })
            .collect()
    }
}

impl SetSpec {
    fn build(&self, dim: usize) -> std::result::Result<ConvexSet, String> {
        let vector = |field: &str, v: &[f64]| -> std::result::Result<Vector, String> {
            if v.len() != dim {
                return Err(format!(
                    "{field}: expected {dim} entries, found {}",
                    v.len()
                ));
            }
            Ok(Vector::from_column_slice(v))
        };
        let basis = |rows: &[Vec<f64>]| -> std::result::Result<LinearSubspace, String> {
            if rows.len() != dim {
                return Err(format!("basis: expected {dim} rows, found {}", rows.len()));
            }
            let cols = rows.first().map_or(0, Vec::len);
            if let Some(r) = rows.iter().position(|r| r.len() != cols) {
                return Err(format!(
                    "basis: row {r} has {} entries, expected {cols}",
                    rows[r].len()
                ));
            }
            LinearSubspace::from_columns(&linalg::matrix_from_rows(rows, cols))
                .map_err(|e| format!("basis: {e}"))
        };
        match self {
            SetSpec::Ball { center, radius } => {
                let c = vector("center", center)?;
                if !(*radius >= 0.0) {
                    return Err(format!("radius: must be nonnegative, got {radius}"));
                }
                ConvexSet::ball(c, *radius).map_err(|e| format!("radius: {e}"))
            }
            SetSpec::Subspace { basis: rows } => Ok(ConvexSet::Subspace(basis(rows)?)),
            SetSpec::Affine {
                offset,
                basis: rows,
            } => {
                let y = vector("offset", offset)?;
                ConvexSet::affine(y, basis(rows)?).map_err(|e| format!("offset: {e}"))
            }
            SetSpec::Halfspace { a, b } => {
                ConvexSet::halfspace(vector("a", a)?, *b).map_err(|e| format!("a: {e}"))
            }
            SetSpec::Hyperplane { a, b } => {
                ConvexSet::hyperplane(vector("a", a)?, *b).map_err(|e| format!("a: {e}"))
            }
            SetSpec::Box { lower, upper } => {
                let l = vector("lower", lower)?;
                let u = vector("upper", upper)?;
                ConvexSet::boxed(l, u).map_err(|e| format!("upper: {e}"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn parses_every_documented_family() {
        let text = r#"{"dim": 2, "sets": [
            {"type": "ball", "center": [1, 1], "radius": 1},
            {"type": "subspace", "basis": [[1], [0]]},
            {"type": "halfspace", "a": [1, 0], "b": 0},
            {"type": "box", "lower": [0, 0], "upper": [1, 1]},
            {"type": "hyperplane", "a": [0, 1], "b": 2},
            {"type": "affine", "offset": [0, 1], "basis": [[1], [0]]}
        ]}"#;
        let sets = Problem::from_json(text).unwrap().build().unwrap();
        assert_eq!(sets.len(), 6);
        assert_eq!(sets[1].project(&dvector![3.0, 4.0]), dvector![3.0, 0.0]);
        assert_eq!(sets[5].project(&dvector![3.0, 4.0]), dvector![3.0, 1.0]);
    }

    #[test]
    fn negative_radius_names_the_field() {
        let text = r#"{"dim": 2, "sets": [{"type": "ball", "center": [0, 0], "radius": -1}]}"#;
        let err = Problem::from_json(text).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("sets[0].radius"), "{err}");
    }

    #[test]
    fn wrong_length_names_the_field() {
        let text = r#"{"dim": 3, "sets": [{"type": "box", "lower": [0, 0], "upper": [1, 1, 1]}]}"#;
        let err = Problem::from_json(text).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("sets[0].lower"), "{err}");
    }

    #[test]
    fn missing_field_is_reported_by_name() {
        let text = r#"{"dim": 2, "sets": [{"type": "ball", "center": [0, 0]}]}"#;
        let err = Problem::from_json(text).unwrap_err();
        assert!(err.to_string().contains("radius"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let p = Problem {
            dim: 2,
            sets: vec![SetSpec::Halfspace {
                a: vec![1.0, 2.0],
                b: 0.5,
            }],
        };
        assert_eq!(Problem::from_json(&p.to_json()).unwrap(), p);
    }
}
