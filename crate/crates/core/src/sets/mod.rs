//! Closed convex sets with exact projectors.
//!
//! Every family here has a closed-form projector. The wrapper variants
//! ([`Translate`], [`Scaled`], [`ProductSet`], [`Diagonal`]) build the derived sets
//! used by the solvers: shifted problems `C - q`, dilations `λC`, and the product-space
//! lift of an `r`-set problem.

mod oracle;
mod problem;

pub use oracle::project_intersection_oracle;
pub use problem::{Problem, SetSpec};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

pub type Vector = DVector<f64>;

/// Default membership tolerance, scaled by `1 + ‖x‖`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Linear subspace stored through an orthonormal basis `Q` (`n x d`, `d` may be 0).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSubspace {
    basis: DMatrix<f64>,
}

impl LinearSubspace {
    /// Subspace spanned by the columns of `m`; the columns are orthonormalized and
    /// dependent columns are dropped.
    pub fn from_columns(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::InvalidSet(
                "subspace ambient dimension must be positive".into(),
            ));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSet(
                "subspace basis has non-finite entries".into(),
            ));
        }
        Ok(Self {
            basis: linalg::orthonormal_basis(m),
        })
    }

    /// Subspace spanned by the given vectors.
    pub fn span(dim: usize, vectors: &[Vector]) -> Result<Self> {
        for v in vectors {
            Error::check_dim(dim, v.len())?;
        }
        let m = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i]);
        Self::from_columns(&m)
    }

    /// Wraps a basis that is already orthonormal, checking `QᵀQ = I` to `1e-12·n`.
    pub fn from_orthonormal(q: DMatrix<f64>) -> Result<Self> {
        let defect = linalg::orthonormality_defect(&q);
        if defect > 1e-12 * q.nrows().max(1) as f64 {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Self { basis: q })
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            basis: DMatrix::zeros(dim, 0),
        }
    }

    pub fn whole(dim: usize) -> Self {
        Self {
            basis: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Dimension of the subspace itself.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn project(&self, x: &Vector) -> Vector {
        linalg::project_onto_columns(&self.basis, x)
    }

    pub fn orthogonal_complement(&self) -> LinearSubspace {
        Self {
            basis: linalg::orthogonal_complement(&self.basis),
        }
    }
}

/// `offset + direction`, with `offset` the minimum-norm point of the affine subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    offset: Vector,
    direction: LinearSubspace,
}

impl AffineSubspace {
    pub fn new(point: Vector, direction: LinearSubspace) -> Result<Self> {
        Error::check_dim(direction.dim(), point.len())?;
        check_finite(&point, "affine offset")?;
        let offset = &point - direction.project(&point);
        Ok(Self { offset, direction })
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn direction(&self) -> &LinearSubspace {
        &self.direction
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let shifted = x - &self.offset;
        &self.offset + self.direction.project(&shifted)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vector,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        check_finite(&center, "ball center")?;
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidSet(format!(
                "ball radius must be a nonnegative real, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let d = x - &self.center;
        let dist = d.norm();
        if dist <= self.radius {
            return x.clone();
        }
        &self.center + d * (self.radius / dist)
    }
}

/// `{x : ⟨a, x⟩ ≤ b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    normal: Vector,
    offset: f64,
    normal_sq: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let normal_sq = check_normal(&normal, offset)?;
        Ok(Self {
            normal,
            offset,
            normal_sq,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let excess = self.normal.dot(x) - self.offset;
        if excess <= 0.0 {
            x.clone()
        } else {
            x - &self.normal * (excess / self.normal_sq)
        }
    }
}

/// `{x : ⟨a, x⟩ = b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
    normal_sq: f64,
}

impl Hyperplane {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let normal_sq = check_normal(&normal, offset)?;
        Ok(Self {
            normal,
            offset,
            normal_sq,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let excess = self.normal.dot(x) - self.offset;
        x - &self.normal * (excess / self.normal_sq)
    }
}

/// Axis-aligned box `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: Vector,
    upper: Vector,
}

impl BoxSet {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        Error::check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidSet("box must have positive dimension".into()));
        }
        for (i, (l, u)) in lower.iter().zip(upper.iter()).enumerate() {
            if l.is_nan() || u.is_nan() || l > u {
                return Err(Error::InvalidSet(format!(
                    "box bounds violate lower <= upper at index {i}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    pub fn project(&self, x: &Vector) -> Vector {
        Vector::from_fn(x.len(), |i, _| x[i].clamp(self.lower[i], self.upper[i]))
    }
}

/// `inner - shift`, projected as `P_inner(x + shift) - shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct Translate {
    inner: Box<ConvexSet>,
    shift: Vector,
}

impl Translate {
    pub fn new(inner: ConvexSet, shift: Vector) -> Result<Self> {
        Error::check_dim(inner.dim(), shift.len())?;
        check_finite(&shift, "translation")?;
        Ok(Self {
            inner: Box::new(inner),
            shift,
        })
    }

    pub fn inner(&self) -> &ConvexSet {
        &self.inner
    }

    pub fn shift(&self) -> &Vector {
        &self.shift
    }

    pub fn project(&self, x: &Vector) -> Vector {
        self.inner.project(&(x + &self.shift)) - &self.shift
    }
}

/// `factor · inner`, projected as `factor · P_inner(x / factor)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaled {
    inner: Box<ConvexSet>,
    factor: f64,
}

impl Scaled {
    pub fn new(inner: ConvexSet, factor: f64) -> Result<Self> {
        if factor == 0.0 || !factor.is_finite() {
            return Err(Error::InvalidSet(format!(
                "scale factor must be finite and nonzero, got {factor}"
            )));
        }
        Ok(Self {
            inner: Box::new(inner),
            factor,
        })
    }

    pub fn inner(&self) -> &ConvexSet {
        &self.inner
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn project(&self, x: &Vector) -> Vector {
        self.inner.project(&(x / self.factor)) * self.factor
    }
}

/// Cartesian product `C_1 × … × C_r`, acting blockwise on a stacked vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSet {
    factors: Vec<ConvexSet>,
    dim: usize,
}

impl ProductSet {
    pub fn new(factors: Vec<ConvexSet>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSet("product of zero sets".into()));
        }
        let dim = factors.iter().map(ConvexSet::dim).sum();
        Ok(Self { factors, dim })
    }

    pub fn factors(&self) -> &[ConvexSet] {
        &self.factors
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim);
        let mut start = 0;
        for factor in &self.factors {
            let len = factor.dim();
            let block = x.rows(start, len).into_owned();
            out.rows_mut(start, len).copy_from(&factor.project(&block));
            start += len;
        }
        out
    }
}

/// Diagonal `{(x, …, x)} ⊆ (Rⁿ)^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diagonal {
    copies: usize,
    base_dim: usize,
}

impl Diagonal {
    pub fn new(copies: usize, base_dim: usize) -> Result<Self> {
        if copies == 0 || base_dim == 0 {
            return Err(Error::InvalidSet(
                "diagonal needs at least one copy of a nonzero space".into(),
            ));
        }
        Ok(Self { copies, base_dim })
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    /// Blockwise mean of a stacked vector.
    pub fn block_mean(&self, x: &Vector) -> Vector {
        let n = self.base_dim;
        let mut mean = Vector::zeros(n);
        for j in 0..self.copies {
            mean += x.rows(j * n, n);
        }
        mean / self.copies as f64
    }

    /// Stacks `r` copies of a base-space vector.
    pub fn embed(&self, x: &Vector) -> Vector {
        let n = self.base_dim;
        Vector::from_fn(n * self.copies, |i, _| x[i % n])
    }

    pub fn project(&self, x: &Vector) -> Vector {
        self.embed(&self.block_mean(x))
    }
}

/// A nonempty closed convex subset of Rⁿ with an exact projector.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Subspace(LinearSubspace),
    Affine(AffineSubspace),
    Ball(Ball),
    Halfspace(Halfspace),
    Hyperplane(Hyperplane),
    Box(BoxSet),
    Translate(Translate),
    Scaled(Scaled),
    Product(ProductSet),
    Diagonal(Diagonal),
}

impl ConvexSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        Ball::new(center, radius).map(Self::Ball)
    }

    pub fn subspace(m: &DMatrix<f64>) -> Result<Self> {
        LinearSubspace::from_columns(m).map(Self::Subspace)
    }

    pub fn span(dim: usize, vectors: &[Vector]) -> Result<Self> {
        LinearSubspace::span(dim, vectors).map(Self::Subspace)
    }

    pub fn whole(dim: usize) -> Self {
        Self::Subspace(LinearSubspace::whole(dim))
    }

    pub fn affine(point: Vector, direction: LinearSubspace) -> Result<Self> {
        AffineSubspace::new(point, direction).map(Self::Affine)
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        Halfspace::new(normal, offset).map(Self::Halfspace)
    }

    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        Hyperplane::new(normal, offset).map(Self::Hyperplane)
    }

    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        BoxSet::new(lower, upper).map(Self::Box)
    }

    pub fn product(factors: Vec<ConvexSet>) -> Result<Self> {
        ProductSet::new(factors).map(Self::Product)
    }

    pub fn diagonal(copies: usize, base_dim: usize) -> Result<Self> {
        Diagonal::new(copies, base_dim).map(Self::Diagonal)
    }

    /// The set `self - shift`, as a [`Translate`] wrapper.
    pub fn minus(self, shift: &Vector) -> Result<Self> {
        Translate::new(self, shift.clone()).map(Self::Translate)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Subspace(s) => s.dim(),
            Self::Affine(s) => s.dim(),
            Self::Ball(s) => s.center.len(),
            Self::Halfspace(s) => s.normal.len(),
            Self::Hyperplane(s) => s.normal.len(),
            Self::Box(s) => s.lower.len(),
            Self::Translate(s) => s.shift.len(),
            Self::Scaled(s) => s.inner.dim(),
            Self::Product(s) => s.dim,
            Self::Diagonal(s) => s.copies * s.base_dim,
        }
    }

    /// Short family name, used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Subspace(_) => "subspace",
            Self::Affine(_) => "affine",
            Self::Ball(_) => "ball",
            Self::Halfspace(_) => "halfspace",
            Self::Hyperplane(_) => "hyperplane",
            Self::Box(_) => "box",
            Self::Translate(_) => "translate",
            Self::Scaled(_) => "scaled",
            Self::Product(_) => "product",
            Self::Diagonal(_) => "diagonal",
        }
    }

    /// Nearest point of the set to `x`.
    ///
    /// Panics if `x` has the wrong length; see [`ConvexSet::try_project`].
    pub fn project(&self, x: &Vector) -> Vector {
        assert_eq!(
            x.len(),
            self.dim(),
            "projection argument has the wrong dimension"
        );
        match self {
            Self::Subspace(s) => s.project(x),
            Self::Affine(s) => s.project(x),
            Self::Ball(s) => s.project(x),
            Self::Halfspace(s) => s.project(x),
            Self::Hyperplane(s) => s.project(x),
            Self::Box(s) => s.project(x),
            Self::Translate(s) => s.project(x),
            Self::Scaled(s) => s.project(x),
            Self::Product(s) => s.project(x),
            Self::Diagonal(s) => s.project(x),
        }
    }

    pub fn try_project(&self, x: &Vector) -> Result<Vector> {
        Error::check_dim(self.dim(), x.len())?;
        Ok(self.project(x))
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        (x - self.project(x)).norm()
    }

    /// Membership up to `MEMBERSHIP_TOL · (1 + ‖x‖)`.
    pub fn contains(&self, x: &Vector) -> bool {
        self.distance(x) <= MEMBERSHIP_TOL * (1.0 + x.norm())
    }

    /// The set `y + C`, rebuilt natively when the family is closed under translation.
    pub fn translated(&self, y: &Vector) -> Result<Self> {
        Error::check_dim(self.dim(), y.len())?;
        check_finite(y, "translation")?;
        Ok(match self {
            Self::Subspace(s) => Self::Affine(AffineSubspace::new(y.clone(), s.clone())?),
            Self::Affine(s) => {
                Self::Affine(AffineSubspace::new(&s.offset + y, s.direction.clone())?)
            }
            Self::Ball(s) => Self::Ball(Ball::new(&s.center + y, s.radius)?),
            Self::Halfspace(s) => Self::Halfspace(Halfspace::new(
                s.normal.clone(),
                s.offset + s.normal.dot(y),
            )?),
            Self::Hyperplane(s) => Self::Hyperplane(Hyperplane::new(
                s.normal.clone(),
                s.offset + s.normal.dot(y),
            )?),
            Self::Box(s) => Self::Box(BoxSet::new(&s.lower + y, &s.upper + y)?),
            Self::Translate(s) => {
                Self::Translate(Translate::new((*s.inner).clone(), &s.shift - y)?)
            }
            Self::Product(p) => {
                let mut start = 0;
                let mut factors = Vec::with_capacity(p.factors.len());
                for f in &p.factors {
                    let len = f.dim();
                    factors.push(f.translated(&y.rows(start, len).into_owned())?);
                    start += len;
                }
                Self::Product(ProductSet::new(factors)?)
            }
            Self::Diagonal(d) if self.contains(y) => Self::Diagonal(*d),
            Self::Scaled(_) | Self::Diagonal(_) => {
                Self::Translate(Translate::new(self.clone(), -y)?)
            }
        })
    }

    /// The dilation `λC`, rebuilt natively when possible. `λ = 0` gives `{0}`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() {
            return Err(Error::InvalidSet(format!(
                "scale factor must be finite, got {factor}"
            )));
        }
        if factor == 0.0 {
            return Ok(Self::Subspace(LinearSubspace::trivial(self.dim())));
        }
        Ok(match self {
            Self::Subspace(s) => Self::Subspace(s.clone()),
            Self::Affine(s) => Self::Affine(AffineSubspace::new(
                &s.offset * factor,
                s.direction.clone(),
            )?),
            Self::Ball(s) => Self::Ball(Ball::new(&s.center * factor, s.radius * factor.abs())?),
            Self::Halfspace(s) => {
                // λ < 0 flips the inequality
                let sign = factor.signum();
                Self::Halfspace(Halfspace::new(&s.normal * sign, s.offset * factor * sign)?)
            }
            Self::Hyperplane(s) => {
                Self::Hyperplane(Hyperplane::new(s.normal.clone(), s.offset * factor)?)
            }
            Self::Box(s) => {
                let (a, b) = (&s.lower * factor, &s.upper * factor);
                if factor > 0.0 {
                    Self::Box(BoxSet::new(a, b)?)
                } else {
                    Self::Box(BoxSet::new(b, a)?)
                }
            }
            Self::Translate(s) => {
                Self::Translate(Translate::new(s.inner.scaled(factor)?, &s.shift * factor)?)
            }
            Self::Scaled(s) => Self::Scaled(Scaled::new((*s.inner).clone(), s.factor * factor)?),
            Self::Product(p) => Self::Product(ProductSet::new(
                p.factors
                    .iter()
                    .map(|f| f.scaled(factor))
                    .collect::<Result<_>>()?,
            )?),
            Self::Diagonal(d) => Self::Diagonal(*d),
        })
    }

    /// Canonical affine form for subspace-like sets, if the set is one.
    pub fn as_affine(&self) -> Option<AffineSubspace> {
        match self {
            Self::Subspace(s) => AffineSubspace::new(Vector::zeros(s.dim()), s.clone()).ok(),
            Self::Affine(s) => Some(s.clone()),
            Self::Hyperplane(h) => {
                let normal_dir =
                    LinearSubspace::span(h.normal.len(), std::slice::from_ref(&h.normal)).ok()?;
                let point = &h.normal * (h.offset / h.normal_sq);
                AffineSubspace::new(point, normal_dir.orthogonal_complement()).ok()
            }
            Self::Diagonal(d) => {
                let ones: Vec<Vector> = (0..d.base_dim)
                    .map(|i| {
                        d.embed(&Vector::from_fn(
                            d.base_dim,
                            |j, _| if i == j { 1.0 } else { 0.0 },
                        ))
                    })
                    .collect();
                let dir = LinearSubspace::span(self.dim(), &ones).ok()?;
                AffineSubspace::new(Vector::zeros(self.dim()), dir).ok()
            }
            Self::Translate(t) => {
                let a = t.inner.as_affine()?;
                AffineSubspace::new(&a.offset - &t.shift, a.direction).ok()
            }
            Self::Scaled(s) => {
                let a = s.inner.as_affine()?;
                AffineSubspace::new(&a.offset * s.factor, a.direction).ok()
            }
            _ => None,
        }
    }

    /// Canonical box form for box-like sets, if the set is one.
    pub fn as_box(&self) -> Option<BoxSet> {
        match self {
            Self::Box(b) => Some(b.clone()),
            Self::Translate(t) => {
                let b = t.inner.as_box()?;
                BoxSet::new(&b.lower - &t.shift, &b.upper - &t.shift).ok()
            }
            Self::Scaled(s) => match s.inner.scaled(s.factor).ok()? {
                Self::Box(b) => Some(b),
                _ => None,
            },
            _ => None,
        }
    }
}

fn check_finite(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidSet(format!(
            "{what} has non-finite coordinates"
        )))
    }
}

fn check_normal(normal: &Vector, offset: f64) -> Result<f64> {
    check_finite(normal, "normal vector")?;
    if !offset.is_finite() {
        return Err(Error::InvalidSet(format!(
            "offset must be finite, got {offset}"
        )));
    }
    let sq = normal.norm_squared();
    if sq == 0.0 {
        return Err(Error::InvalidSet("normal vector must be nonzero".into()));
    }
    Ok(sq)
}
