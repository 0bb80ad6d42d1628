//! Modified reflectors, the AAMR and Douglas–Rachford operators, and the fixed-point
//! iteration engine that drives every solver.

mod engine;

pub use engine::{
    iterate, run_iteration, SolveResult, Status, StepFailure, StoppingMode, StoppingPolicy,
    TargetError, TraceEntry,
};

use crate::error::{Error, Result};
use crate::sets::{ConvexSet, Vector};

/// A single-valued map on Rⁿ that the engine can iterate.
pub trait Operator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &Vector) -> Vector;
}

/// Wraps a closure as an [`Operator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&Vector) -> Vector> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&Vector) -> Vector> Operator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &Vector) -> Vector {
        (self.f)(x)
    }
}

fn check_beta(beta: f64, allow_one: bool) -> Result<()> {
    let ok = if allow_one {
        beta > 0.0 && beta <= 1.0
    } else {
        beta > 0.0 && beta < 1.0
    };
    if ok {
        Ok(())
    } else if allow_one {
        Err(Error::InvalidParameter(format!(
            "beta must lie in (0,1], got {beta}"
        )))
    } else {
        Err(Error::InvalidParameter(format!(
            "beta must lie in (0,1), got {beta}"
        )))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0,1], got {alpha}"
        )))
    }
}

/// `2β P_C(x) − x`. With `β = 1` this is the classical reflector.
pub fn modified_reflect(set: &ConvexSet, beta: f64, x: &Vector) -> Result<Vector> {
    check_beta(beta, true)?;
    let p = set.try_project(x)?;
    Ok(p * (2.0 * beta) - x)
}

fn reflect_unchecked(set: &ConvexSet, beta: f64, x: &Vector) -> Vector {
    set.project(x) * (2.0 * beta) - x
}

/// `T = (1−α) I + α (2β P_B − I)(2β P_A − I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AamrOperator {
    a: ConvexSet,
    b: ConvexSet,
    alpha: f64,
    beta: f64,
}

impl AamrOperator {
    /// `α ∈ (0,1]`, `β ∈ (0,1)`; `β = 1` is the Douglas–Rachford operator, see [`DrOperator`].
    pub fn new(a: ConvexSet, b: ConvexSet, alpha: f64, beta: f64) -> Result<Self> {
        Error::check_dim(a.dim(), b.dim())?;
        check_alpha(alpha)?;
        check_beta(beta, false)?;
        Ok(Self { a, b, alpha, beta })
    }

    pub fn a(&self) -> &ConvexSet {
        &self.a
    }

    pub fn b(&self) -> &ConvexSet {
        &self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Same sets and β with a different averaging weight.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            ..self.clone()
        })
    }

    /// Direct evaluation of the defining composition.
    pub fn apply_with_alpha(&self, x: &Vector, alpha: f64) -> Vector {
        let inner = reflect_unchecked(&self.a, self.beta, x);
        let outer = reflect_unchecked(&self.b, self.beta, &inner);
        x * (1.0 - alpha) + outer * alpha
    }

    /// `x − T(x) = 2αβ (P_A(x) − P_B(2β P_A(x) − x))`.
    pub fn drift(&self, x: &Vector) -> Vector {
        let pa = self.a.project(x);
        let pb = self.b.project(&(&pa * (2.0 * self.beta) - x));
        (pa - pb) * (2.0 * self.alpha * self.beta)
    }

    /// `T(x)` evaluated through the drift identity rather than the composition.
    pub fn apply_via_drift(&self, x: &Vector) -> Vector {
        x - self.drift(x)
    }

    /// `‖P_B(2β P_A(x) − x) − P_A(x)‖`, zero exactly on `Fix T`.
    pub fn fixed_point_residual(&self, x: &Vector) -> f64 {
        let pa = self.a.project(x);
        let pb = self.b.project(&(&pa * (2.0 * self.beta) - x));
        (pb - pa).norm()
    }
}

impl Operator for AamrOperator {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &Vector) -> Vector {
        self.apply_with_alpha(x, self.alpha)
    }
}

/// `DR = (1−α) I + α (2P_B − I)(2P_A − I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrOperator {
    a: ConvexSet,
    b: ConvexSet,
    alpha: f64,
}

impl DrOperator {
    pub fn new(a: ConvexSet, b: ConvexSet, alpha: f64) -> Result<Self> {
        Error::check_dim(a.dim(), b.dim())?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0,1), got {alpha}"
            )));
        }
        Ok(Self { a, b, alpha })
    }

    pub fn a(&self) -> &ConvexSet {
        &self.a
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Operator for DrOperator {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &Vector) -> Vector {
        let inner = reflect_unchecked(&self.a, 1.0, x);
        let outer = reflect_unchecked(&self.b, 1.0, &inner);
        x * (1.0 - self.alpha) + outer * self.alpha
    }
}
