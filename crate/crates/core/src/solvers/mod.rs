//! Best-approximation drivers.
//!
//! Every solver returns a [`SolveResult`] whose `shadow` is the monitored point that
//! converges to `P_{∩C_i}(q)`:
//!
//! | method    | iterate                                  | monitored point            |
//! |-----------|------------------------------------------|----------------------------|
//! | AAMR      | `x ← T_{A−q,B−q,α,β}(x)`                 | `P_A(x + q)`               |
//! | AAMR (r)  | `x ← T_{D,∏(C_i−q),α,β}(x)` in `(Rⁿ)^r`  | `q + mean of the r blocks` |
//! | MAP / RAP | `x ← (1−μ)x + μ P_V P_U x`, `x_0 = q`    | `x`                        |
//! | DRM       | `x ← DR_{A,B,α}(x)`, `x_0 = q`           | `P_A(x)`                   |
//! | Haugazeau | `x ← Q(q, x, P_{C(k)} x)`, `x_0 = q`     | `x`                        |
//! | HLWB      | `x ← λ_k q + (1−λ_k) P_{C(k mod r)} x`   | `x`                        |
//! | CM        | product-space recurrence on `z`          | see [`Combettes`]          |

mod combettes;
mod haugazeau;

pub use combettes::{cm_solve, CmForm, CmParams, Combettes};
pub use haugazeau::{haugazeau_solve, haugazeau_step};

pub use crate::operators::{SolveResult, Status, StoppingPolicy, TargetError, TraceEntry};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operators::{run_iteration, AamrOperator, DrOperator, Operator, StepFailure};
use crate::sets::{ConvexSet, Diagonal, Vector};

/// A per-iteration parameter sequence.
#[derive(Clone)]
pub enum Schedule {
    Constant(f64),
    /// `1 / (k + 1)`.
    Harmonic,
    /// Arbitrary sequence; its infimum must be positive where the method requires it.
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl Schedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::Harmonic => 1.0 / (k as f64 + 1.0),
            Schedule::Custom(f) => f(k),
        }
    }

    fn constant(&self) -> Option<f64> {
        match self {
            Schedule::Constant(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Constant(v) => write!(f, "Constant({v})"),
            Schedule::Harmonic => f.write_str("Harmonic"),
            Schedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

fn check_same_dim(sets: &[ConvexSet], q: &Vector) -> Result<usize> {
    let n = q.len();
    for s in sets {
        Error::check_dim(n, s.dim())?;
    }
    Ok(n)
}

/// AAMR for `P_{A∩B}(q)`: iterates `T_{A−q,B−q,α,β}` from an arbitrary `x0` and monitors
/// `P_A(x_k + q)`.
pub fn aamr_solve(
    a: &ConvexSet,
    b: &ConvexSet,
    q: &Vector,
    x0: &Vector,
    alpha: f64,
    beta: f64,
    policy: &StoppingPolicy,
) -> Result<SolveResult> {
    aamr_solve_scheduled(a, b, q, x0, &Schedule::Constant(alpha), beta, policy)
}

/// AAMR with a varying averaging weight `α_k ∈ (0,1]`, `inf α_k > 0`.
pub fn aamr_solve_scheduled(
    a: &ConvexSet,
    b: &ConvexSet,
    q: &Vector,
    x0: &Vector,
    alpha: &Schedule,
    beta: f64,
    policy: &StoppingPolicy,
) -> Result<SolveResult> {
    check_same_dim(&[a.clone(), b.clone()], q)?;
    Error::check_dim(q.len(), x0.len())?;
    let op = AamrOperator::new(
        a.clone().minus(q)?,
        b.clone().minus(q)?,
        alpha.constant().unwrap_or(1.0),
        beta,
    )?;
    run_iteration(
        |k, x| {
            let a_k = alpha.at(k);
            if !(a_k > 0.0 && a_k <= 1.0) {
                return Err(StepFailure(format!(
                    "alpha schedule left (0,1] at k={k}: {a_k}"
                )));
            }
            Ok(op.apply_with_alpha(x, a_k))
        },
        x0.clone(),
        policy,
        |x| a.project(&(x + q)),
    )
}

/// AAMR lifted to `(Rⁿ)^r` with `A = D` (the diagonal) and `B = ∏(C_i − q)`.
#[derive(Debug, Clone)]
pub struct ProductAamr {
    operator: AamrOperator,
    diagonal: Diagonal,
    q: Vector,
}

impl ProductAamr {
    pub fn new(sets: &[ConvexSet], q: &Vector, alpha: f64, beta: f64) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidParameter(
                "product-space AAMR needs at least one set".into(),
            ));
        }
        let n = check_same_dim(sets, q)?;
        let diagonal = Diagonal::new(sets.len(), n)?;
        let shifted = sets
            .iter()
            .map(|c| c.clone().minus(q))
            .collect::<Result<Vec<_>>>()?;
        let operator = AamrOperator::new(
            ConvexSet::Diagonal(diagonal),
            ConvexSet::product(shifted)?,
            alpha,
            beta,
        )?;
        Ok(Self {
            operator,
            diagonal,
            q: q.clone(),
        })
    }

    pub fn operator(&self) -> &AamrOperator {
        &self.operator
    }

    pub fn diagonal(&self) -> &Diagonal {
        &self.diagonal
    }

    /// `q + (1/r) Σ_j x_j`, the base-space identification of `P_D(x + q)`.
    pub fn shadow(&self, x: &Vector) -> Vector {
        self.diagonal.block_mean(x) + &self.q
    }

    /// Stacks `r` base-space vectors into one product-space vector.
    pub fn stack(&self, blocks: &[Vector]) -> Result<Vector> {
        let n = self.diagonal.base_dim();
        if blocks.len() != self.diagonal.copies() {
            return Err(Error::DimensionMismatch {
                expected: self.diagonal.copies(),
                found: blocks.len(),
            });
        }
        let mut out = Vector::zeros(n * blocks.len());
        for (j, b) in blocks.iter().enumerate() {
            Error::check_dim(n, b.len())?;
            out.rows_mut(j * n, n).copy_from(b);
        }
        Ok(out)
    }

    pub fn solve(&self, x0: &Vector, policy: &StoppingPolicy) -> Result<SolveResult> {
        Error::check_dim(self.operator.dim(), x0.len())?;
        run_iteration(
            |_, x| Ok(self.operator.apply(x)),
            x0.clone(),
            policy,
            |x| self.shadow(x),
        )
    }
}

/// AAMR for `P_{∩C_i}(q)` over `r` sets via the product-space formulation.
pub fn aamr_product_solve(
    sets: &[ConvexSet],
    q: &Vector,
    x0: &[Vector],
    alpha: f64,
    beta: f64,
    policy: &StoppingPolicy,
) -> Result<SolveResult> {
    let lifted = ProductAamr::new(sets, q, alpha, beta)?;
    let start = lifted.stack(x0)?;
    lifted.solve(&start, policy)
}

/// Relaxed alternating projections `x ← (1−μ)x + μ P_V P_U x` from `x_0 = q`, `μ ∈ (0,2)`.
pub fn rap_solve(
    u: &ConvexSet,
    v: &ConvexSet,
    q: &Vector,
    mu: f64,
    policy: &StoppingPolicy,
) -> Result<SolveResult> {
    check_same_dim(&[u.clone(), v.clone()], q)?;
    if !(mu > 0.0 && mu < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "mu must lie in (0,2), got {mu}"
        )));
    }
    run_iteration(
        |_, x| Ok(x * (1.0 - mu) + v.project(&u.project(x)) * mu),
        q.clone(),
        policy,
        |x| x.clone(),
    )
}

/// Method of alternating projections: [`rap_solve`] with `μ = 1`.
pub fn map_solve(
    u: &ConvexSet,
    v: &ConvexSet,
    q: &Vector,
    policy: &StoppingPolicy,
) -> Result<SolveResult> {
    rap_solve(u, v, q, 1.0, policy)
}

/// Relaxation minimizing the RAP rate for subspaces at Friedrichs angle `theta`.
pub fn optimal_rap_mu(theta: f64) -> f64 {
    2.0 / (1.0 + theta.sin().powi(2))
}

/// Douglas–Rachford on the unshifted sets from `x_0 = q`, monitoring `P_A(x_k)`.
pub fn dr_solve(
    a: &ConvexSet,
    b: &ConvexSet,
    q: &Vector,
    alpha: f64,
    policy: &StoppingPolicy,
) -> Result<SolveResult> {
    check_same_dim(&[a.clone(), b.clone()], q)?;
    let op = DrOperator::new(a.clone(), b.clone(), alpha)?;
    run_iteration(|_, x| Ok(op.apply(x)), q.clone(), policy, |x| a.project(x))
}

/// Halpern–Lions–Wittmann–Bauschke: `x_{k+1} = λ_k q + (1−λ_k) P_{C(k mod r)}(x_k)`, `x_0 = q`.
pub fn hlwb_solve(
    sets: &[ConvexSet],
    q: &Vector,
    lambda: &Schedule,
    policy: &StoppingPolicy,
) -> Result<SolveResult> {
    if sets.is_empty() {
        return Err(Error::InvalidParameter(
            "HLWB needs at least one set".into(),
        ));
    }
    check_same_dim(sets, q)?;
    let r = sets.len();
    run_iteration(
        |k, x| {
            let l = lambda.at(k);
            if !(0.0..=1.0).contains(&l) {
                return Err(StepFailure(format!("HLWB weight left [0,1] at k={k}: {l}")));
            }
            Ok(q * l + sets[k % r].project(x) * (1.0 - l))
        },
        q.clone(),
        policy,
        |x| x.clone(),
    )
}

/// The comparison roster with parameters.
#[derive(Debug, Clone)]
pub enum MethodSpec {
    Aamr { alpha: f64, beta: f64 },
    Drm { alpha: f64 },
    Map,
    Rap { mu: f64 },
    Haugazeau,
    Hlwb { lambda: Schedule },
    Cm { gamma: f64, lambda: Schedule },
}

impl MethodSpec {
    pub fn aamr(alpha: f64, beta: f64) -> Self {
        MethodSpec::Aamr { alpha, beta }
    }

    pub fn hlwb() -> Self {
        MethodSpec::Hlwb {
            lambda: Schedule::Harmonic,
        }
    }

    /// CM with `λ_n ≡ 1.8` (`α_n = 0.9`).
    pub fn cm(gamma: f64) -> Self {
        MethodSpec::Cm {
            gamma,
            lambda: Schedule::Constant(1.8),
        }
    }

    /// CM parametrized by the AAMR-equivalent `β = 1/(1+γ)`.
    pub fn cm_with_beta(beta: f64) -> Self {
        Self::cm(1.0 / beta - 1.0)
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Aamr { .. } => "aamr",
            MethodSpec::Drm { .. } => "drm",
            MethodSpec::Map => "map",
            MethodSpec::Rap { .. } => "rap",
            MethodSpec::Haugazeau => "haugazeau",
            MethodSpec::Hlwb { .. } => "hlwb",
            MethodSpec::Cm { .. } => "cm",
        }
    }

    /// Short label including parameters, e.g. `aamr(a=0.9,b=0.7)`.
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Aamr { alpha, beta } => format!("aamr(a={alpha},b={beta})"),
            MethodSpec::Drm { alpha } => format!("drm(a={alpha})"),
            MethodSpec::Rap { mu } => format!("rap(mu={mu})"),
            MethodSpec::Cm { gamma, .. } => format!("cm(g={gamma})"),
            other => other.name().to_string(),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            MethodSpec::Aamr { alpha, .. } | MethodSpec::Drm { alpha } => Some(*alpha),
            MethodSpec::Cm { lambda, .. } => lambda.constant().map(|l| l / 2.0),
            _ => None,
        }
    }

    /// `β` for AAMR, and the equivalent `1/(1+γ)` for CM.
    pub fn beta(&self) -> Option<f64> {
        match self {
            MethodSpec::Aamr { beta, .. } => Some(*beta),
            MethodSpec::Cm { gamma, .. } => Some(1.0 / (1.0 + gamma)),
            _ => None,
        }
    }

    pub fn mu(&self) -> Option<f64> {
        match self {
            MethodSpec::Rap { mu } => Some(*mu),
            MethodSpec::Map => Some(1.0),
            _ => None,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            MethodSpec::Cm { gamma, .. } => Some(*gamma),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            MethodSpec::Aamr { alpha, beta } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return bad(format!("alpha must lie in (0,1], got {alpha}"));
                }
                if !(*beta > 0.0 && *beta < 1.0) {
                    return bad(format!(
                        "beta must lie in (0,1); use --method drm for beta=1 (got {beta})"
                    ));
                }
            }
            MethodSpec::Drm { alpha } if !(*alpha > 0.0 && *alpha < 1.0) => {
                return bad(format!("alpha must lie in (0,1), got {alpha}"));
            }
            MethodSpec::Rap { mu } if !(*mu > 0.0 && *mu < 2.0) => {
                return bad(format!("mu must lie in (0,2), got {mu}"));
            }
            MethodSpec::Cm { gamma, lambda } => {
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return bad(format!("gamma must be positive, got {gamma}"));
                }
                match lambda {
                    Schedule::Harmonic => {
                        return bad(
                            "CM needs inf lambda_n > 0; the harmonic schedule is not allowed"
                                .into(),
                        )
                    }
                    Schedule::Constant(l) if !(*l > 0.0 && *l <= 2.0) => {
                        return bad(format!("lambda must lie in (0,2], got {l}"));
                    }
                    _ => {}
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Solves from the default start `x_0 = q`.
    pub fn solve(
        &self,
        sets: &[ConvexSet],
        q: &Vector,
        policy: &StoppingPolicy,
    ) -> Result<SolveResult> {
        self.solve_from(sets, q, None, policy)
    }

    /// Solves from `x0` where the method allows a free start (AAMR, CM); the other methods
    /// reject a start different from `q`.
    pub fn solve_from(
        &self,
        sets: &[ConvexSet],
        q: &Vector,
        x0: Option<&Vector>,
        policy: &StoppingPolicy,
    ) -> Result<SolveResult> {
        self.validate()?;
        if sets.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one set is required".into(),
            ));
        }
        let free_start = matches!(self, MethodSpec::Aamr { .. } | MethodSpec::Cm { .. });
        if let Some(x) = x0 {
            if !free_start && x != q {
                return Err(Error::InvalidParameter(format!(
                    "{} always starts at q",
                    self.name()
                )));
            }
        }
        let pair = || -> Result<(&ConvexSet, &ConvexSet)> {
            match sets {
                [a, b] => Ok((a, b)),
                [a] => Ok((a, a)),
                _ => Err(Error::InvalidParameter(format!(
                    "{} is implemented for two sets",
                    self.name()
                ))),
            }
        };
        match self {
            MethodSpec::Aamr { alpha, beta } => {
                let start = x0.unwrap_or(q);
                if let [a, b] = sets {
                    aamr_solve(a, b, q, start, *alpha, *beta, policy)
                } else {
                    let lifted = ProductAamr::new(sets, q, *alpha, *beta)?;
                    let stacked = lifted.stack(&vec![start.clone(); sets.len()])?;
                    lifted.solve(&stacked, policy)
                }
            }
            MethodSpec::Drm { alpha } => {
                let (a, b) = pair()?;
                dr_solve(a, b, q, *alpha, policy)
            }
            MethodSpec::Map => {
                let (a, b) = pair()?;
                map_solve(a, b, q, policy)
            }
            MethodSpec::Rap { mu } => {
                let (a, b) = pair()?;
                rap_solve(a, b, q, *mu, policy)
            }
            MethodSpec::Haugazeau => {
                let (a, b) = pair()?;
                haugazeau_solve(a, b, q, policy)
            }
            MethodSpec::Hlwb { lambda } => hlwb_solve(sets, q, lambda, policy),
            MethodSpec::Cm { gamma, lambda } => {
                let params = CmParams {
                    gamma: *gamma,
                    lambda: lambda.clone(),
                    form: CmForm::Direct,
                };
                cm_solve(sets, q, x0, &params, policy)
            }
        }
    }
}
