use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Operator;
use crate::error::{Error, Result};
use crate::sets::{ConvexSet, Vector};

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    /// Heuristic: `‖x_k‖` passed the divergence threshold after growing monotonically over
    /// the divergence window. Not a proof that the sequence is unbounded.
    Diverged,
    BudgetExhausted,
    /// A step could not be evaluated (non-finite iterate, or a method-specific failure).
    NumericalFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Diverged => "diverged",
            Status::BudgetExhausted => "budget_exhausted",
            Status::NumericalFailure => "numerical_failure",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What the monitored point is compared against in true-error mode.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetError {
    /// Distance to a known solution point.
    Point(Vector),
    /// Distance to a set, e.g. `d_{U∩V}(z)`.
    Set(ConvexSet),
}

impl TargetError {
    pub fn dim(&self) -> usize {
        match self {
            TargetError::Point(p) => p.len(),
            TargetError::Set(s) => s.dim(),
        }
    }

    pub fn error(&self, z: &Vector) -> f64 {
        match self {
            TargetError::Point(p) => (z - p).norm(),
            TargetError::Set(s) => s.distance(z),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StoppingMode {
    /// Stop at the first `k` with `error(monitor(x_k)) < eps`.
    TrueError(TargetError),
    /// Stop at the first `k` with `‖x_{k+1} − x_k‖ < eps`.
    Residual,
    /// Run to `max_iter`; a target, when given, is only used to record errors.
    BudgetOnly(Option<TargetError>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingPolicy {
    pub mode: StoppingMode,
    pub eps: f64,
    pub max_iter: usize,
    pub divergence_threshold: f64,
    /// Number of trailing steps over which `‖x_k‖` must be strictly increasing before a
    /// threshold crossing counts as divergence (fewer when fewer steps exist).
    pub divergence_window: usize,
    pub record_trace: bool,
}

impl StoppingPolicy {
    pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e6;
    pub const DEFAULT_DIVERGENCE_WINDOW: usize = 100;

    fn with_mode(mode: StoppingMode, eps: f64, max_iter: usize) -> Self {
        Self {
            mode,
            eps,
            max_iter,
            divergence_threshold: Self::DEFAULT_DIVERGENCE_THRESHOLD,
            divergence_window: Self::DEFAULT_DIVERGENCE_WINDOW,
            record_trace: false,
        }
    }

    pub fn true_error(target: TargetError, eps: f64, max_iter: usize) -> Self {
        Self::with_mode(StoppingMode::TrueError(target), eps, max_iter)
    }

    pub fn residual(eps: f64, max_iter: usize) -> Self {
        Self::with_mode(StoppingMode::Residual, eps, max_iter)
    }

    pub fn budget(max_iter: usize) -> Self {
        Self::with_mode(StoppingMode::BudgetOnly(None), f64::MIN_POSITIVE, max_iter)
    }

    pub fn budget_tracking(target: TargetError, max_iter: usize) -> Self {
        Self::with_mode(
            StoppingMode::BudgetOnly(Some(target)),
            f64::MIN_POSITIVE,
            max_iter,
        )
    }

    pub fn with_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn with_divergence_threshold(mut self, threshold: f64) -> Self {
        self.divergence_threshold = threshold;
        self
    }

    pub fn with_divergence_window(mut self, window: usize) -> Self {
        self.divergence_window = window;
        self
    }

    pub fn target(&self) -> Option<&TargetError> {
        match &self.mode {
            StoppingMode::TrueError(t) => Some(t),
            StoppingMode::BudgetOnly(t) => t.as_ref(),
            StoppingMode::Residual => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        if !(self.divergence_threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "divergence threshold must be positive, got {}",
                self.divergence_threshold
            )));
        }
        Ok(())
    }
}

/// One row of the per-iteration trace: error of the monitored point at `x_k` (NaN when
/// no target is tracked) and `‖x_{k+1} − x_k‖` (NaN for the final, unstepped iterate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub error: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub iterations: usize,
    /// Monitored point at the final iterate.
    pub shadow: Vector,
    /// Last `x_k − x_{k+1}`.
    pub drift: Vector,
    /// Final iterate `x_k`.
    pub iterate: Vector,
    /// Error of the final monitored point; the last step norm in residual mode, NaN in
    /// budget-only mode without a target.
    pub final_error: f64,
    pub trace: Option<Vec<TraceEntry>>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Returned by a step closure that cannot produce the next iterate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFailure(pub String);

fn is_finite(v: &Vector) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Generic fixed-point loop.
///
/// `step(k, x_k)` produces `x_{k+1}`; `monitor(x_k)` produces the point whose error is
/// tested. The returned `iterations` is the index `k` of the iterate at which the run
/// stopped: the first `k` whose monitored error is below `eps` (true-error mode), the
/// first `k` whose step is shorter than `eps` (residual mode), the crossing index for
/// divergence, or `max_iter`.
pub fn run_iteration<S, M>(
    mut step: S,
    x0: Vector,
    policy: &StoppingPolicy,
    mut monitor: M,
) -> Result<SolveResult>
where
    S: FnMut(usize, &Vector) -> std::result::Result<Vector, StepFailure>,
    M: FnMut(&Vector) -> Vector,
{
    policy.validate()?;
    let target = policy.target();
    let stop_on_error = matches!(policy.mode, StoppingMode::TrueError(_));
    let stop_on_step = matches!(policy.mode, StoppingMode::Residual);

    let mut x = x0;
    let mut trace = policy.record_trace.then(Vec::new);
    let mut norms: VecDeque<f64> = VecDeque::with_capacity(policy.divergence_window + 2);
    norms.push_back(x.norm());
    let mut drift = Vector::zeros(x.len());
    let mut checked_dim = false;

    let mut evaluate = |z: &Vector| -> Result<f64> {
        match target {
            Some(t) => {
                if !checked_dim {
                    Error::check_dim(t.dim(), z.len())?;
                    checked_dim = true;
                }
                Ok(t.error(z))
            }
            None => Ok(f64::NAN),
        }
    };

    let mut k = 0usize;
    loop {
        let shadow = monitor(&x);
        let error = evaluate(&shadow)?;

        let finish =
            |status, trace: Option<Vec<TraceEntry>>, shadow, error, drift, x| SolveResult {
                status,
                iterations: k,
                shadow,
                drift,
                iterate: x,
                final_error: error,
                trace,
            };

        if stop_on_error && error < policy.eps {
            if let Some(t) = trace.as_mut() {
                t.push(TraceEntry {
                    iteration: k,
                    error,
                    step_norm: f64::NAN,
                });
            }
            return Ok(finish(Status::Converged, trace, shadow, error, drift, x));
        }
        if k >= policy.max_iter {
            if let Some(t) = trace.as_mut() {
                t.push(TraceEntry {
                    iteration: k,
                    error,
                    step_norm: f64::NAN,
                });
            }
            let reported = if stop_on_step { drift.norm() } else { error };
            return Ok(finish(
                Status::BudgetExhausted,
                trace,
                shadow,
                reported,
                drift,
                x,
            ));
        }

        let next = match step(k, &x) {
            Ok(v) if is_finite(&v) => v,
            _ => {
                return Ok(finish(
                    Status::NumericalFailure,
                    trace,
                    shadow,
                    error,
                    drift,
                    x,
                ))
            }
        };
        let delta = &x - &next;
        let step_norm = delta.norm();
        if let Some(t) = trace.as_mut() {
            t.push(TraceEntry {
                iteration: k,
                error,
                step_norm,
            });
        }
        drift = delta;

        if stop_on_step && step_norm < policy.eps {
            return Ok(finish(
                Status::Converged,
                trace,
                shadow,
                step_norm,
                drift,
                x,
            ));
        }

        x = next;
        k += 1;
        let norm = x.norm();
        norms.push_back(norm);
        if norms.len() > policy.divergence_window + 1 {
            norms.pop_front();
        }
        if norm > policy.divergence_threshold
            && norms.iter().zip(norms.iter().skip(1)).all(|(a, b)| b > a)
        {
            let shadow = monitor(&x);
            let error = evaluate(&shadow)?;
            if let Some(t) = trace.as_mut() {
                t.push(TraceEntry {
                    iteration: k,
                    error,
                    step_norm: f64::NAN,
                });
            }
            let reported = if stop_on_step { drift.norm() } else { error };
            return Ok(SolveResult {
                status: Status::Diverged,
                iterations: k,
                shadow,
                drift,
                iterate: x,
                final_error: reported,
                trace,
            });
        }
    }
}

/// Iterates a fixed operator from `x0`.
pub fn iterate<O, M>(op: &O, x0: Vector, policy: &StoppingPolicy, monitor: M) -> Result<SolveResult>
where
    O: Operator + ?Sized,
    M: FnMut(&Vector) -> Vector,
{
    Error::check_dim(op.dim(), x0.len())?;
    run_iteration(|_, x| Ok(op.apply(x)), x0, policy, monitor)
}
