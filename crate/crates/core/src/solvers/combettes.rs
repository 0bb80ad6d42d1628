//! Combettes' product-space method for the resolvent of a sum of normal cones, which for
//! closed convex sets with the strong CHIP computes `P_{∩C_i}(q)`.
//!
//! Direct recurrence, with `C = ∏ C_i`, `D` the diagonal and bold `q = (q, …, q)`:
//!
//! ```text
//! z+ = (1 − λ/2) z + (λ/2) R_D(2 P_C((z + γq)/(γ + 1)) − z)
//! ```
//!
//! With `β = 1/(1+γ)`, `α = λ/2` and `C' = (1/β) C − ((1−β)/β) q` the same step reads
//!
//! ```text
//! z+ = T_{C',D,α,β}(z) + 2(1−β) α P_D(2β P_{C'}(z) − z + q)
//! ```
//!
//! which is the recast form. Both are implemented and must produce identical trajectories.

use super::{check_same_dim, Schedule, SolveResult, StoppingPolicy};
use crate::error::{Error, Result};
use crate::operators::{run_iteration, AamrOperator, StepFailure};
use crate::sets::{ConvexSet, Diagonal, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CmForm {
    #[default]
    Direct,
    Recast,
}

#[derive(Debug, Clone)]
pub struct CmParams {
    pub gamma: f64,
    /// `λ_n ∈ (0,2]` with `inf λ_n > 0`.
    pub lambda: Schedule,
    pub form: CmForm,
}

impl CmParams {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            lambda: Schedule::Constant(1.8),
            form: CmForm::Direct,
        }
    }

    pub fn beta(&self) -> f64 {
        1.0 / (1.0 + self.gamma)
    }
}

#[derive(Debug, Clone)]
pub struct Combettes {
    product: ConvexSet,
    diagonal: Diagonal,
    q_stacked: Vector,
    gamma: f64,
    lambda: Schedule,
    recast: AamrOperator,
}

impl Combettes {
    pub fn new(sets: &[ConvexSet], q: &Vector, gamma: f64, lambda: Schedule) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidParameter("CM needs at least one set".into()));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if matches!(lambda, Schedule::Harmonic) {
            return Err(Error::InvalidParameter("CM needs inf lambda_n > 0".into()));
        }
        let n = check_same_dim(sets, q)?;
        let diagonal = Diagonal::new(sets.len(), n)?;
        let product = ConvexSet::product(sets.to_vec())?;
        let q_stacked = diagonal.embed(q);
        let beta = 1.0 / (1.0 + gamma);
        let recast_set = product
            .clone()
            .scaled_wrapper(1.0 / beta)?
            .minus(&(&q_stacked * ((1.0 - beta) / beta)))?;
        let recast = AamrOperator::new(recast_set, ConvexSet::Diagonal(diagonal), 1.0, beta)?;
        Ok(Self {
            product,
            diagonal,
            q_stacked,
            gamma,
            lambda,
            recast,
        })
    }

    pub fn beta(&self) -> f64 {
        1.0 / (1.0 + self.gamma)
    }

    pub fn diagonal(&self) -> &Diagonal {
        &self.diagonal
    }

    fn lambda_at(&self, k: usize) -> std::result::Result<f64, StepFailure> {
        let l = self.lambda.at(k);
        if l > 0.0 && l <= 2.0 {
            Ok(l)
        } else {
            Err(StepFailure(format!(
                "CM relaxation left (0,2] at k={k}: {l}"
            )))
        }
    }

    /// `P_C((z + γq)/(γ + 1))`, the resolvent point of the current iterate.
    pub fn resolvent_point(&self, z: &Vector) -> Vector {
        self.product
            .project(&((z + &self.q_stacked * self.gamma) / (self.gamma + 1.0)))
    }

    pub fn step_direct(&self, k: usize, z: &Vector) -> std::result::Result<Vector, StepFailure> {
        let lambda = self.lambda_at(k)?;
        let w = self.resolvent_point(z) * 2.0 - z;
        let reflected = self.diagonal.project(&w) * 2.0 - &w;
        Ok(z * (1.0 - lambda / 2.0) + reflected * (lambda / 2.0))
    }

    pub fn step_recast(&self, k: usize, z: &Vector) -> std::result::Result<Vector, StepFailure> {
        let alpha = self.lambda_at(k)? / 2.0;
        let beta = self.beta();
        let t = self.recast.apply_with_alpha(z, alpha);
        let inner = self.recast.a().project(z) * (2.0 * beta) - z + &self.q_stacked;
        Ok(t + self.diagonal.project(&inner) * (2.0 * (1.0 - beta) * alpha))
    }

    pub fn step(
        &self,
        form: CmForm,
        k: usize,
        z: &Vector,
    ) -> std::result::Result<Vector, StepFailure> {
        match form {
            CmForm::Direct => self.step_direct(k, z),
            CmForm::Recast => self.step_recast(k, z),
        }
    }

    /// Base-space monitored point: the diagonal value of `P_D P_C((z + γq)/(γ + 1))`.
    pub fn monitor(&self, z: &Vector) -> Vector {
        self.diagonal.block_mean(&self.resolvent_point(z))
    }

    /// Starting iterate: `x0` (default `q`) copied into every block.
    pub fn start(&self, x0: Option<&Vector>) -> Result<Vector> {
        match x0 {
            Some(x) => {
                Error::check_dim(self.diagonal.base_dim(), x.len())?;
                Ok(self.diagonal.embed(x))
            }
            None => Ok(self.q_stacked.clone()),
        }
    }
}

/// Runs CM from `z_0 = (x0, …, x0)` (default `x0 = q`).
pub fn cm_solve(
    sets: &[ConvexSet],
    q: &Vector,
    x0: Option<&Vector>,
    params: &CmParams,
    policy: &StoppingPolicy,
) -> Result<SolveResult> {
    let cm = Combettes::new(sets, q, params.gamma, params.lambda.clone())?;
    let z0 = cm.start(x0)?;
    run_iteration(
        |k, z| cm.step(params.form, k, z),
        z0,
        policy,
        |z| cm.monitor(z),
    )
}

impl ConvexSet {
    /// `factor · self` as an explicit [`crate::sets::Scaled`] wrapper.
    pub(crate) fn scaled_wrapper(self, factor: f64) -> Result<ConvexSet> {
        crate::sets::Scaled::new(self, factor).map(ConvexSet::Scaled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Status, TargetError};
    use nalgebra::dvector;

    fn two_planes() -> Vec<ConvexSet> {
        vec![
            ConvexSet::span(3, &[dvector![1.0, 0.0, 0.0], dvector![0.0, 1.0, 0.0]]).unwrap(),
            ConvexSet::span(3, &[dvector![0.0, 1.0, 0.0], dvector![1.0, 0.0, 1.0]]).unwrap(),
        ]
    }

    #[test]
    fn direct_and_recast_steps_agree() {
        let sets = two_planes();
        let q = dvector![1.0, 2.0, 3.0];
        let cm = Combettes::new(&sets, &q, 0.25, Schedule::Constant(1.8)).unwrap();
        let mut a = cm.start(None).unwrap();
        let mut b = a.clone();
        for k in 0..100 {
            a = cm.step_direct(k, &a).unwrap();
            b = cm.step_recast(k, &b).unwrap();
            assert!((&a - &b).norm() <= 1e-12 * (1.0 + a.norm()), "k={k}");
        }
    }

    #[test]
    fn converges_to_the_projection_onto_the_intersection() {
        let sets = two_planes();
        let q = dvector![1.0, 2.0, 3.0];
        let target = dvector![0.0, 2.0, 0.0];
        for form in [CmForm::Direct, CmForm::Recast] {
            let params = CmParams {
                form,
                ..CmParams::new(0.25)
            };
            let policy =
                StoppingPolicy::true_error(TargetError::Point(target.clone()), 1e-8, 100_000);
            let r = cm_solve(&sets, &q, None, &params, &policy).unwrap();
            assert_eq!(r.status, Status::Converged, "{form:?}");
        }
    }

    #[test]
    fn feasible_anchor_is_its_own_projection() {
        let sets = two_planes();
        let q = dvector![0.0, -4.0, 0.0];
        let policy = StoppingPolicy::true_error(TargetError::Point(q.clone()), 1e-9, 10_000);
        let r = cm_solve(
            &sets,
            &q,
            Some(&dvector![5.0, 5.0, 5.0]),
            &CmParams::new(1.0),
            &policy,
        )
        .unwrap();
        assert_eq!(r.status, Status::Converged);
    }

    #[test]
    fn gamma_to_beta() {
        assert!((CmParams::new(0.25).beta() - 0.8).abs() < 1e-15);
    }
}
