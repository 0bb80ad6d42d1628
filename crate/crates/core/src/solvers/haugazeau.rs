//! Haugazeau's method in its basic form.
//!
//! `Q(x, y, z)` is the projection of `x` onto `H(x, y) ∩ H(y, z)`, where
//! `H(u, v) = {w : ⟨w − v, u − v⟩ ≤ 0}`. With `π = ⟨x−y, y−z⟩`, `μ = ‖x−y‖²`,
//! `ν = ‖y−z‖²` and `ρ = μν − π²`:
//!
//! * `ρ = 0, π ≥ 0`: `Q = z`
//! * `ρ > 0, πν ≥ ρ`: `Q = x + (1 + π/ν)(z − y)`
//! * `ρ > 0, πν < ρ`: `Q = y + (ν/ρ)(π(x − y) + μ(z − y))`
//!
//! Any other case means the two halfspaces do not intersect. A zero step (`z = y`) has
//! `ν = π = ρ = 0` and returns `y`.

use super::{check_same_dim, SolveResult, StoppingPolicy};
use crate::error::Result;
use crate::operators::{run_iteration, StepFailure};
use crate::sets::{ConvexSet, Vector};

/// `ρ` values within this relative distance of zero are treated as zero.
const DEGENERACY_TOL: f64 = 1e-14;

pub fn haugazeau_step(
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> std::result::Result<Vector, StepFailure> {
    let xy = x - y;
    let yz = y - z;
    let pi = xy.dot(&yz);
    let mu = xy.norm_squared();
    let nu = yz.norm_squared();
    let mut rho = mu * nu - pi * pi;
    if rho.abs() <= DEGENERACY_TOL * mu * nu {
        rho = 0.0;
    }
    if rho == 0.0 && pi >= 0.0 {
        Ok(z.clone())
    } else if rho > 0.0 && pi * nu >= rho {
        Ok(x + (z - y) * (1.0 + pi / nu))
    } else if rho > 0.0 {
        Ok(y + (xy * pi - yz * mu) * (nu / rho))
    } else {
        Err(StepFailure(format!(
            "halfspace intersection is empty (rho={rho:e}, pi={pi:e})"
        )))
    }
}

/// `x_{k+1} = Q(q, x_k, P_{C(k)}(x_k))` with `C(k)` alternating `U, V` and `x_0 = q`.
pub fn haugazeau_solve(
    u: &ConvexSet,
    v: &ConvexSet,
    q: &Vector,
    policy: &StoppingPolicy,
) -> Result<SolveResult> {
    check_same_dim(&[u.clone(), v.clone()], q)?;
    run_iteration(
        |k, x| {
            let set = if k % 2 == 0 { u } else { v };
            haugazeau_step(q, x, &set.project(x))
        },
        q.clone(),
        policy,
        |x| x.clone(),
    )
}
