//! Subspace analytics: principal angles, the Friedrichs angle, intersection bases and
//! seeded random subspace pairs.
//!
//! Principal angles come from the SVD `Q_Uᵀ Q_V = Y Σ Zᵀ`. Each angle is evaluated as
//! `atan2(‖(I − Q_U Q_Uᵀ) v‖, ‖Q_Uᵀ v‖)` on the principal vector `v = Q_V z`, which keeps
//! angles near zero accurate; `acos(σ)` alone cannot resolve angles below ~1e-8.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sets::{LinearSubspace, Vector};

/// Principal angles at or below this value (radians) count as intersection directions.
pub const ZERO_ANGLE_TOL: f64 = 1e-8;

/// Draw cap for angle-targeted generation.
pub const MAX_DRAWS: usize = 10_000;

struct PrincipalData {
    angles: Vec<f64>,
    /// Principal vectors in V, one column per angle, same order as `angles`.
    vectors: DMatrix<f64>,
}

fn check_orthonormal(q: &DMatrix<f64>) -> Result<()> {
    let defect = linalg::orthonormality_defect(q);
    if defect > 1e-12 * q.nrows().max(1) as f64 {
        Err(Error::NotOrthonormal(defect))
    } else {
        Ok(())
    }
}

fn principal_data(qu: &DMatrix<f64>, qv: &DMatrix<f64>) -> Result<PrincipalData> {
    Error::check_dim(qu.nrows(), qv.nrows())?;
    check_orthonormal(qu)?;
    check_orthonormal(qv)?;
    let n = qu.nrows();
    let k = qu.ncols().min(qv.ncols());
    if k == 0 {
        return Ok(PrincipalData {
            angles: Vec::new(),
            vectors: DMatrix::zeros(n, 0),
        });
    }
    let cross = qu.transpose() * qv;
    let svd = cross.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    order.truncate(k);

    let mut pairs: Vec<(f64, Vector)> = order
        .iter()
        .map(|&i| {
            let z = v_t.row(i).transpose();
            let v = qv * z;
            let coeffs = qu.transpose() * &v;
            let cos = coeffs.norm();
            let sin = (&v - qu * coeffs).norm();
            (sin.atan2(cos).clamp(0.0, std::f64::consts::FRAC_PI_2), v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let vectors = DMatrix::from_fn(n, pairs.len(), |r, c| pairs[c].1[r]);
    Ok(PrincipalData {
        angles: pairs.into_iter().map(|p| p.0).collect(),
        vectors,
    })
}

/// Principal angles between `span(Q_U)` and `span(Q_V)`, nondecreasing, in `[0, π/2]`.
pub fn principal_angles(qu: &DMatrix<f64>, qv: &DMatrix<f64>) -> Result<Vec<f64>> {
    principal_data(qu, qv).map(|d| d.angles)
}

/// Orthonormal basis of `U ∩ V` from the principal vectors whose angle is at most `tol`.
///
/// The inputs are assumed orthonormal (see [`principal_angles`] for the checked entry).
pub fn subspace_intersection(qu: &DMatrix<f64>, qv: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = qu.nrows();
    let Ok(data) = principal_data(qu, qv) else {
        return DMatrix::zeros(n, 0);
    };
    let s = data.angles.iter().take_while(|&&a| a <= tol).count();
    linalg::orthonormal_basis(&data.vectors.columns(0, s).into_owned())
}

fn friedrichs_from_angles(angles: &[f64], du: usize, dv: usize) -> Result<f64> {
    let s = angles.iter().take_while(|&&a| a <= ZERO_ANGLE_TOL).count();
    match angles.get(s) {
        Some(&theta) => Ok(theta),
        None if du == dv => Err(Error::CoincidentSubspaces),
        None => Err(Error::NestedSubspaces),
    }
}

/// Friedrichs angle: the first principal angle beyond the `dim(U ∩ V)` zero angles.
pub fn friedrichs_angle(u: &LinearSubspace, v: &LinearSubspace) -> Result<f64> {
    let angles = principal_angles(u.basis(), v.basis())?;
    friedrichs_from_angles(&angles, u.rank(), v.rank())
}

/// Two subspaces together with their intersection and Friedrichs angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspacePair {
    u: LinearSubspace,
    v: LinearSubspace,
    intersection: LinearSubspace,
    angles: Vec<f64>,
    friedrichs: f64,
}

impl SubspacePair {
    /// Fails when one subspace contains the other (no angle beyond the intersection).
    pub fn new(u: LinearSubspace, v: LinearSubspace) -> Result<Self> {
        let data = principal_data(u.basis(), v.basis())?;
        let friedrichs = friedrichs_from_angles(&data.angles, u.rank(), v.rank())?;
        let s = data
            .angles
            .iter()
            .take_while(|&&a| a <= ZERO_ANGLE_TOL)
            .count();
        let intersection = LinearSubspace::from_orthonormal(linalg::orthonormal_basis(
            &data.vectors.columns(0, s).into_owned(),
        ))
        .unwrap_or_else(|_| LinearSubspace::trivial(u.dim()));
        Ok(Self {
            u,
            v,
            intersection,
            angles: data.angles,
            friedrichs,
        })
    }

    pub fn u(&self) -> &LinearSubspace {
        &self.u
    }

    pub fn v(&self) -> &LinearSubspace {
        &self.v
    }

    pub fn intersection(&self) -> &LinearSubspace {
        &self.intersection
    }

    pub fn principal_angles(&self) -> &[f64] {
        &self.angles
    }

    /// Friedrichs angle in radians.
    pub fn theta(&self) -> f64 {
        self.friedrichs
    }

    pub fn cos_friedrichs(&self) -> f64 {
        self.friedrichs.cos()
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    /// `d_{U∩V}(z) = ‖z − Q_I Q_Iᵀ z‖`.
    pub fn distance_to_intersection(&self, z: &Vector) -> f64 {
        (z - self.intersection.project(z)).norm()
    }

    pub fn project_onto_intersection(&self, z: &Vector) -> Vector {
        self.intersection.project(z)
    }
}

/// Generation constraints for [`random_subspace_pair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairConstraints {
    /// `dim(U ∩ V) ≥ k` (with `k ≥ 1`).
    MinIntersection(usize),
    /// Friedrichs angle in `[lo, hi]`, built directly: the angle is drawn uniformly from
    /// the interval and the remaining principal angles uniformly above it.
    AngleInterval(f64, f64),
    /// Friedrichs angle in `[lo, hi]` by rejection over unconstrained draws, capped at
    /// [`MAX_DRAWS`]. Gaussian subspaces of R⁵⁰ rarely exceed ~0.7 rad, so wide-angle
    /// intervals exhaust the cap.
    AngleIntervalRejection(f64, f64),
}

impl Default for PairConstraints {
    fn default() -> Self {
        PairConstraints::MinIntersection(1)
    }
}

fn gaussian_basis(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Result<LinearSubspace> {
    let m = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    LinearSubspace::from_columns(&m)
}

fn draw_dims(rng: &mut ChaCha8Rng, n: usize, min_intersection: usize) -> (usize, usize) {
    let lo = n.div_ceil(4).max(1);
    let hi = (3 * n).div_ceil(4).min(n - 1).max(lo);
    loop {
        let du = rng.random_range(lo..=hi);
        let dv = rng.random_range(lo..=hi);
        if du + dv >= n + min_intersection {
            return (du, dv);
        }
    }
}

fn draw_pair(rng: &mut ChaCha8Rng, n: usize, min_intersection: usize) -> Result<SubspacePair> {
    loop {
        let (du, dv) = draw_dims(rng, n, min_intersection);
        let u = gaussian_basis(rng, n, du)?;
        let v = gaussian_basis(rng, n, dv)?;
        match SubspacePair::new(u, v) {
            Ok(pair) => return Ok(pair),
            Err(Error::CoincidentSubspaces | Error::NestedSubspaces) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Pair with prescribed dimensions and Friedrichs angle drawn from `[lo, hi]`.
///
/// In a random orthonormal frame `w_1..w_n`: the first `k = d_U + d_V − n` columns span
/// the intersection, `U` adds `w_{k+1..k+m_U}`, and `V` adds `cos θ_j w_{k+j} + sin θ_j w'_j`
/// for the `min(m_U, m_V)` principal pairs plus any leftover frame columns.
fn constructed_pair(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Result<SubspacePair> {
    let (du, dv) = draw_dims(rng, n, 1);
    let k = du + dv - n;
    let (mu, mv) = (du - k, dv - k);
    let frame = gaussian_basis(rng, n, n)?;
    let w = frame.basis();
    let pairs = mu.min(mv);
    let theta_f = if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    };
    let mut thetas: Vec<f64> = (0..pairs)
        .map(|j| {
            if j == 0 {
                theta_f
            } else {
                rng.random_range(theta_f..=std::f64::consts::FRAC_PI_2)
            }
        })
        .collect();
    thetas.sort_by(f64::total_cmp);

    let mut u_cols: Vec<Vector> = (0..k + mu).map(|c| w.column(c).into_owned()).collect();
    let mut v_cols: Vec<Vector> = (0..k).map(|c| w.column(c).into_owned()).collect();
    // frame columns after the intersection and U's block
    let partners = k + mu;
    for (j, t) in thetas.iter().enumerate() {
        v_cols.push(w.column(k + j) * t.cos() + w.column(partners + j) * t.sin());
    }
    for c in partners + pairs..n {
        v_cols.push(w.column(c).into_owned());
    }
    if u_cols.len() < du {
        u_cols.extend((partners + pairs..n).map(|c| w.column(c).into_owned()));
    }
    let u = LinearSubspace::span(n, &u_cols)?;
    let v = LinearSubspace::span(n, &v_cols)?;
    SubspacePair::new(u, v)
}

/// Seeded random pair of subspaces of Rⁿ with nontrivial intersection.
///
/// Dimensions are uniform on `[⌈n/4⌉, ⌈3n/4⌉]` subject to `d_U + d_V > n`; bases are
/// orthonormalized standard Gaussian matrices. Identical `(n, seed, constraints)` give a
/// bit-identical pair.
pub fn random_subspace_pair(
    n: usize,
    seed: u64,
    constraints: PairConstraints,
) -> Result<SubspacePair> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "random subspace pairs need n >= 3, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match constraints {
        PairConstraints::MinIntersection(k) => {
            let k = k.max(1);
            if k > n / 2 {
                return Err(Error::InvalidParameter(format!(
                    "minimum intersection dimension {k} not reachable with dimensions up to 3n/4 in R^{n}"
                )));
            }
            draw_pair(&mut rng, n, k)
        }
        PairConstraints::AngleInterval(lo, hi) => {
            check_interval(lo, hi)?;
            let lo = lo.max(10.0 * ZERO_ANGLE_TOL);
            let hi = hi.min(std::f64::consts::FRAC_PI_2);
            if lo > hi {
                return Err(Error::InvalidParameter(format!(
                    "angle interval [{lo}, {hi}] misses (0, pi/2]"
                )));
            }
            constructed_pair(&mut rng, n, lo, hi)
        }
        PairConstraints::AngleIntervalRejection(lo, hi) => {
            check_interval(lo, hi)?;
            for _ in 0..MAX_DRAWS {
                let pair = draw_pair(&mut rng, n, 1)?;
                if (lo..=hi).contains(&pair.theta()) {
                    return Ok(pair);
                }
            }
            Err(Error::RetriesExhausted {
                lo,
                hi,
                draws: MAX_DRAWS,
            })
        }
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if lo <= hi && hi >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "empty angle interval [{lo}, {hi}]"
        )))
    }
}

/// Two lines through the origin of R² at angle `theta`.
pub fn planar_lines(theta: f64) -> (LinearSubspace, LinearSubspace) {
    let u = LinearSubspace::span(2, &[Vector::from_vec(vec![1.0, 0.0])]).expect("unit vector");
    let v = LinearSubspace::span(2, &[Vector::from_vec(vec![theta.cos(), theta.sin()])])
        .expect("unit vector");
    (u, v)
}
