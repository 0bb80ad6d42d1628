#![allow(dead_code)]

use aamr::nalgebra::DMatrix;
use aamr::{ConvexSet, LinearSubspace, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn subspace(rng: &mut ChaCha8Rng, n: usize, d: usize) -> LinearSubspace {
    let m = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    LinearSubspace::from_columns(&m).unwrap()
}

pub const KINDS: usize = 10;

/// One of several set variants, chosen by `kind % KINDS`.
pub fn random_set(rng: &mut ChaCha8Rng, n: usize, kind: usize) -> ConvexSet {
    match kind % KINDS {
        0 => ConvexSet::ball(gaussian(rng, n), rng.random_range(0.1..3.0)).unwrap(),
        1 => {
            let d = rng.random_range(1..n);
            ConvexSet::Subspace(subspace(rng, n, d))
        }
        2 => {
            let d = rng.random_range(1..n);
            ConvexSet::affine(gaussian(rng, n), subspace(rng, n, d)).unwrap()
        }
        3 => ConvexSet::halfspace(gaussian(rng, n), rng.random_range(-2.0..2.0)).unwrap(),
        4 => ConvexSet::hyperplane(gaussian(rng, n), rng.random_range(-2.0..2.0)).unwrap(),
        5 => {
            let lo = gaussian(rng, n);
            let hi = lo.map(|v| v + rng.random_range(0.0..2.0));
            ConvexSet::boxed(lo, hi).unwrap()
        }
        6 => random_set(rng, n, 0).minus(&gaussian(rng, n)).unwrap(),
        7 => random_set(rng, n, 5)
            .scaled(rng.random_range(0.2..3.0))
            .unwrap(),
        8 => {
            let k = rng.random_range(1..4);
            if !n.is_multiple_of(k) {
                return ConvexSet::whole(n);
            }
            let m = n / k;
            ConvexSet::product((0..k).map(|i| random_set(rng, m, i + 3)).collect()).unwrap()
        }
        _ => ConvexSet::whole(n),
    }
}

pub fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}
