//! Fixtures shared by the criterion benchmarks.

use aamr::geometry::{random_subspace_pair, PairConstraints};
use aamr::{ConvexSet, SubspacePair, Vector};

/// Seeded subspace pair in Rⁿ together with its two sets and a point of norm 10.
pub fn subspace_fixture(n: usize, seed: u64) -> (SubspacePair, [ConvexSet; 2], Vector) {
    let pair = random_subspace_pair(n, seed, PairConstraints::default()).expect("fixture pair");
    let sets = [
        ConvexSet::Subspace(pair.u().clone()),
        ConvexSet::Subspace(pair.v().clone()),
    ];
    let q = Vector::from_fn(n, |i, _| ((i * 7919 + 13) % 101) as f64 - 50.0);
    let q = q.normalize() * 10.0;
    (pair, sets, q)
}
