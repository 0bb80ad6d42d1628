//! Experiment harness for subspace problems: α and β sweeps, per-angle iteration
//! statistics, rate estimation, and CSV/SVG artifacts.
//!
//! Every run draws its randomness from a stream derived from `(seed, instance_id,
//! start_id)`, so output is byte-identical for a given [`SweepConfig`] regardless of the
//! number of worker threads.

pub mod stats;
pub mod svg;
mod sweeps;

pub use stats::{
    estimate_rate, estimate_rate_from_trace, estimate_rate_indexed, fit_exponential, median,
    std_dev, ExpFit,
};
pub use sweeps::{
    angle_profile, rates, sweep_alpha, sweep_beta, AlphaFamily, AlphaRow, AlphaSweep, AngleProfile,
    BetaBin, BetaSweep, RateRow, RateSweep,
};

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{random_subspace_pair, PairConstraints, SubspacePair};
use crate::operators::{SolveResult, Status, StoppingPolicy, TargetError};
use crate::sets::{ConvexSet, Vector};
use crate::solvers::{optimal_rap_mu, MethodSpec};

/// Exact header of the per-run CSV.
pub const CSV_HEADER: &str =
    "instance_id,theta_F,method,alpha,beta,mu,gamma,start_id,status,iterations,final_error,seed";

/// How the subspace instances of a sweep are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceSampling {
    /// Instance `i` of `N` gets a Friedrichs angle drawn from the `i`-th of `N` equal bins
    /// of `[lo, hi]`, so angles spread evenly over the range.
    Stratified { lo: f64, hi: f64 },
    /// Unconstrained random pairs with a nontrivial intersection.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Ambient dimension.
    pub n: usize,
    pub n_instances: usize,
    pub n_starts: usize,
    pub start_norm: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub alpha_grid: Vec<f64>,
    /// β values used by the α sweep.
    pub alpha_sweep_betas: Vec<f64>,
    /// β values used by the β sweep.
    pub beta_grid: Vec<f64>,
    /// Fixed RAP relaxations added to the default profile roster.
    pub mu_grid: Vec<f64>,
    /// CM parameters used when the α sweep runs CM.
    pub gamma_grid: Vec<f64>,
    /// AAMR α for the angle profile and β sweep.
    pub aamr_alpha: f64,
    pub angle_bins: usize,
    pub sampling: InstanceSampling,
    pub seed: u64,
    /// Worker thread cap; `None` uses rayon's default.
    pub jobs: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let mut beta_grid: Vec<f64> = (0..12).map(|i| round6(0.4 + 0.05 * i as f64)).collect();
        beta_grid.push(0.99);
        Self {
            n: 50,
            n_instances: 20,
            n_starts: 10,
            start_norm: 10.0,
            eps: 1e-3,
            max_iter: 100_000,
            alpha_grid: (1..=20).map(|i| round6(0.05 * i as f64)).collect(),
            alpha_sweep_betas: vec![0.6, 0.7, 0.8, 0.9],
            beta_grid,
            mu_grid: Vec::new(),
            gamma_grid: vec![0.25, 1.0],
            aamr_alpha: 0.9,
            angle_bins: 20,
            sampling: InstanceSampling::Stratified {
                lo: 0.0,
                hi: FRAC_PI_2,
            },
            seed: 0,
            jobs: None,
        }
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

impl SweepConfig {
    /// The full α grid `{0.01, 0.02, …, 1}`.
    pub fn fine_alpha_grid() -> Vec<f64> {
        (1..=100).map(|i| round6(0.01 * i as f64)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n < 3 {
            return bad(format!("n must be at least 3, got {}", self.n));
        }
        if self.n_instances == 0 || self.n_starts == 0 || self.max_iter == 0 || self.angle_bins == 0
        {
            return bad("n_instances, n_starts, max_iter and angle_bins must be positive".into());
        }
        if !(self.start_norm > 0.0 && self.start_norm.is_finite()) {
            return bad(format!(
                "start_norm must be positive, got {}",
                self.start_norm
            ));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0,1), got {}", self.eps));
        }
        if self.alpha_grid.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) || self.alpha_grid.is_empty() {
            return bad("alpha grid must be nonempty within (0,1]".into());
        }
        let beta_ok = |g: &[f64]| g.iter().all(|b| *b > 0.0 && *b < 1.0);
        if !beta_ok(&self.beta_grid) || !beta_ok(&self.alpha_sweep_betas) {
            return bad("beta grids must lie within (0,1)".into());
        }
        if self.mu_grid.iter().any(|m| !(*m > 0.0 && *m < 2.0)) {
            return bad("mu grid must lie within (0,2)".into());
        }
        if self.gamma_grid.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return bad("gamma grid must be positive".into());
        }
        if !(self.aamr_alpha > 0.0 && self.aamr_alpha <= 1.0) {
            return bad(format!(
                "aamr_alpha must lie in (0,1], got {}",
                self.aamr_alpha
            ));
        }
        if let InstanceSampling::Stratified { lo, hi } = self.sampling {
            if !(lo >= 0.0 && lo < hi && hi <= FRAC_PI_2 + 1e-12) {
                return bad(format!(
                    "stratified angle range must satisfy 0 <= lo < hi <= pi/2, got [{lo}, {hi}]"
                ));
            }
        }
        if self.jobs == Some(0) {
            return bad("jobs must be positive".into());
        }
        Ok(())
    }
}

/// SplitMix64-style mixing of a base seed with a list of tags.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    tags.iter().fold(mix(seed), |acc, &t| mix(acc ^ mix(t)))
}

const STREAM_INSTANCE: u64 = 1;
const STREAM_START: u64 = 2;

/// A subspace pair with the sets and true-error target used by the sweeps.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: usize,
    pub pair: SubspacePair,
    pub sets: [ConvexSet; 2],
    /// `d_{U∩V}` of the monitored point.
    pub target: TargetError,
}

impl Instance {
    pub fn new(id: usize, pair: SubspacePair) -> Self {
        let sets = [
            ConvexSet::Subspace(pair.u().clone()),
            ConvexSet::Subspace(pair.v().clone()),
        ];
        let target = TargetError::Set(ConvexSet::Subspace(pair.intersection().clone()));
        Self {
            id,
            pair,
            sets,
            target,
        }
    }

    pub fn theta(&self) -> f64 {
        self.pair.theta()
    }
}

/// Builds instance `id` of `config`.
pub fn make_instance(config: &SweepConfig, id: usize) -> Result<Instance> {
    let seed = derive_seed(config.seed, &[STREAM_INSTANCE, id as u64]);
    let constraints = match config.sampling {
        InstanceSampling::Random => PairConstraints::MinIntersection(1),
        InstanceSampling::Stratified { lo, hi } => {
            let w = (hi - lo) / config.n_instances as f64;
            PairConstraints::AngleInterval(lo + w * id as f64, lo + w * (id + 1) as f64)
        }
    };
    random_subspace_pair(config.n, seed, constraints).map(|p| Instance::new(id, p))
}

pub fn make_instances(config: &SweepConfig) -> Result<Vec<Instance>> {
    config.validate()?;
    run_parallel(config.jobs, (0..config.n_instances).collect(), |id| {
        make_instance(config, id)
    })
}

/// Start point `start_id` for instance `instance_id`: uniform direction, norm `start_norm`.
pub fn start_point(config: &SweepConfig, instance_id: usize, start_id: usize) -> Vector {
    random_point(
        config.n,
        config.start_norm,
        derive_seed(
            config.seed,
            &[STREAM_START, instance_id as u64, start_id as u64],
        ),
    )
}

/// Seeded point of Rⁿ with uniformly distributed direction and the given norm.
pub fn random_point(n: usize, norm: f64, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let len = v.norm();
        if len > 0.0 {
            return v * (norm / len);
        }
    }
}

/// Maps `f` over `items` on a pool capped at `jobs` threads; output keeps input order.
pub(crate) fn run_parallel<T, R, F>(jobs: Option<usize>, items: Vec<T>, f: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Result<R> + Send + Sync,
{
    use rayon::prelude::*;
    let work = || items.into_par_iter().map(&f).collect::<Result<Vec<R>>>();
    match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// A roster entry for the angle profile. `RapOptimal` resolves to RAP with
/// `μ = 2/(1 + sin²θ_F)` on each instance.
#[derive(Debug, Clone)]
pub enum ProfileMethod {
    Fixed(MethodSpec),
    RapOptimal,
}

impl ProfileMethod {
    pub fn resolve(&self, theta: f64) -> MethodSpec {
        match self {
            ProfileMethod::Fixed(m) => m.clone(),
            ProfileMethod::RapOptimal => MethodSpec::Rap {
                mu: optimal_rap_mu(theta),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProfileMethod::Fixed(m) => m.label(),
            ProfileMethod::RapOptimal => "rap(mu=opt)".into(),
        }
    }
}

impl From<MethodSpec> for ProfileMethod {
    fn from(m: MethodSpec) -> Self {
        ProfileMethod::Fixed(m)
    }
}

/// MAP, RAP with optimal μ, DRM(α=0.5), Haugazeau, AAMR(α, β) for β ∈ {0.5, 0.7, 0.9}, plus
/// RAP at each μ of the config grid.
pub fn default_profile_methods(config: &SweepConfig) -> Vec<ProfileMethod> {
    let mut out = vec![
        ProfileMethod::Fixed(MethodSpec::Map),
        ProfileMethod::RapOptimal,
        ProfileMethod::Fixed(MethodSpec::Drm { alpha: 0.5 }),
        ProfileMethod::Fixed(MethodSpec::Haugazeau),
    ];
    out.extend(
        [0.5, 0.7, 0.9].map(|b| ProfileMethod::Fixed(MethodSpec::aamr(config.aamr_alpha, b))),
    );
    out.extend(
        config
            .mu_grid
            .iter()
            .map(|&mu| ProfileMethod::Fixed(MethodSpec::Rap { mu })),
    );
    out
}

/// One solve of a sweep.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub instance_id: usize,
    pub theta_f: f64,
    pub method: MethodSpec,
    pub start_id: usize,
    pub status: Status,
    pub iterations: usize,
    pub final_error: f64,
    pub seed: u64,
}

impl RunRecord {
    pub fn from_result(
        instance: &Instance,
        method: MethodSpec,
        start_id: usize,
        seed: u64,
        r: &SolveResult,
    ) -> Self {
        Self {
            instance_id: instance.id,
            theta_f: instance.theta(),
            method,
            start_id,
            status: r.status,
            iterations: r.iterations,
            final_error: r.final_error,
            seed,
        }
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.instance_id,
            self.theta_f,
            self.method.name(),
            opt(self.method.alpha()),
            opt(self.method.beta()),
            opt(self.method.mu()),
            opt(self.method.gamma()),
            self.start_id,
            self.status,
            self.iterations,
            self.final_error,
            self.seed
        )
    }
}

/// Per-run CSV with [`CSV_HEADER`].
pub fn runs_csv(runs: &[RunRecord]) -> String {
    let mut out = String::with_capacity(64 * (runs.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in runs {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Aggregate of `n_starts` runs of one method on one instance.
#[derive(Debug, Clone)]
pub struct ExperimentRecord {
    pub instance_id: usize,
    pub theta_f: f64,
    pub method: MethodSpec,
    /// Roster label (distinguishes e.g. optimal-μ RAP from fixed-μ RAP).
    pub label: String,
    pub n_starts: usize,
    /// Over converged runs only; `None` when no run converged.
    pub median_iters: Option<f64>,
    pub std_iters: Option<f64>,
    pub status_counts: BTreeMap<Status, usize>,
    pub seed: u64,
}

impl ExperimentRecord {
    /// Aggregates runs that share instance and method.
    pub fn from_runs(label: String, runs: &[RunRecord]) -> Result<Self> {
        let first = runs
            .first()
            .ok_or_else(|| Error::InvalidParameter("no runs to aggregate".into()))?;
        let converged: Vec<f64> = runs
            .iter()
            .filter(|r| r.status == Status::Converged)
            .map(|r| r.iterations as f64)
            .collect();
        let mut status_counts = BTreeMap::new();
        for r in runs {
            *status_counts.entry(r.status).or_insert(0) += 1;
        }
        Ok(Self {
            instance_id: first.instance_id,
            theta_f: first.theta_f,
            method: first.method.clone(),
            label,
            n_starts: runs.len(),
            median_iters: median(&converged),
            std_iters: std_dev(&converged),
            status_counts,
            seed: first.seed,
        })
    }

    /// Median with non-converged-everywhere treated as +∞, for orderings.
    pub fn median_or_inf(&self) -> f64 {
        self.median_iters.unwrap_or(f64::INFINITY)
    }
}

/// Summary CSV of experiment records.
pub fn records_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from("instance_id,theta_F,label,n_starts,median_iters,std_iters,converged,budget_exhausted,diverged,numerical_failure,seed\n");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        let c = |s| r.status_counts.get(&s).copied().unwrap_or(0);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.instance_id,
            r.theta_f,
            r.label,
            r.n_starts,
            opt(r.median_iters),
            opt(r.std_iters),
            c(Status::Converged),
            c(Status::BudgetExhausted),
            c(Status::Diverged),
            c(Status::NumericalFailure),
            r.seed
        );
    }
    out
}

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: String) -> Self {
        Self {
            name: name.into(),
            contents,
        }
    }
}

/// Runs `method` on `instance` from start `start_id` with `d_{U∩V} < ε` stopping.
pub fn run_instance(
    config: &SweepConfig,
    instance: &Instance,
    method: &MethodSpec,
    start_id: usize,
) -> Result<RunRecord> {
    let q = start_point(config, instance.id, start_id);
    let policy = StoppingPolicy::true_error(instance.target.clone(), config.eps, config.max_iter);
    let r = method.solve(&instance.sets, &q, &policy)?;
    Ok(RunRecord::from_result(
        instance,
        method.clone(),
        start_id,
        config.seed,
        &r,
    ))
}
