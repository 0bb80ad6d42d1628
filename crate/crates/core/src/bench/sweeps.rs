use std::collections::BTreeMap;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stats::{estimate_rate_from_trace, fit_exponential, median, ExpFit};
use super::svg::{Chart, Series, SeriesKind};
use super::{
    derive_seed, make_instances, records_csv, run_instance, run_parallel, runs_csv, Artifact,
    ExperimentRecord, Instance, ProfileMethod, RunRecord, SweepConfig,
};
use crate::error::{Error, Result};
use crate::geometry::{planar_lines, SubspacePair};
use crate::operators::{Status, StoppingPolicy, TargetError, TraceEntry};
use crate::solvers::{MethodSpec, Schedule};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Median over starts when every start converged.
fn all_converged_median(runs: &[RunRecord]) -> Option<f64> {
    if runs.is_empty() || runs.iter().any(|r| r.status != Status::Converged) {
        return None;
    }
    median(&runs.iter().map(|r| r.iterations as f64).collect::<Vec<_>>())
}

/// Index of the smallest value; ties go to the earliest index.
fn argmin(values: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            if best.is_none_or(|(_, b)| *v < b) {
                best = Some((i, *v));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Method whose averaging weight the α sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaFamily {
    /// One row per β of `alpha_sweep_betas`.
    Aamr,
    /// α restricted to `(0,1)`.
    Drm,
    /// `λ = 2α`, one row per γ of `gamma_grid`.
    Cm,
}

impl AlphaFamily {
    pub fn name(self) -> &'static str {
        match self {
            AlphaFamily::Aamr => "aamr",
            AlphaFamily::Drm => "drm",
            AlphaFamily::Cm => "cm",
        }
    }

    fn params(self, config: &SweepConfig) -> Vec<Option<f64>> {
        match self {
            AlphaFamily::Aamr => config.alpha_sweep_betas.iter().map(|b| Some(*b)).collect(),
            AlphaFamily::Drm => vec![None],
            AlphaFamily::Cm => config.gamma_grid.iter().map(|g| Some(*g)).collect(),
        }
    }

    fn method(self, alpha: f64, param: Option<f64>) -> Option<MethodSpec> {
        match (self, param) {
            (AlphaFamily::Aamr, Some(beta)) => Some(MethodSpec::aamr(alpha, beta)),
            (AlphaFamily::Drm, _) if alpha < 1.0 => Some(MethodSpec::Drm { alpha }),
            (AlphaFamily::Cm, Some(gamma)) => Some(MethodSpec::Cm {
                gamma,
                lambda: Schedule::Constant(2.0 * alpha),
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaRow {
    pub instance_id: usize,
    pub theta_f: f64,
    /// β for AAMR, the equivalent `1/(1+γ)` for CM.
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// `None` when no α converged on every start.
    pub best_alpha: Option<f64>,
    /// Median iterations at the best α.
    pub iterations: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AlphaSweep {
    pub family: AlphaFamily,
    pub rows: Vec<AlphaRow>,
    pub runs: Vec<RunRecord>,
}

/// For each instance and β (or γ), the α of the grid with the fewest median iterations
/// over `n_starts` starts; ties go to the smaller α. An α counts only if every start
/// converged.
pub fn sweep_alpha(config: &SweepConfig, family: AlphaFamily) -> Result<AlphaSweep> {
    let instances = make_instances(config)?;
    let params = family.params(config);
    let mut grid: Vec<f64> = config.alpha_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut tasks = Vec::new();
    for inst in &instances {
        for (pi, p) in params.iter().enumerate() {
            for (ai, a) in grid.iter().enumerate() {
                if let Some(m) = family.method(*a, *p) {
                    for s in 0..config.n_starts {
                        tasks.push((inst, pi, ai, m.clone(), s));
                    }
                }
            }
        }
    }
    let results = run_parallel(config.jobs, tasks, |(inst, pi, ai, m, s)| {
        run_instance(config, inst, &m, s).map(|r| (inst.id, pi, ai, r))
    })?;

    let mut grouped: BTreeMap<(usize, usize, usize), Vec<RunRecord>> = BTreeMap::new();
    for (i, pi, ai, r) in &results {
        grouped.entry((*i, *pi, *ai)).or_default().push(r.clone());
    }
    let mut rows = Vec::new();
    for inst in &instances {
        for (pi, p) in params.iter().enumerate() {
            let medians: Vec<Option<f64>> = (0..grid.len())
                .map(|ai| {
                    grouped
                        .get(&(inst.id, pi, ai))
                        .and_then(|r| all_converged_median(r))
                })
                .collect();
            let best = argmin(&medians);
            let (beta, gamma) = match family {
                AlphaFamily::Aamr => (*p, None),
                AlphaFamily::Cm => (p.map(|g| 1.0 / (1.0 + g)), *p),
                AlphaFamily::Drm => (None, None),
            };
            rows.push(AlphaRow {
                instance_id: inst.id,
                theta_f: inst.theta(),
                beta,
                gamma,
                best_alpha: best.map(|i| grid[i]),
                iterations: best.and_then(|i| medians[i]),
            });
        }
    }
    Ok(AlphaSweep {
        family,
        rows,
        runs: results.into_iter().map(|t| t.3).collect(),
    })
}

impl AlphaSweep {
    pub fn table_csv(&self) -> String {
        let mut out = String::from("instance_id,theta_F,method,beta,gamma,best_alpha,iterations\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.instance_id,
                r.theta_f,
                self.family.name(),
                opt(r.beta),
                opt(r.gamma),
                opt(r.best_alpha),
                opt(r.iterations)
            );
        }
        out
    }

    /// Mean best α per β (or γ) row group, in first-seen order.
    pub fn mean_best_alpha(&self) -> Vec<(Option<f64>, f64)> {
        let mut keys: Vec<Option<f64>> = Vec::new();
        for r in &self.rows {
            let k = if self.family == AlphaFamily::Cm {
                r.gamma
            } else {
                r.beta
            };
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .filter_map(|k| {
                let v: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| {
                        (if self.family == AlphaFamily::Cm {
                            r.gamma
                        } else {
                            r.beta
                        }) == k
                    })
                    .filter_map(|r| r.best_alpha)
                    .collect();
                (!v.is_empty()).then(|| (k, v.iter().sum::<f64>() / v.len() as f64))
            })
            .collect()
    }

    pub fn chart(&self) -> Chart {
        let mut chart = Chart::new(
            &format!("Best alpha per instance ({})", self.family.name()),
            "Friedrichs angle (rad)",
            "best alpha",
        );
        let x_range = self
            .rows
            .iter()
            .map(|r| r.theta_f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |a, t| {
                (a.0.min(t), a.1.max(t))
            });
        for (key, mean) in self.mean_best_alpha() {
            let name = match (self.family, key) {
                (AlphaFamily::Cm, Some(g)) => format!("gamma={g}"),
                (_, Some(b)) => format!("beta={b}"),
                _ => self.family.name().to_string(),
            };
            let pts = self
                .rows
                .iter()
                .filter(|r| {
                    (if self.family == AlphaFamily::Cm {
                        r.gamma
                    } else {
                        r.beta
                    }) == key
                })
                .filter_map(|r| r.best_alpha.map(|a| (r.theta_f, a)))
                .collect();
            chart = chart.with(Series::new(name.clone(), SeriesKind::Markers, pts));
            chart = chart.with(Series::new(
                format!("{name} mean"),
                SeriesKind::Dashed,
                vec![(x_range.0, mean), (x_range.1, mean)],
            ));
        }
        chart
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        vec![
            Artifact::new("runs.csv", runs_csv(&self.runs)),
            Artifact::new("best_alpha.csv", self.table_csv()),
            Artifact::new("best_alpha.svg", self.chart().render()),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct AngleProfile {
    pub records: Vec<ExperimentRecord>,
    pub runs: Vec<RunRecord>,
    pub labels: Vec<String>,
}

/// Runs every roster method from `n_starts` seeded starts on every instance.
pub fn angle_profile(config: &SweepConfig, methods: &[ProfileMethod]) -> Result<AngleProfile> {
    if methods.is_empty() {
        return Err(Error::InvalidParameter(
            "angle profile needs at least one method".into(),
        ));
    }
    for m in methods {
        m.resolve(0.5).validate()?;
    }
    let instances = make_instances(config)?;
    let mut tasks = Vec::new();
    for inst in &instances {
        for (mi, m) in methods.iter().enumerate() {
            let spec = m.resolve(inst.theta());
            for s in 0..config.n_starts {
                tasks.push((inst, mi, spec.clone(), s));
            }
        }
    }
    let runs = run_parallel(config.jobs, tasks, |(inst, _, m, s)| {
        run_instance(config, inst, &m, s)
    })?;
    let labels: Vec<String> = methods.iter().map(ProfileMethod::label).collect();
    let records = runs
        .chunks(config.n_starts)
        .enumerate()
        .map(|(i, chunk)| ExperimentRecord::from_runs(labels[i % methods.len()].clone(), chunk))
        .collect::<Result<Vec<_>>>()?;
    Ok(AngleProfile {
        records,
        runs,
        labels,
    })
}

impl AngleProfile {
    pub fn record(&self, instance_id: usize, label: &str) -> Option<&ExperimentRecord> {
        self.records
            .iter()
            .find(|r| r.instance_id == instance_id && r.label == label)
    }

    fn chart(
        &self,
        title: &str,
        y_label: &str,
        value: impl Fn(&ExperimentRecord) -> Option<f64>,
    ) -> Chart {
        let mut chart = Chart::new(title, "Friedrichs angle (rad)", y_label).log_y();
        for label in &self.labels {
            let mut pts: Vec<(f64, f64)> = self
                .records
                .iter()
                .filter(|r| &r.label == label)
                .filter_map(|r| value(r).map(|v| (r.theta_f, v)))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            chart = chart.with(Series::new(label.clone(), SeriesKind::Line, pts));
        }
        chart
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        vec![
            Artifact::new("runs.csv", runs_csv(&self.runs)),
            Artifact::new("summary.csv", records_csv(&self.records)),
            Artifact::new(
                "median_vs_angle.svg",
                self.chart(
                    "Median iterations to reach tolerance",
                    "iterations (median)",
                    |r| r.median_iters,
                )
                .render(),
            ),
            Artifact::new(
                "std_vs_angle.svg",
                self.chart(
                    "Standard deviation of iterations",
                    "iterations (std)",
                    |r| r.std_iters,
                )
                .render(),
            ),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaBin {
    pub lo: f64,
    pub hi: f64,
    pub instance_ids: Vec<usize>,
    /// Mean Friedrichs angle of the bin's instances.
    pub theta_mean: Option<f64>,
    pub best_beta: Option<f64>,
    pub median_iters: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BetaSweep {
    pub bins: Vec<BetaBin>,
    /// Least-squares `a·exp(bθ) + c` through the per-bin best β; an error message when
    /// the data are degenerate.
    pub fit: std::result::Result<ExpFit, String>,
    pub fit_rmse: Option<f64>,
    /// RMS distance of the published curve to the per-bin best β.
    pub published_rmse: f64,
    pub runs: Vec<RunRecord>,
}

/// For each of `angle_bins` equal bins over `(0, π/2)`, the β of the grid minimizing the
/// median iterations of AAMR(`aamr_alpha`, β) over the bin's instances and starts.
pub fn sweep_beta(config: &SweepConfig) -> Result<BetaSweep> {
    let instances = make_instances(config)?;
    let mut grid = config.beta_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut tasks = Vec::new();
    for inst in &instances {
        for (bi, b) in grid.iter().enumerate() {
            for s in 0..config.n_starts {
                tasks.push((inst, bi, MethodSpec::aamr(config.aamr_alpha, *b), s));
            }
        }
    }
    let results = run_parallel(config.jobs, tasks, |(inst, bi, m, s)| {
        run_instance(config, inst, &m, s).map(|r| (bi, r))
    })?;

    let width = std::f64::consts::FRAC_PI_2 / config.angle_bins as f64;
    let bin_of = |t: f64| ((t / width) as usize).min(config.angle_bins - 1);
    let mut bins: Vec<BetaBin> = (0..config.angle_bins)
        .map(|i| BetaBin {
            lo: width * i as f64,
            hi: width * (i + 1) as f64,
            instance_ids: Vec::new(),
            theta_mean: None,
            best_beta: None,
            median_iters: None,
        })
        .collect();
    for inst in &instances {
        bins[bin_of(inst.theta())].instance_ids.push(inst.id);
    }
    let theta_of: BTreeMap<usize, f64> = instances.iter().map(|i| (i.id, i.theta())).collect();
    for bin in &mut bins {
        if bin.instance_ids.is_empty() {
            continue;
        }
        bin.theta_mean = Some(
            bin.instance_ids.iter().map(|i| theta_of[i]).sum::<f64>()
                / bin.instance_ids.len() as f64,
        );
        let medians: Vec<Option<f64>> = (0..grid.len())
            .map(|bi| {
                let v: Vec<f64> = results
                    .iter()
                    .filter(|(b, r)| {
                        *b == bi
                            && bin.instance_ids.contains(&r.instance_id)
                            && r.status == Status::Converged
                    })
                    .map(|(_, r)| r.iterations as f64)
                    .collect();
                median(&v)
            })
            .collect();
        if let Some(best) = argmin(&medians) {
            bin.best_beta = Some(grid[best]);
            bin.median_iters = medians[best];
        }
    }
    let points: Vec<(f64, f64)> = bins
        .iter()
        .filter_map(|b| Some((b.theta_mean?, b.best_beta?)))
        .collect();
    let fit = fit_exponential(&points).map_err(|e| e.to_string());
    let fit_rmse = fit.as_ref().ok().map(|f| f.rmse(&points));
    Ok(BetaSweep {
        bins,
        fit,
        fit_rmse,
        published_rmse: ExpFit::PUBLISHED.rmse(&points),
        runs: results.into_iter().map(|t| t.1).collect(),
    })
}

impl BetaSweep {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.bins
            .iter()
            .filter_map(|b| Some((b.theta_mean?, b.best_beta?)))
            .collect()
    }

    pub fn table_csv(&self) -> String {
        let mut out =
            String::from("bin,theta_lo,theta_hi,n_instances,theta_mean,best_beta,median_iters\n");
        for (i, b) in self.bins.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i},{},{},{},{},{},{}",
                b.lo,
                b.hi,
                b.instance_ids.len(),
                opt(b.theta_mean),
                opt(b.best_beta),
                opt(b.median_iters)
            );
        }
        out
    }

    pub fn fit_csv(&self) -> String {
        let mut out = String::from("curve,a,b,c,rmse\n");
        match &self.fit {
            Ok(f) => {
                let _ = writeln!(out, "fitted,{},{},{},{}", f.a, f.b, f.c, opt(self.fit_rmse));
            }
            Err(_) => out.push_str("fitted,,,,\n"),
        }
        let p = ExpFit::PUBLISHED;
        let _ = writeln!(
            out,
            "published,{},{},{},{}",
            p.a, p.b, p.c, self.published_rmse
        );
        out
    }

    pub fn chart(&self) -> Chart {
        let curve = |f: &ExpFit| {
            (0..=50)
                .map(|i| i as f64 * std::f64::consts::FRAC_PI_2 / 50.0)
                .map(|t| (t, f.eval(t)))
                .collect()
        };
        let mut chart = Chart::new(
            "Best beta per angle bin",
            "Friedrichs angle (rad)",
            "best beta",
        )
        .with(Series::new("best beta", SeriesKind::Markers, self.points()));
        if let Ok(f) = &self.fit {
            chart = chart.with(Series::new("least-squares fit", SeriesKind::Line, curve(f)));
        }
        chart.with(Series::new(
            "published fit",
            SeriesKind::Dashed,
            curve(&ExpFit::PUBLISHED),
        ))
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        vec![
            Artifact::new("runs.csv", runs_csv(&self.runs)),
            Artifact::new("best_beta.csv", self.table_csv()),
            Artifact::new("beta_fit.csv", self.fit_csv()),
            Artifact::new("best_beta.svg", self.chart().render()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub theta: f64,
    pub method: String,
    pub estimated: Option<f64>,
    /// `cos²θ` for MAP, `cos θ` for DRM.
    pub expected: f64,
}

impl RateRow {
    pub fn relative_error(&self) -> Option<f64> {
        self.estimated
            .map(|e| (e - self.expected).abs() / self.expected)
    }
}

#[derive(Debug, Clone)]
pub struct RateSweep {
    pub rows: Vec<RateRow>,
    pub runs: Vec<RunRecord>,
    pub traces: Vec<(f64, String, Vec<TraceEntry>)>,
}

/// MAP and DRM(α=0.5) on two lines of R² at each angle, from a seeded start of norm
/// `start_norm`, run down to round-off with the error trace recorded.
pub fn rates(config: &SweepConfig, thetas: &[f64]) -> Result<RateSweep> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter(
            "rates needs at least one angle".into(),
        ));
    }
    let mut tasks = Vec::new();
    for (i, &theta) in thetas.iter().enumerate() {
        if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "angle must lie in (0, pi/2], got {theta}"
            )));
        }
        for (m, expected) in [
            (MethodSpec::Map, theta.cos().powi(2)),
            (MethodSpec::Drm { alpha: 0.5 }, theta.cos()),
        ] {
            tasks.push((i, theta, m, expected));
        }
    }
    let out = run_parallel(config.jobs, tasks, |(i, theta, m, expected)| {
        let (u, v) = planar_lines(theta);
        let inst = Instance::new(i, SubspacePair::new(u, v)?);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[3, i as u64]));
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let q = crate::sets::Vector::from_vec(vec![phi.cos(), phi.sin()]) * config.start_norm;
        let floor = f64::EPSILON * config.start_norm;
        let policy = StoppingPolicy::true_error(
            TargetError::Point(crate::sets::Vector::zeros(2)),
            floor,
            config.max_iter,
        )
        .with_trace(true);
        let r = m.solve(&inst.sets, &q, &policy)?;
        let trace = r.trace.clone().unwrap_or_default();
        let row = RateRow {
            theta,
            method: m.label(),
            estimated: estimate_rate_from_trace(&trace).ok(),
            expected,
        };
        Ok((
            row,
            RunRecord::from_result(&inst, m, 0, config.seed, &r),
            trace,
        ))
    })?;
    let mut sweep = RateSweep {
        rows: Vec::new(),
        runs: Vec::new(),
        traces: Vec::new(),
    };
    for (row, run, trace) in out {
        sweep.traces.push((row.theta, row.method.clone(), trace));
        sweep.rows.push(row);
        sweep.runs.push(run);
    }
    Ok(sweep)
}

impl RateSweep {
    pub fn table_csv(&self) -> String {
        let mut out = String::from("theta,method,estimated_rate,expected_rate,relative_error\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.theta,
                r.method,
                opt(r.estimated),
                r.expected,
                opt(r.relative_error())
            );
        }
        out
    }

    pub fn chart(&self) -> Chart {
        let mut chart = Chart::new("Error of the monitored point", "iteration", "error").log_y();
        for (theta, label, trace) in &self.traces {
            let pts = trace
                .iter()
                .map(|t| (t.iteration as f64, t.error))
                .collect();
            chart = chart.with(Series::new(
                format!("{label} theta={theta}"),
                SeriesKind::Line,
                pts,
            ));
        }
        chart
    }

    pub fn artifacts(&self) -> Vec<Artifact> {
        vec![
            Artifact::new("runs.csv", runs_csv(&self.runs)),
            Artifact::new("rates.csv", self.table_csv()),
            Artifact::new("error_vs_iteration.svg", self.chart().render()),
        ]
    }
}
