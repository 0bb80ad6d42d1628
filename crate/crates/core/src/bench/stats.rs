//! Summary statistics, linear-rate estimation and the exponential β fit.

use crate::error::{Error, Result};
use crate::operators::TraceEntry;

/// Minimum number of usable error samples for [`estimate_rate`].
pub const MIN_RATE_SAMPLES: usize = 20;

/// Median; the mean of the two middle values for even counts. `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

/// Population standard deviation (zero for a single value). `None` when empty.
pub fn std_dev(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt())
}

/// Asymptotic linear factor of an error sequence indexed by iteration.
///
/// Samples that are non-finite or below `1e2 · machine-ε` relative to the largest error are
/// dropped; the first tenth of what remains is treated as burn-in, a least-squares line is
/// fitted to `log(error)` against `k` over the rest and its slope is exponentiated. A long
/// window matters for oscillating errors such as the DR shadow on two lines.
pub fn estimate_rate_indexed(samples: &[(usize, f64)]) -> Result<f64> {
    let scale = samples
        .iter()
        .map(|s| s.1)
        .filter(|e| e.is_finite())
        .fold(1.0_f64, f64::max);
    let floor = 1e2 * f64::EPSILON * scale;
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, e)| e.is_finite() && *e > floor)
        .map(|&(k, e)| (k as f64, e.ln()))
        .collect();
    if usable.len() < MIN_RATE_SAMPLES {
        return Err(Error::InsufficientSamples {
            found: usable.len(),
            needed: MIN_RATE_SAMPLES,
        });
    }
    let tail = &usable[usable.len() / 10..];
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((sxy / sxx).exp())
}

/// [`estimate_rate_indexed`] for `errors[k]` at iteration `k`.
pub fn estimate_rate(errors: &[f64]) -> Result<f64> {
    let samples: Vec<(usize, f64)> = errors.iter().copied().enumerate().collect();
    estimate_rate_indexed(&samples)
}

/// Rate from a solver trace.
pub fn estimate_rate_from_trace(trace: &[TraceEntry]) -> Result<f64> {
    let samples: Vec<(usize, f64)> = trace.iter().map(|t| (t.iteration, t.error)).collect();
    estimate_rate_indexed(&samples)
}

/// `β = a·exp(bθ) + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ExpFit {
    /// The published best-β curve `0.596 e^{−1.387θ} + 0.393`.
    pub const PUBLISHED: ExpFit = ExpFit {
        a: 0.596,
        b: -1.387,
        c: 0.393,
    };

    pub fn eval(&self, theta: f64) -> f64 {
        self.a * (self.b * theta).exp() + self.c
    }

    /// Root-mean-square residual over `(θ, β)` points.
    pub fn rmse(&self, points: &[(f64, f64)]) -> f64 {
        if points.is_empty() {
            return f64::NAN;
        }
        let ss: f64 = points
            .iter()
            .map(|(t, y)| (self.eval(*t) - y).powi(2))
            .sum();
        (ss / points.len() as f64).sqrt()
    }
}

/// Linear least squares for `(a, c)` at fixed `b`; returns the fit and its residual sum.
fn fit_linear_part(points: &[(f64, f64)], b: f64) -> Option<(ExpFit, f64)> {
    let n = points.len() as f64;
    let (mut su, mut suu, mut sy, mut suy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in points {
        let u = (b * t).exp();
        su += u;
        suu += u * u;
        sy += y;
        suy += u * y;
    }
    let det = n * suu - su * su;
    if det.abs() <= 1e-12 * (n * suu).max(1e-300) {
        return None;
    }
    let a = (n * suy - su * sy) / det;
    let c = (sy - a * su) / n;
    let fit = ExpFit { a, b, c };
    let ss = points.iter().map(|(t, y)| (fit.eval(*t) - y).powi(2)).sum();
    Some((fit, ss))
}

/// Least-squares fit of `a·exp(bθ) + c` by variable projection: `b` is scanned over
/// `[−10, 10]` and refined by golden-section search, `(a, c)` solved linearly for each `b`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<ExpFit> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if xs.len() < 3 || points.iter().any(|(t, y)| !t.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "exponential fit needs at least 3 distinct finite angles, got {}",
            xs.len()
        )));
    }
    let cost = |b: f64| fit_linear_part(points, b).map_or(f64::INFINITY, |(_, ss)| ss);
    let step = 0.05;
    let mut best_b = f64::NAN;
    let mut best = f64::INFINITY;
    for i in 0..=400 {
        let b = -10.0 + step * i as f64;
        let c = cost(b);
        if c < best {
            best = c;
            best_b = b;
        }
    }
    if !best.is_finite() {
        return Err(Error::InvalidParameter(
            "exponential fit is degenerate".into(),
        ));
    }
    let (mut lo, mut hi) = (best_b - step, best_b + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if cost(m1) <= cost(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let b = 0.5 * (lo + hi);
    let b = if cost(b) <= best { b } else { best_b };
    fit_linear_part(points, b)
        .map(|(f, _)| f)
        .ok_or_else(|| Error::InvalidParameter("exponential fit is degenerate".into()))
}
