//! Ensemble diagnostics: weight-variance statistics, weighted histograms,
//! mode masses, sign-change counts, and log-log order fits.

use crate::error::{Error, Result};
use crate::samplers::WeightedPath;

/// Relative weight variance and effective sample size of a weighted ensemble.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleStats {
    pub m: usize,
    /// `Q = M * sum(w^2) / sum(w)^2 - 1`, clamped at zero against roundoff.
    pub q_hat: f64,
    /// `M / (1 + Q)`.
    pub n_eff: f64,
}

/// Compute [`EnsembleStats`] from unnormalized log weights. The largest log
/// weight is subtracted first, which leaves the (scale-invariant) statistic
/// unchanged while keeping the exponentials in range.
pub fn ensemble_stats(log_weights: &[f64]) -> Result<EnsembleStats> {
    let m = log_weights.len();
    if m == 0 {
        return Err(Error::EmptyEnsemble);
    }
    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NonPositiveValue);
    }
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for lw in log_weights {
        let w = (lw - max).exp();
        s1 += w;
        s2 += w * w;
    }
    let q_hat = (m as f64 * s2 / (s1 * s1) - 1.0).max(0.0);
    Ok(EnsembleStats {
        m,
        q_hat,
        n_eff: m as f64 / (1.0 + q_hat),
    })
}

/// Normalized weights `w_i / sum w` from log weights, max-subtracted.
pub fn normalized_weights(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
    let s: f64 = w.iter().sum();
    for v in w.iter_mut() {
        *v /= s;
    }
    w
}

/// Weighted quantile of `values` (normalized `weights`): the smallest value at
/// which the cumulative weight reaches `q`.
pub fn weighted_quantile(values: &[f64], weights: &[f64], q: f64) -> f64 {
    assert_eq!(values.len(), weights.len());
    assert!(!values.is_empty());
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut cum = 0.0;
    for &i in &idx {
        cum += weights[i];
        if cum >= q {
            return values[i];
        }
    }
    values[*idx.last().unwrap()]
}

/// A weighted histogram with uniform bins; masses sum to one.
#[derive(Debug, Clone)]
pub struct WeightedHistogram {
    /// `bins + 1` bin edges, uniformly spaced.
    pub edges: Vec<f64>,
    /// Normalized mass per bin.
    pub mass: Vec<f64>,
}

impl WeightedHistogram {
    /// Histogram over an explicit `[lo, hi]` range; out-of-range values are
    /// clipped into the boundary bins so that no mass is dropped.
    pub fn with_range(values: &[f64], log_weights: &[f64], bins: usize, lo: f64, hi: f64) -> Self {
        assert!(bins >= 1 && hi > lo);
        let w = normalized_weights(log_weights);
        let edges: Vec<f64> = (0..=bins)
            .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
            .collect();
        let mut mass = vec![0.0; bins];
        let scale = bins as f64 / (hi - lo);
        for (v, wi) in values.iter().zip(&w) {
            let b = (((v - lo) * scale).floor() as i64).clamp(0, bins as i64 - 1) as usize;
            mass[b] += wi;
        }
        WeightedHistogram { edges, mass }
    }

    /// Histogram over the weighted 0.1%-99.9% quantile range.
    pub fn from_samples(values: &[f64], log_weights: &[f64], bins: usize) -> Self {
        let w = normalized_weights(log_weights);
        let mut lo = weighted_quantile(values, &w, 0.001);
        let mut hi = weighted_quantile(values, &w, 0.999);
        if !(hi > lo) {
            // Degenerate ensemble: widen symmetrically.
            let pad = lo.abs().max(1.0) * 1e-6;
            lo -= pad;
            hi += pad;
        }
        Self::with_range(values, log_weights, bins, lo, hi)
    }

    /// Total mass in bins whose centers lie in `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        let mut s = 0.0;
        for (b, m) in self.mass.iter().enumerate() {
            let c = 0.5 * (self.edges[b] + self.edges[b + 1]);
            if c >= lo && c <= hi {
                s += m;
            }
        }
        s
    }
}

/// Weighted fraction of samples whose value satisfies the predicate.
pub fn weighted_fraction<F: Fn(f64) -> bool>(values: &[f64], log_weights: &[f64], pred: F) -> f64 {
    let w = normalized_weights(log_weights);
    values
        .iter()
        .zip(&w)
        .filter(|(v, _)| pred(**v))
        .map(|(_, wi)| wi)
        .sum()
}

/// Extract one coordinate of one step (1-based; step `n` is `x_n`) from every
/// sample.
pub fn coordinate_at_step(samples: &[WeightedPath], coord: usize, step: usize) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let n_steps = samples[0].path.len();
    if step < 1 || step > n_steps {
        return Err(Error::OutOfRangeStep { step, n_steps });
    }
    Ok(samples
        .iter()
        .map(|s| s.path.state(step - 1)[coord])
        .collect())
}

/// Number of sign changes along a scalar sequence. Exact zeros inherit the
/// previous nonzero sign, so a touch of zero does not count as a crossing.
pub fn zero_crossings(values: &[f64]) -> usize {
    let mut count = 0;
    let mut prev = 0i8;
    for &v in values {
        let s = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        };
        if s != 0 {
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
    }
    count
}

/// Unweighted average zero-crossing count of one coordinate over an ensemble,
/// with the fixed start state prepended to each path.
pub fn avg_zero_crossings(samples: &[WeightedPath], x0: &[f64], coord: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut total = 0usize;
    let mut seq = Vec::with_capacity(samples[0].path.len() + 1);
    for s in samples {
        seq.clear();
        seq.push(x0[coord]);
        for k in 0..s.path.len() {
            seq.push(s.path.state(k)[coord]);
        }
        total += zero_crossings(&seq);
    }
    Ok(total as f64 / samples.len() as f64)
}

/// Least-squares slope of `ln y` against `ln x`. All inputs must be positive.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return Err(Error::NonPositiveValue);
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0) || !(y > 0.0) {
            return Err(Error::NonPositiveValue);
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}
