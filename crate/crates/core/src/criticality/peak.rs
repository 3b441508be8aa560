use serde::Serialize;

use super::spline::{fit_smoothing_spline, Smoothing};
use super::sweep::{unbiased_variance, HSamples, VarianceCurve};
use crate::error::{Error, Result};

pub const DENSE_GRID_POINTS: usize = 1000;

/// Peak of one smoothed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakLocation {
    pub location: f64,
    /// the dense-grid argmax sat on an end of the grid
    pub boundary: bool,
    pub lambda: f64,
}

/// Peak of the pooled curve plus the spread of per-batch peaks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakEstimate {
    pub location: f64,
    pub boundary_peak: bool,
    pub batch_locations: Vec<f64>,
    /// batches whose own peak landed on a grid end
    pub boundary_batches: usize,
    pub mean: f64,
    /// sample standard deviation of the batch peaks; 0 for a single batch
    pub sigma: f64,
    pub single_batch: bool,
    pub one_sigma: (f64, f64),
    pub two_sigma: (f64, f64),
}

pub fn estimate_peak(x: &[f64], y: &[f64]) -> Result<PeakLocation> {
    let spline = fit_smoothing_spline(x, y, Smoothing::Auto)?;
    let (lo, hi) = (x[0], x[x.len() - 1]);
    let dx = (hi - lo) / (DENSE_GRID_POINTS - 1) as f64;
    let values: Vec<f64> = (0..DENSE_GRID_POINTS)
        .map(|i| spline.eval(lo + dx * i as f64))
        .collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let at = |i: usize| if i == DENSE_GRID_POINTS - 1 { hi } else { lo + dx * i as f64 };
    if best == 0 || best == DENSE_GRID_POINTS - 1 {
        return Ok(PeakLocation {
            location: at(best),
            boundary: true,
            lambda: spline.lambda(),
        });
    }
    let (left, mid, right) = (values[best - 1], values[best], values[best + 1]);
    let curvature = left - 2.0 * mid + right;
    let shift = if curvature < 0.0 {
        (0.5 * (left - right) / curvature).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Ok(PeakLocation {
        location: (at(best) + shift * dx).clamp(lo, hi),
        boundary: false,
        lambda: spline.lambda(),
    })
}

pub fn curve_peak(curve: &VarianceCurve) -> Result<PeakLocation> {
    estimate_peak(&curve.eps_grid, &curve.variances)
}

/// Contiguous batch bounds: `count / batches` each, the remainder spread one
/// per batch from the front.
pub fn batch_ranges(count: usize, batches: usize) -> Vec<std::ops::Range<usize>> {
    let (base, extra) = (count / batches, count % batches);
    let mut start = 0;
    (0..batches)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let range = start..start + len;
            start += len;
            range
        })
        .collect()
}

pub fn batched_peak_estimate(samples: &HSamples, batch_count: usize) -> Result<PeakEstimate> {
    let count = samples.realizations();
    if batch_count == 0 {
        return Err(Error::invalid("batches", batch_count, "need at least one batch"));
    }
    if count < 2 * batch_count {
        return Err(Error::InsufficientData(format!(
            "{count} realizations cannot fill {batch_count} batches of at least 2"
        )));
    }
    let pooled = curve_peak(&samples.variance_curve()?)?;

    let mut batch_locations = Vec::with_capacity(batch_count);
    let mut boundary_batches = 0;
    for range in batch_ranges(count, batch_count) {
        let variances: Vec<f64> = samples
            .values
            .iter()
            .map(|row| unbiased_variance(&row[range.clone()]))
            .collect::<Result<_>>()?;
        let peak = estimate_peak(&samples.eps_grid, &variances)?;
        boundary_batches += usize::from(peak.boundary);
        batch_locations.push(peak.location);
    }

    let mean = batch_locations.iter().sum::<f64>() / batch_count as f64;
    let single_batch = batch_count == 1;
    let sigma = if single_batch {
        0.0
    } else {
        unbiased_variance(&batch_locations)?.sqrt()
    };
    Ok(PeakEstimate {
        location: pooled.location,
        boundary_peak: pooled.boundary,
        batch_locations,
        boundary_batches,
        mean,
        sigma,
        single_batch,
        one_sigma: (mean - sigma, mean + sigma),
        two_sigma: (mean - 2.0 * sigma, mean + 2.0 * sigma),
    })
}

/// `√((σ_a² + σ_b²) / 2)`.
pub fn pooled_sigma(a: &PeakEstimate, b: &PeakEstimate) -> f64 {
    (0.5 * (a.sigma * a.sigma + b.sigma * b.sigma)).sqrt()
}
