//! Disorder-ensemble variance of the order parameter and the location of its
//! peak in ε.

mod peak;
mod spline;
mod sweep;

pub use peak::{
    batch_ranges, batched_peak_estimate, curve_peak, estimate_peak, pooled_sigma, PeakEstimate, PeakLocation,
    DENSE_GRID_POINTS,
};
pub use spline::{fit_smoothing_spline, gcv_grid, Smoothing, SmoothingSpline, GCV_GRID_MAX, GCV_GRID_MIN, GCV_GRID_POINTS};
pub use sweep::{
    heatmap_sweep, linspace, sample_order_parameters, size_scan, size_scan_table, unbiased_variance, variance_curve,
    CouplingUnits, EvolutionBackend, HSamples, HeatmapGrid, Protocol, SizeScanRow, VarianceCurve,
};
