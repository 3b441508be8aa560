//! Classical simulator for a disordered discrete time crystal under Pauli-Z
//! dephasing, and the disorder-ensemble analysis that locates its critical
//! fluctuation peak.

pub mod cli;
pub mod criticality;
pub mod error;
pub mod floquet;
pub mod seed;
pub mod spectral;
pub mod state;
pub mod table;

pub use error::{Error, Result};
pub use floquet::{
    evolve_density, evolve_exact, evolve_pure, evolve_trajectory, floquet_step, sample_disorder,
    trajectory_average, DisorderSpec, FloquetParams, MagnetizationTrace, NoiseConfiguration,
    TrajectoryAverage,
};
pub use seed::SeedDerivation;
pub use spectral::{dft_spectrum, order_parameter, OrderParameter, Spectrum};

pub use criticality::{
    batched_peak_estimate, estimate_peak, heatmap_sweep, size_scan, variance_curve, CouplingUnits,
    EvolutionBackend, HeatmapGrid, PeakEstimate, Protocol, VarianceCurve,
};
