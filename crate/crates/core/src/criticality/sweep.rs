use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use super::peak::{batched_peak_estimate, PeakEstimate};
use crate::error::{Error, Result};
use crate::floquet::{evolve_exact, sample_disorder, trajectory_average, DisorderSpec, FloquetParams};
use crate::seed::{SeedDerivation, StreamPurpose};
use crate::spectral::order_parameter;
use crate::state::{GateAngle, DENSITY_CAP, PURE_CAP};
use crate::table::{fmt12, Table};

/// How a sampled coupling `J` enters the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingUnits {
    /// `J` is the phase in `exp(iJ ZZ)`.
    Phase,
    /// `J` is a two-qubit `RZZ(J) = exp(−iJ ZZ / 2)` angle: phase `J/2`.
    #[serde(rename = "rzz")]
    RzzAngle,
}

impl CouplingUnits {
    pub fn phase(self, j: GateAngle) -> GateAngle {
        match self {
            CouplingUnits::Phase => j,
            // the sign of the phase does not change ⟨Z⟩ (complex conjugation)
            CouplingUnits::RzzAngle => GateAngle::new(0.5 * j.value()).expect("finite"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EvolutionBackend {
    /// Exact dephasing channel.
    Exact,
    /// Mean over `count` sampled Z-error circuits.
    Trajectory { count: usize },
}

/// Everything fixed across a sweep except `(ε, p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Protocol {
    pub n: usize,
    pub steps: usize,
    pub disorder: DisorderSpec,
    pub backend: EvolutionBackend,
    pub units: CouplingUnits,
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        let cap = match self.backend {
            EvolutionBackend::Exact => ("exact", DENSITY_CAP),
            EvolutionBackend::Trajectory { count } => {
                if count == 0 {
                    return Err(Error::invalid("trajectories", count, "need at least one"));
                }
                ("trajectory", PURE_CAP)
            }
        };
        if self.n < 2 || self.n > cap.1 {
            return Err(Error::Capacity {
                backend: cap.0,
                cap: cap.1,
                n: self.n,
            });
        }
        if self.steps < 2 || !self.steps.is_multiple_of(2) {
            return Err(Error::invalid("K", self.steps, "must be even and >= 2"));
        }
        Ok(())
    }

    pub fn with_n(&self, n: usize) -> Self {
        Protocol { n, ..self.clone() }
    }

    pub fn couplings(&self, realization: usize) -> Vec<GateAngle> {
        sample_disorder(&self.disorder, self.n, realization)
            .into_iter()
            .map(|j| self.units.phase(j))
            .collect()
    }

    /// `h` for one realization at one grid point.
    pub fn order_parameter_at(
        &self,
        realization: usize,
        eps: f64,
        p: f64,
        grid_index: (usize, usize),
    ) -> Result<f64> {
        let params = FloquetParams::new(eps, self.couplings(realization), p, self.steps)?;
        let trace = match self.backend {
            EvolutionBackend::Exact => evolve_exact(&params)?,
            EvolutionBackend::Trajectory { count } => {
                let stream = SeedDerivation::new(self.disorder.master_seed, StreamPurpose::Noise)
                    .realization(realization)
                    .grid_point(grid_index.0, grid_index.1);
                trajectory_average(&params, count, stream)?.mean
            }
        };
        Ok(order_parameter(&trace)?.value())
    }
}

/// `n` evenly spaced values from `min` to `max`, both included.
pub fn linspace(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || !min.is_finite() || !max.is_finite() {
        return Err(Error::invalid("grid", format!("[{min}, {max}] x {points}"), "need finite bounds and >= 1 point"));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    if max <= min {
        return Err(Error::invalid("grid", format!("[{min}, {max}]"), "max must exceed min"));
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i == points - 1 { max } else { min + step * i as f64 })
        .collect())
}

fn check_grid(name: &'static str, grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(name, "[]", "grid is empty"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(name, format!("{grid:?}"), "grid must be strictly increasing"));
    }
    if grid.iter().any(|v| !(lo..=hi).contains(v)) {
        return Err(Error::invalid(name, format!("{grid:?}"), "grid value out of range"));
    }
    Ok(())
}

/// Unbiased sample variance.
pub fn unbiased_variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "variance needs at least 2 samples, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Ok(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
}

/// Per-realization order parameters over an ε grid at one `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HSamples {
    pub eps_grid: Vec<f64>,
    pub p: f64,
    /// `values[e][r]`: grid point `e`, realization `r`
    pub values: Vec<Vec<f64>>,
}

impl HSamples {
    pub fn realizations(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn variance_curve(&self) -> Result<VarianceCurve> {
        Ok(VarianceCurve {
            eps_grid: self.eps_grid.clone(),
            variances: self
                .values
                .iter()
                .map(|row| unbiased_variance(row))
                .collect::<Result<_>>()?,
            sample_counts: self.values.iter().map(Vec::len).collect(),
        })
    }

    /// Appends the realizations of `other`, taken at the same grid and `p`.
    pub fn extend(&mut self, other: HSamples) -> Result<()> {
        if other.eps_grid != self.eps_grid || other.p != self.p {
            return Err(Error::invalid("samples", "grid or p differ", "cannot merge"));
        }
        for (row, more) in self.values.iter_mut().zip(other.values) {
            row.extend(more);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceCurve {
    pub eps_grid: Vec<f64>,
    pub variances: Vec<f64>,
    pub sample_counts: Vec<usize>,
}

impl VarianceCurve {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["eps", "variance", "count"]);
        for ((e, v), c) in self.eps_grid.iter().zip(&self.variances).zip(&self.sample_counts) {
            t.push(vec![fmt12(*e), fmt12(*v), c.to_string()]);
        }
        t
    }
}

/// `h` for realizations `range` at every ε. `p_index` only enters the
/// noise streams of the trajectory backend.
pub fn sample_order_parameters(
    protocol: &Protocol,
    eps_grid: &[f64],
    p: f64,
    p_index: usize,
    range: Range<usize>,
) -> Result<HSamples> {
    protocol.validate()?;
    check_grid("eps grid", eps_grid, 0.0, 1.0)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", p, "probability must lie in [0, 1]"));
    }
    let per_row = range.len();
    let flat: Vec<f64> = (0..eps_grid.len() * per_row)
        .into_par_iter()
        .map(|task| {
            let (e, r) = (task / per_row, range.start + task % per_row);
            protocol.order_parameter_at(r, eps_grid[e], p, (e, p_index))
        })
        .collect::<Result<_>>()?;
    Ok(HSamples {
        eps_grid: eps_grid.to_vec(),
        p,
        values: if per_row == 0 {
            vec![Vec::new(); eps_grid.len()]
        } else {
            flat.chunks(per_row).map(<[f64]>::to_vec).collect()
        },
    })
}

/// Var[h] across `protocol.disorder.count` realizations at every ε.
pub fn variance_curve(protocol: &Protocol, eps_grid: &[f64], p: f64) -> Result<(VarianceCurve, HSamples)> {
    let samples = sample_order_parameters(protocol, eps_grid, p, 0, 0..protocol.disorder.count)?;
    Ok((samples.variance_curve()?, samples))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapGrid {
    pub eps_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    /// `variance[i][e]`: row `p_grid[i]`, column `eps_grid[e]`
    pub variance: Vec<Vec<f64>>,
}

impl HeatmapGrid {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["p", "eps", "variance"]);
        for (p, row) in self.p_grid.iter().zip(&self.variance) {
            for (e, v) in self.eps_grid.iter().zip(row) {
                t.push(vec![fmt12(*p), fmt12(*e), fmt12(*v)]);
            }
        }
        t
    }
}

/// Var[h] over the full `(p, ε)` grid with one shared disorder ensemble.
/// Returns the per-row samples for batching.
pub fn heatmap_sweep(protocol: &Protocol, eps_grid: &[f64], p_grid: &[f64]) -> Result<(HeatmapGrid, Vec<HSamples>)> {
    if protocol.backend != EvolutionBackend::Exact {
        return Err(Error::invalid("backend", "trajectory", "heatmap sweeps use the exact channel"));
    }
    check_grid("p grid", p_grid, 0.0, 1.0)?;
    let rows: Vec<HSamples> = p_grid
        .iter()
        .enumerate()
        .map(|(i, &p)| sample_order_parameters(protocol, eps_grid, p, i, 0..protocol.disorder.count))
        .collect::<Result<_>>()?;
    let variance = rows
        .iter()
        .map(|r| r.variance_curve().map(|c| c.variances))
        .collect::<Result<_>>()?;
    Ok((
        HeatmapGrid {
            eps_grid: eps_grid.to_vec(),
            p_grid: p_grid.to_vec(),
            variance,
        },
        rows,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeScanRow {
    pub n: usize,
    pub estimate: PeakEstimate,
}

pub fn size_scan(
    n_list: &[usize],
    protocol: &Protocol,
    eps_grid: &[f64],
    p: f64,
    batch_count: usize,
) -> Result<Vec<SizeScanRow>> {
    if n_list.is_empty() {
        return Err(Error::invalid("n list", "[]", "need at least one size"));
    }
    n_list
        .iter()
        .map(|&n| {
            let (_, samples) = variance_curve(&protocol.with_n(n), eps_grid, p)?;
            Ok(SizeScanRow {
                n,
                estimate: batched_peak_estimate(&samples, batch_count)?,
            })
        })
        .collect()
}

pub fn size_scan_table(rows: &[SizeScanRow]) -> Table {
    let mut t = Table::new(&["n", "peak_mean", "peak_sigma"]);
    for r in rows {
        t.push(vec![r.n.to_string(), fmt12(r.estimate.mean), fmt12(r.estimate.sigma)]);
    }
    t
}
