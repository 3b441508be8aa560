//! Fourier analysis of stroboscopic traces.
//!
//! For a trace `m_1 … m_K` the bin at grid frequency `j/K` (units of the
//! drive frequency) is
//!
//! ```text
//! X_j = (1/K) Σ_{k=1..K} m_k e^{−2πi jk/K}
//! ```
//!
//! so a perfect period-doubled trace `(−1)^k` has `|X_{K/2}| = 1`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::MagnetizationTrace;
use crate::table::{fmt12, Table};

/// One-sided amplitude spectrum, bins `j = 0..=⌊K/2⌋`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// `j/K`, in units of the drive frequency
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

/// Height of the spectral peak at half the drive frequency.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct OrderParameter(f64);

impl OrderParameter {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<OrderParameter> for f64 {
    fn from(h: OrderParameter) -> f64 {
        h.0
    }
}

/// `e^{−2πi m/K}` with the quarter-turn points exact, so the `K/2` bin is
/// the plain alternating sum.
fn twiddle(m: usize, k: usize) -> (f64, f64) {
    let m = m % k;
    if m == 0 {
        (1.0, 0.0)
    } else if 2 * m == k {
        (-1.0, 0.0)
    } else if 4 * m == k {
        (0.0, -1.0)
    } else if 4 * m == 3 * k {
        (0.0, 1.0)
    } else {
        let (s, c) = (TAU * m as f64 / k as f64).sin_cos();
        (c, -s)
    }
}

/// `|X_j|` by direct summation.
fn bin(values: &[f64], j: usize) -> f64 {
    let k_len = values.len();
    let (mut re, mut im) = (0.0, 0.0);
    for (i, &m) in values.iter().enumerate() {
        let (c, s) = twiddle(j * (i + 1), k_len);
        re += m * c;
        im += m * s;
    }
    re.hypot(im) / k_len as f64
}

pub fn dft_spectrum(trace: &MagnetizationTrace) -> Result<Spectrum> {
    let k = trace.len();
    if k < 2 {
        return Err(Error::invalid("K", k, "spectrum needs at least 2 periods"));
    }
    let bins = 0..=k / 2;
    Ok(Spectrum {
        frequencies: bins.clone().map(|j| j as f64 / k as f64).collect(),
        amplitudes: bins.map(|j| bin(&trace.values, j)).collect(),
    })
}

/// `h = |(1/K) Σ (−1)^k m_k|`, the `K/2` bin of [`dft_spectrum`].
pub fn order_parameter(trace: &MagnetizationTrace) -> Result<OrderParameter> {
    let k = trace.len();
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::invalid(
            "K",
            k,
            "order parameter needs an even number of periods K >= 2 so that half the drive frequency is a DFT bin",
        ));
    }
    Ok(OrderParameter(bin(&trace.values, k / 2)))
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn to_table(&self) -> Table {
        let mut table = Table::new(&["freq_over_omega0", "amplitude"]);
        for (f, a) in self.frequencies.iter().zip(&self.amplitudes) {
            table.push(vec![fmt12(*f), fmt12(*a)]);
        }
        table
    }
}
