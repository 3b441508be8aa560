//! State representations and the gate, channel and measurement kernels.
//!
//! Basis convention: bit `q` of a basis index holds the computational value of
//! qubit `q`. `Z_q` has eigenvalue `+1` when that bit is 0.

mod density;
mod kick;
mod pure;
mod sector;

pub use density::DensityMatrix;
pub use pure::PureState;
pub use sector::{SectorDensity, SectorStep};

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Largest chain simulated as a state vector.
pub const PURE_CAP: usize = 24;
/// Largest chain simulated as a density matrix.
pub const DENSITY_CAP: usize = 12;

/// A rotation angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GateAngle(f64);

impl GateAngle {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(GateAngle(value))
        } else {
            Err(Error::invalid("angle", value, "must be finite"))
        }
    }

    /// Kick angle `(π/2)(1 − ε)`.
    pub fn kick(eps: f64) -> Self {
        GateAngle(FRAC_PI_2 * (1.0 - eps))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<GateAngle> for f64 {
    fn from(a: GateAngle) -> f64 {
        a.0
    }
}

/// Which representation a fresh `|0…0⟩` state should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Pure,
    Density,
}

#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(PureState),
    Density(DensityMatrix),
}

pub fn new_zero_state(n: usize, backend: Backend) -> Result<State> {
    match backend {
        Backend::Pure => PureState::zero(n).map(State::Pure),
        Backend::Density => DensityMatrix::zero(n).map(State::Density),
    }
}

/// Operations shared by every backend that can run the Floquet circuit.
pub trait QubitState {
    fn n_qubits(&self) -> usize;

    /// Applies `exp(iφX_q)` with `φ = (π/2)(1 − ε)`.
    fn apply_kick(&mut self, q: usize, eps: f64) -> Result<()>;

    /// Applies `exp(iJ Z_q Z_{q+1})`.
    fn apply_zz(&mut self, q: usize, coupling: GateAngle) -> Result<()>;

    fn expectation_z(&self, q: usize) -> Result<f64>;

    fn expectation_z_mean(&self) -> f64 {
        let n = self.n_qubits();
        let total: f64 = (0..n)
            .map(|q| self.expectation_z(q).expect("index in range"))
            .sum();
        total / n as f64
    }
}

pub(crate) fn check_capacity(backend: &'static str, cap: usize, n: usize) -> Result<()> {
    if n == 0 || n > cap {
        return Err(Error::Capacity { backend, cap, n });
    }
    Ok(())
}

pub(crate) fn check_qubit(q: usize, n: usize) -> Result<()> {
    if q >= n {
        return Err(Error::QubitIndex {
            index: q,
            n,
            context: "",
        });
    }
    Ok(())
}

pub(crate) fn check_bond(q: usize, n: usize) -> Result<()> {
    if q + 1 >= n {
        return Err(Error::QubitIndex {
            index: q,
            n,
            context: " (bond q needs q + 1 < n, open boundary)",
        });
    }
    Ok(())
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", p, "probability must lie in [0, 1]"));
    }
    Ok(())
}

/// `+1` when bit `q` of `index` is 0, `-1` otherwise.
#[inline]
pub(crate) fn z_sign(index: usize, q: usize) -> f64 {
    if index >> q & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Iterates over the pairs `(i, i | 1 << q)` with bit `q` of `i` clear.
#[inline]
pub(crate) fn bit_pairs(dim: usize, q: usize) -> impl Iterator<Item = (usize, usize)> {
    let stride = 1usize << q;
    (0..dim)
        .step_by(2 * stride)
        .flat_map(move |base| (base..base + stride).map(move |i| (i, i + stride)))
}
