use num_complex::Complex64;

use super::{
    bit_pairs, check_bond, check_capacity, check_probability, check_qubit, z_sign, GateAngle,
    QubitState, DENSITY_CAP,
};
use crate::error::{Error, Result};

/// Full `2^n × 2^n` density operator, row-major.
///
/// This is the reference exact backend. Sweeps use [`super::SectorDensity`],
/// which evolves the same channel on a quarter of the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero(n: usize) -> Result<Self> {
        check_capacity("density", DENSITY_CAP, n)?;
        let dim = 1usize << n;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        entries[0] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { n, dim, entries })
    }

    /// Wraps a row-major `dim × dim` matrix with `dim` a power of two.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if !dim.is_power_of_two() || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                what: "density matrix entries",
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        let n = dim.trailing_zeros() as usize;
        check_capacity("density", DENSITY_CAP, n)?;
        Ok(DensityMatrix { n, dim, entries })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &super::PureState) -> Result<Self> {
        let amps = state.amplitudes();
        let dim = amps.len();
        let entries = amps
            .iter()
            .flat_map(|a| amps.iter().map(move |b| a * b.conj()))
            .collect();
        Self::from_entries(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Dephasing channel `(1 − p)ρ + p Z_q ρ Z_q` on qubit `q`.
    ///
    /// `Z_q ρ Z_q` flips the sign of exactly the entries whose row and column
    /// disagree on bit `q`, so the channel scales those by `1 − 2p` and leaves
    /// everything else (the diagonal included) alone.
    pub fn apply_dephasing_exact(&mut self, q: usize, p: f64) -> Result<()> {
        check_qubit(q, self.n)?;
        check_probability(p)?;
        let damp = 1.0 - 2.0 * p;
        let dim = self.dim;
        for (row, row_entries) in self.entries.chunks_exact_mut(dim).enumerate() {
            let row_bit = row >> q & 1;
            for (col, e) in row_entries.iter_mut().enumerate() {
                if col >> q & 1 != row_bit {
                    *e *= damp;
                }
            }
        }
        Ok(())
    }
}

impl QubitState for DensityMatrix {
    fn n_qubits(&self) -> usize {
        self.n
    }

    /// `ρ → U ρ U†` with `U = [[c, is], [is, c]]` on qubit `q`.
    fn apply_kick(&mut self, q: usize, eps: f64) -> Result<()> {
        check_qubit(q, self.n)?;
        let (s, c) = GateAngle::kick(eps).0.sin_cos();
        let is = Complex64::new(0.0, s);
        let dim = self.dim;

        // U on row pairs
        for (r0, r1) in bit_pairs(dim, q) {
            let (head, tail) = self.entries.split_at_mut(r1 * dim);
            let row0 = &mut head[r0 * dim..(r0 + 1) * dim];
            let row1 = &mut tail[..dim];
            for (a, b) in row0.iter_mut().zip(row1.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x * c + y * is;
                *b = x * is + y * c;
            }
        }
        // U† on column pairs
        let stride = 1usize << q;
        for row in self.entries.chunks_exact_mut(dim) {
            for block in row.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = x * c - y * is;
                    *b = y * c - x * is;
                }
            }
        }
        Ok(())
    }

    fn apply_zz(&mut self, q: usize, coupling: GateAngle) -> Result<()> {
        check_bond(q, self.n)?;
        let dim = self.dim;
        // e^{iJ(zz(r) − zz(c))}: 1 when parities agree, e^{±2iJ} otherwise.
        let parity = |i: usize| (i >> q ^ i >> (q + 1)) & 1;
        let up = Complex64::from_polar(1.0, 2.0 * coupling.0);
        let down = up.conj();
        for (row, row_entries) in self.entries.chunks_exact_mut(dim).enumerate() {
            let pr = parity(row);
            for (col, e) in row_entries.iter_mut().enumerate() {
                match (pr, parity(col)) {
                    (0, 1) => *e *= up,
                    (1, 0) => *e *= down,
                    _ => {}
                }
            }
        }
        Ok(())
    }

    fn expectation_z(&self, q: usize) -> Result<f64> {
        check_qubit(q, self.n)?;
        Ok((0..self.dim).map(|i| z_sign(i, q) * self.get(i, i).re).sum())
    }

    fn expectation_z_mean(&self) -> f64 {
        let n = self.n as f64;
        let total: f64 = (0..self.dim)
            .map(|i| self.get(i, i).re * (n - 2.0 * i.count_ones() as f64))
            .sum();
        total / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density() {
        let rho = DensityMatrix::zero(2).unwrap();
        assert_eq!(rho.dim(), 4);
        for r in 0..4 {
            for c in 0..4 {
                let expected = if (r, c) == (0, 0) { 1.0 } else { 0.0 };
                assert_eq!(rho.get(r, c), Complex64::new(expected, 0.0));
            }
        }
        assert!(matches!(
            DensityMatrix::zero(13),
            Err(Error::Capacity { cap: 12, .. })
        ));
    }

    #[test]
    fn dephasing_limits() {
        let mut psi = super::super::PureState::zero(2).unwrap();
        psi.apply_kick(0, 0.3).unwrap();
        psi.apply_kick(1, 0.6).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();

        let mut same = rho.clone();
        same.apply_dephasing_exact(1, 0.0).unwrap();
        assert_eq!(same, rho);

        let mut full = rho.clone();
        full.apply_dephasing_exact(1, 0.5).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                if (r ^ c) >> 1 & 1 == 1 {
                    assert_eq!(full.get(r, c).norm(), 0.0);
                } else {
                    assert_eq!(full.get(r, c), rho.get(r, c));
                }
            }
        }
        assert!(full.apply_dephasing_exact(0, 1.5).is_err());
        assert!(full.apply_dephasing_exact(0, -0.1).is_err());
        assert!(full.apply_dephasing_exact(2, 0.1).is_err());
    }

    #[test]
    fn kick_matches_pure() {
        let mut psi = super::super::PureState::zero(3).unwrap();
        let mut rho = DensityMatrix::zero(3).unwrap();
        for (q, eps) in [(0, 0.1), (2, 0.35), (1, 0.8)] {
            psi.apply_kick(q, eps).unwrap();
            rho.apply_kick(q, eps).unwrap();
        }
        psi.apply_zz(1, GateAngle::new(1.1).unwrap()).unwrap();
        rho.apply_zz(1, GateAngle::new(1.1).unwrap()).unwrap();
        let expected = DensityMatrix::from_pure(&psi).unwrap();
        for (a, b) in rho.entries().iter().zip(expected.entries()) {
            assert!((a - b).norm() < 1e-14);
        }
        for q in 0..3 {
            let d = rho.expectation_z(q).unwrap() - psi.expectation_z(q).unwrap();
            assert!(d.abs() < 1e-14);
        }
    }
}
