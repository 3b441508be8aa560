use num_complex::Complex64;

use super::{
    bit_pairs, check_bond, check_capacity, check_qubit, z_sign, GateAngle, QubitState, PURE_CAP,
};
use crate::error::Result;

/// State vector over `2^n` computational basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// `|0⟩^⊗n`.
    pub fn zero(n: usize) -> Result<Self> {
        check_capacity("pure", PURE_CAP, n)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(PureState { n, amplitudes })
    }

    /// Wraps raw amplitudes. The length must be a power of two within the cap;
    /// normalization is the caller's business.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        let n = len.trailing_zeros() as usize;
        if !len.is_power_of_two() {
            return Err(crate::Error::DimensionMismatch {
                what: "amplitude vector length (power of two)",
                expected: 1 << n,
                actual: len,
            });
        }
        check_capacity("pure", PURE_CAP, n)?;
        Ok(PureState { n, amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Pauli Z on qubit `q`: negates amplitudes with bit `q` set.
    pub fn apply_z(&mut self, q: usize) -> Result<()> {
        check_qubit(q, self.n)?;
        for (_, hi) in bit_pairs(self.dim(), q) {
            self.amplitudes[hi] = -self.amplitudes[hi];
        }
        Ok(())
    }

    /// The full coupling layer `Π_q exp(iJ_q Z_q Z_{q+1})` in one diagonal pass.
    pub fn apply_zz_layer(&mut self, couplings: &[GateAngle]) -> Result<()> {
        if couplings.is_empty() {
            return Ok(());
        }
        check_bond(couplings.len() - 1, self.n)?;
        for (index, amp) in self.amplitudes.iter_mut().enumerate() {
            let mut phase = 0.0;
            for (q, j) in couplings.iter().enumerate() {
                // bits equal -> +J, different -> -J
                let differ = (index >> q ^ index >> (q + 1)) & 1;
                phase += if differ == 0 { j.0 } else { -j.0 };
            }
            *amp *= Complex64::from_polar(1.0, phase);
        }
        Ok(())
    }
}

impl QubitState for PureState {
    fn n_qubits(&self) -> usize {
        self.n
    }

    fn apply_kick(&mut self, q: usize, eps: f64) -> Result<()> {
        check_qubit(q, self.n)?;
        let (s, c) = GateAngle::kick(eps).0.sin_cos();
        let is = Complex64::new(0.0, s);
        let stride = 1usize << q;
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x * c + y * is;
                *b = x * is + y * c;
            }
        }
        Ok(())
    }

    fn apply_zz(&mut self, q: usize, coupling: GateAngle) -> Result<()> {
        check_bond(q, self.n)?;
        let same = Complex64::from_polar(1.0, coupling.0);
        let diff = same.conj();
        for (index, amp) in self.amplitudes.iter_mut().enumerate() {
            if (index >> q ^ index >> (q + 1)) & 1 == 0 {
                *amp *= same;
            } else {
                *amp *= diff;
            }
        }
        Ok(())
    }

    fn expectation_z(&self, q: usize) -> Result<f64> {
        check_qubit(q, self.n)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| z_sign(i, q) * a.norm_sqr())
            .sum())
    }

    fn expectation_z_mean(&self) -> f64 {
        // Σ_i P(i) (n − 2·popcount(i)) / n, one pass instead of n.
        let n = self.n as f64;
        let total: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * (n - 2.0 * i.count_ones() as f64))
            .sum();
        total / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_state_and_caps() {
        let s = PureState::zero(1).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            PureState::zero(25),
            Err(Error::Capacity { cap: 24, .. })
        ));
        assert!(PureState::zero(0).is_err());
    }

    #[test]
    fn perfect_kick_is_i_times_x() {
        let mut s = PureState::zero(1).unwrap();
        s.apply_kick(0, 0.0).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((s.expectation_z(0).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn eps_one_kick_is_identity() {
        let mut s = PureState::zero(1).unwrap();
        s.apply_kick(0, 1.0).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert_eq!(s.amplitudes()[1].norm(), 0.0);
    }

    #[test]
    fn repeated_kicks_follow_closed_form() {
        let mut s = PureState::zero(1).unwrap();
        for k in 1..=6 {
            s.apply_kick(0, 0.1).unwrap();
            let expected = (k as f64 * 0.9 * std::f64::consts::PI).cos();
            assert!((s.expectation_z(0).unwrap() - expected).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn z_gate() {
        let mut s = PureState::zero(1).unwrap();
        s.apply_z(0).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));

        let mut one = PureState::from_amplitudes(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        one.apply_z(0).unwrap();
        assert_eq!(one.amplitudes()[1], c(-1.0, 0.0));

        let orig = PureState::from_amplitudes(vec![c(0.6, 0.1), c(-0.2, 0.77)]).unwrap();
        let mut twice = orig.clone();
        twice.apply_z(0).unwrap();
        twice.apply_z(0).unwrap();
        assert_eq!(twice, orig);
        assert!(twice.apply_z(1).is_err());
    }

    #[test]
    fn zz_on_bell_state_is_global_phase() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut s =
            PureState::from_amplitudes(vec![c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)])
                .unwrap();
        let j = std::f64::consts::FRAC_PI_4;
        s.apply_zz(0, GateAngle::new(j).unwrap()).unwrap();
        let expected = Complex64::from_polar(r, j);
        assert!((s.amplitudes()[0] - expected).norm() < 1e-15);
        assert!((s.amplitudes()[3] - expected).norm() < 1e-15);
    }

    #[test]
    fn zz_bond_range() {
        let mut s = PureState::zero(3).unwrap();
        assert!(s.apply_zz(1, GateAngle::new(0.3).unwrap()).is_ok());
        assert!(matches!(
            s.apply_zz(2, GateAngle::new(0.3).unwrap()),
            Err(Error::QubitIndex { index: 2, .. })
        ));
    }

    #[test]
    fn layer_matches_bondwise_application() {
        let mut a = PureState::zero(4).unwrap();
        for q in 0..4 {
            a.apply_kick(q, 0.17 + 0.05 * q as f64).unwrap();
        }
        let mut b = a.clone();
        let js: Vec<_> = [0.9, 1.3, 2.1]
            .iter()
            .map(|&j| GateAngle::new(j).unwrap())
            .collect();
        a.apply_zz_layer(&js).unwrap();
        for (q, &j) in js.iter().enumerate() {
            b.apply_zz(q, j).unwrap();
        }
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn mean_magnetization() {
        let s = PureState::zero(3).unwrap();
        assert_eq!(s.expectation_z_mean(), 1.0);
        // |01⟩: qubit 0 set, qubit 1 clear
        let s = PureState::from_amplitudes(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert_eq!(s.expectation_z_mean(), 0.0);
    }
}
