//! The driven spin chain: Floquet step, disorder sampling, and the exact and
//! stochastic evolutions that produce stroboscopic magnetization traces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{RandomStream, SeedDerivation, StreamPurpose};
use crate::state::{
    check_capacity, DensityMatrix, GateAngle, PureState, QubitState, SectorDensity, SectorStep,
    DENSITY_CAP, PURE_CAP,
};

/// One point of the model: chain length, kick error, bond couplings,
/// dephasing probability and number of periods.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetParams {
    n: usize,
    eps: f64,
    couplings: Vec<GateAngle>,
    p: f64,
    steps: usize,
}

impl FloquetParams {
    pub fn new(eps: f64, couplings: Vec<GateAngle>, p: f64, steps: usize) -> Result<Self> {
        let n = couplings.len() + 1;
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::invalid("eps", eps, "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("p", p, "probability must lie in [0, 1]"));
        }
        if steps == 0 {
            return Err(Error::invalid("steps", steps, "need at least one period"));
        }
        check_capacity("pure", PURE_CAP, n)?;
        Ok(FloquetParams {
            n,
            eps,
            couplings,
            p,
            steps,
        })
    }

    /// Convenience constructor from raw coupling angles.
    pub fn from_angles(eps: f64, couplings: &[f64], p: f64, steps: usize) -> Result<Self> {
        let couplings = couplings
            .iter()
            .map(|&j| GateAngle::new(j))
            .collect::<Result<Vec<_>>>()?;
        Self::new(eps, couplings, p, steps)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn couplings(&self) -> &[GateAngle] {
        &self.couplings
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(eps, self.couplings.clone(), self.p, self.steps)
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.eps, self.couplings.clone(), p, self.steps)
    }
}

/// How bond couplings are drawn for each disorder realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub count: usize,
    pub low: f64,
    pub high: f64,
    pub master_seed: u64,
}

impl DisorderSpec {
    /// `low == high` is accepted and pins every coupling to that value.
    pub fn new(count: usize, low: f64, high: f64, master_seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("realizations", count, "need at least one"));
        }
        if !(low.is_finite() && high.is_finite()) || low > high {
            return Err(Error::invalid(
                "coupling interval",
                format!("[{low}, {high}]"),
                "need finite low <= high",
            ));
        }
        Ok(DisorderSpec {
            count,
            low,
            high,
            master_seed,
        })
    }
}

/// Bond couplings of realization `index` for an `n`-site chain.
///
/// Draws `n − 1` uniforms from a stream that depends only on
/// `(master_seed, index)`.
pub fn sample_disorder(spec: &DisorderSpec, n: usize, index: usize) -> Vec<GateAngle> {
    let mut stream = SeedDerivation::new(spec.master_seed, StreamPurpose::Disorder)
        .realization(index)
        .stream();
    (0..n.saturating_sub(1))
        .map(|_| GateAngle::new(spec.low + (spec.high - spec.low) * stream.uniform()).unwrap())
        .collect()
}

/// Which qubits receive a `Z` after each period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoiseConfiguration {
    n: usize,
    steps: usize,
    flips: Vec<bool>,
}

impl NoiseConfiguration {
    pub fn identity(n: usize, steps: usize) -> Self {
        NoiseConfiguration {
            n,
            steps,
            flips: vec![false; n * steps],
        }
    }

    /// One independent Bernoulli(`p`) per qubit per period.
    pub fn sample(n: usize, steps: usize, p: f64, stream: &mut RandomStream) -> Self {
        let flips = (0..n * steps).map(|_| stream.bernoulli(p)).collect();
        NoiseConfiguration { n, steps, flips }
    }

    pub fn from_flips(n: usize, steps: usize, flips: Vec<bool>) -> Result<Self> {
        if flips.len() != n * steps {
            return Err(Error::DimensionMismatch {
                what: "noise configuration (steps × n)",
                expected: n * steps,
                actual: flips.len(),
            });
        }
        Ok(NoiseConfiguration { n, steps, flips })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_flipped(&self, step: usize, q: usize) -> bool {
        self.flips[step * self.n + q]
    }

    /// Rotation angle `θ_q` (0 or π) for period `step`.
    pub fn angle(&self, step: usize, q: usize) -> f64 {
        if self.is_flipped(step, q) {
            std::f64::consts::PI
        } else {
            0.0
        }
    }

    fn flips_at(&self, step: usize) -> &[bool] {
        &self.flips[step * self.n..(step + 1) * self.n]
    }
}

/// Site-averaged `⟨Z⟩` after periods `1..=K` (the initial value is not stored).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationTrace {
    pub values: Vec<f64>,
}

impl MagnetizationTrace {
    pub fn new(values: Vec<f64>) -> Self {
        MagnetizationTrace { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Mean trace over sampled noise configurations with per-step standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryAverage {
    pub mean: MagnetizationTrace,
    pub std_err: Vec<f64>,
    pub count: usize,
}

fn check_dims<S: QubitState>(state: &S, params: &FloquetParams) -> Result<()> {
    if state.n_qubits() != params.n {
        return Err(Error::DimensionMismatch {
            what: "state qubits vs params.n",
            expected: params.n,
            actual: state.n_qubits(),
        });
    }
    Ok(())
}

/// `U(T)`: kick every qubit, then every bond `q = 0..n−2`.
pub fn floquet_step<S: QubitState>(state: &mut S, params: &FloquetParams) -> Result<()> {
    check_dims(state, params)?;
    for q in 0..params.n {
        state.apply_kick(q, params.eps)?;
    }
    for (q, &j) in params.couplings.iter().enumerate() {
        state.apply_zz(q, j)?;
    }
    Ok(())
}

fn floquet_step_pure(state: &mut PureState, params: &FloquetParams) -> Result<()> {
    for q in 0..params.n {
        state.apply_kick(q, params.eps)?;
    }
    state.apply_zz_layer(&params.couplings)
}

/// Closed-system evolution of `|0…0⟩`.
pub fn evolve_pure(params: &FloquetParams) -> Result<MagnetizationTrace> {
    evolve_trajectory(params, &NoiseConfiguration::identity(params.n, params.steps))
}

/// Exact channel evolution: each period is `U(T)` followed by dephasing with
/// probability `p` on every qubit.
///
/// Dispatches to the cheapest exact representation: the state vector when
/// `p = 0`, the parity-sector block otherwise.
pub fn evolve_exact(params: &FloquetParams) -> Result<MagnetizationTrace> {
    check_capacity("density", DENSITY_CAP, params.n)?;
    if params.p == 0.0 {
        return evolve_pure(params);
    }
    let step = SectorStep::new(params.n, params.eps, &params.couplings, params.p)?;
    let mut sector = SectorDensity::zero(params.n)?;
    let mut values = Vec::with_capacity(params.steps);
    for _ in 0..params.steps {
        sector.apply_step(&step)?;
        values.push(sector.expectation_z_mean());
    }
    Ok(MagnetizationTrace::new(values))
}

/// Reference exact evolution on the full density matrix.
pub fn evolve_density(params: &FloquetParams) -> Result<MagnetizationTrace> {
    let mut rho = DensityMatrix::zero(params.n)?;
    let mut values = Vec::with_capacity(params.steps);
    for _ in 0..params.steps {
        floquet_step(&mut rho, params)?;
        for q in 0..params.n {
            rho.apply_dephasing_exact(q, params.p)?;
        }
        values.push(rho.expectation_z_mean());
    }
    Ok(MagnetizationTrace::new(values))
}

/// One noisy circuit: after period `k`, `Z` on every qubit flagged in `noise`.
pub fn evolve_trajectory(
    params: &FloquetParams,
    noise: &NoiseConfiguration,
) -> Result<MagnetizationTrace> {
    if noise.n != params.n || noise.steps != params.steps {
        return Err(Error::DimensionMismatch {
            what: "noise configuration (steps × n)",
            expected: params.steps * params.n,
            actual: noise.steps * noise.n,
        });
    }
    let mut psi = PureState::zero(params.n)?;
    let mut values = Vec::with_capacity(params.steps);
    for k in 0..params.steps {
        floquet_step_pure(&mut psi, params)?;
        for (q, &flip) in noise.flips_at(k).iter().enumerate() {
            if flip {
                psi.apply_z(q)?;
            }
        }
        values.push(psi.expectation_z_mean());
    }
    Ok(MagnetizationTrace::new(values))
}

/// Averages `count` trajectories; trajectory `i` draws its configuration from
/// `stream.trajectory(i)`.
pub fn trajectory_average(
    params: &FloquetParams,
    count: usize,
    stream: SeedDerivation,
) -> Result<TrajectoryAverage> {
    if count == 0 {
        return Err(Error::invalid("trajectories", count, "need at least one"));
    }
    let traces: Vec<MagnetizationTrace> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.trajectory(i).stream();
            let noise = NoiseConfiguration::sample(params.n, params.steps, params.p, &mut rng);
            evolve_trajectory(params, &noise)
        })
        .collect::<Result<_>>()?;

    let k = params.steps;
    let mut sum = vec![0.0; k];
    for t in &traces {
        for (s, v) in sum.iter_mut().zip(&t.values) {
            *s += v;
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
    let std_err = if count < 2 {
        vec![0.0; k]
    } else {
        let mut ss = vec![0.0; k];
        for t in &traces {
            for ((acc, v), m) in ss.iter_mut().zip(&t.values).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        ss.iter()
            .map(|s| (s / (count - 1) as f64 / count as f64).sqrt())
            .collect()
    };
    Ok(TrajectoryAverage {
        mean: MagnetizationTrace::new(mean),
        std_err,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn spec(seed: u64) -> DisorderSpec {
        DisorderSpec::new(10, PI / 4.0, 3.0 * PI / 4.0, seed).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(FloquetParams::from_angles(1.2, &[1.0], 0.0, 5).is_err());
        assert!(FloquetParams::from_angles(0.1, &[1.0], -0.1, 5).is_err());
        assert!(FloquetParams::from_angles(0.1, &[1.0], 0.1, 0).is_err());
        assert!(FloquetParams::from_angles(0.1, &[f64::NAN], 0.1, 3).is_err());
        let p = FloquetParams::from_angles(0.1, &[1.0, 2.0], 0.1, 3).unwrap();
        assert_eq!(p.n(), 3);
    }

    #[test]
    fn disorder_is_deterministic_and_in_range() {
        let s = DisorderSpec::new(1, PI / 4.0, 3.0 * PI / 4.0, 42).unwrap();
        let a = sample_disorder(&s, 4, 0);
        let b = sample_disorder(&s, 4, 0);
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        for j in &a {
            assert!((PI / 4.0..3.0 * PI / 4.0).contains(&j.value()));
        }
        assert_ne!(a, sample_disorder(&s, 4, 1));
    }

    #[test]
    fn degenerate_interval_pins_couplings() {
        let d = 1e-12;
        let s = DisorderSpec::new(1, PI / 2.0 - d, PI / 2.0 + d, 3).unwrap();
        for j in sample_disorder(&s, 6, 5) {
            assert!((j.value() - PI / 2.0).abs() <= d);
        }
        let s = DisorderSpec::new(1, 1.0, 1.0, 3).unwrap();
        assert!(sample_disorder(&s, 6, 5).iter().all(|j| j.value() == 1.0));
        assert!(DisorderSpec::new(1, 2.0, 1.0, 3).is_err());
        assert!(DisorderSpec::new(0, 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn disorder_mean_matches_uniform() {
        // realizations of a 2-site chain give one draw each
        let s = DisorderSpec::new(1, PI / 4.0, 3.0 * PI / 4.0, 11).unwrap();
        let draws = 100_000;
        let mean: f64 =
            (0..draws).map(|i| sample_disorder(&s, 2, i)[0].value()).sum::<f64>() / draws as f64;
        let width = PI / 2.0;
        let se = width / 12f64.sqrt() / (draws as f64).sqrt();
        assert!((mean - PI / 2.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn perfect_flip_single_and_double_step() {
        let js = sample_disorder(&spec(1), 5, 0);
        let params = FloquetParams::new(0.0, js, 0.0, 2).unwrap();
        let trace = evolve_pure(&params).unwrap();
        assert!((trace.values[0] + 1.0).abs() < 1e-12);
        assert!((trace.values[1] - 1.0).abs() < 1e-12);
    }

    /// Dense `4×4` oracle for one step on two qubits.
    #[test]
    fn two_qubit_step_matches_dense_product() {
        let (eps, j) = (0.3, 0.9);
        let phi = PI / 2.0 * (1.0 - eps);
        let (c, s) = (Complex64::new(phi.cos(), 0.0), Complex64::new(0.0, phi.sin()));
        let kick = [[c, s], [s, c]];
        // kron(kick_1, kick_0) with index = b1*2 + b0
        let mut u = [[Complex64::new(0.0, 0.0); 4]; 4];
        for r in 0..4 {
            for col in 0..4 {
                let k1 = kick[r >> 1][col >> 1];
                let k0 = kick[r & 1][col & 1];
                let zz = if (r & 1) == (r >> 1) { j } else { -j };
                u[r][col] = Complex64::from_polar(1.0, zz) * k1 * k0;
            }
        }
        let expected: Vec<Complex64> = (0..4).map(|r| u[r][0]).collect();

        let params = FloquetParams::from_angles(eps, &[j], 0.0, 1).unwrap();
        let mut psi = PureState::zero(2).unwrap();
        floquet_step(&mut psi, &params).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(&expected) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn step_rejects_wrong_dimension() {
        let params = FloquetParams::from_angles(0.1, &[1.0, 1.0], 0.0, 1).unwrap();
        let mut psi = PureState::zero(2).unwrap();
        assert!(floquet_step(&mut psi, &params).is_err());
    }

    /// Single qubit Bloch recursion: the kick rotates (y, z) by 2φ about x,
    /// dephasing scales (x, y) by 1 − 2p.
    #[test]
    fn single_qubit_matches_bloch_recursion() {
        let (eps, p, k) = (0.1, 0.2, 5);
        let phi = PI / 2.0 * (1.0 - eps);
        let (mut x, mut y, mut z) = (0.0f64, 0.0f64, 1.0f64);
        let mut oracle = Vec::new();
        for _ in 0..k {
            // exp(iφX) ρ exp(-iφX) maps Z → cos2φ Z − sin2φ Y, Y → cos2φ Y + sin2φ Z
            let (s2, c2) = (2.0 * phi).sin_cos();
            let (ny, nz) = (c2 * y - s2 * z, s2 * y + c2 * z);
            y = ny;
            z = nz;
            x *= 1.0 - 2.0 * p;
            y *= 1.0 - 2.0 * p;
            oracle.push(z);
        }
        let _ = x;
        let params = FloquetParams::from_angles(eps, &[], p, k).unwrap();
        let exact = evolve_exact(&params).unwrap();
        let reference = evolve_density(&params).unwrap();
        for ((e, r), o) in exact.values.iter().zip(&reference.values).zip(&oracle) {
            assert!((e - o).abs() < 1e-12);
            assert!((r - o).abs() < 1e-12);
        }
    }

    #[test]
    fn sector_backend_matches_full_density() {
        for n in 2..=8 {
            let s = DisorderSpec::new(1, PI / 4.0, 3.0 * PI / 4.0, 100 + n as u64).unwrap();
            let js = sample_disorder(&s, n, 0);
            for &(eps, p) in &[(0.07, 0.03), (0.3, 0.1), (0.45, 0.5), (0.2, 1.0), (0.7, 0.2), (1.0, 0.05)] {
                let params = FloquetParams::new(eps, js.clone(), p, 12).unwrap();
                let fast = evolve_exact(&params).unwrap();
                let full = evolve_density(&params).unwrap();
                for (a, b) in fast.values.iter().zip(&full.values) {
                    assert!((a - b).abs() < 1e-10, "n={n} eps={eps} p={p}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn exact_at_zero_noise_equals_pure() {
        let js = sample_disorder(&spec(5), 6, 2);
        let params = FloquetParams::new(0.2, js, 0.0, 20).unwrap();
        let a = evolve_density(&params).unwrap();
        let b = evolve_pure(&params).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-10);
        }
        assert_eq!(evolve_exact(&params).unwrap(), b);
    }

    #[test]
    fn exact_capacity() {
        let params = FloquetParams::from_angles(0.1, &[1.0; 12], 0.1, 2).unwrap();
        assert!(matches!(
            evolve_exact(&params),
            Err(Error::Capacity { cap: 12, .. })
        ));
    }

    #[test]
    fn trajectory_identity_noise_equals_closed_system() {
        let js = sample_disorder(&spec(9), 5, 0);
        let params = FloquetParams::new(0.15, js, 0.0, 10).unwrap();
        let noisy = evolve_trajectory(&params, &NoiseConfiguration::identity(5, 10)).unwrap();
        assert_eq!(noisy, evolve_exact(&params).unwrap());

        let bad = NoiseConfiguration::identity(4, 10);
        assert!(evolve_trajectory(&params, &bad).is_err());
    }

    #[test]
    fn trajectory_perfect_flip_ignores_noise() {
        let js = sample_disorder(&spec(3), 5, 0);
        let params = FloquetParams::new(0.0, js, 0.7, 8).unwrap();
        let mut rng = SeedDerivation::new(1, StreamPurpose::Noise).stream();
        for _ in 0..5 {
            let noise = NoiseConfiguration::sample(5, 8, 0.7, &mut rng);
            let t = evolve_trajectory(&params, &noise).unwrap();
            for (k, v) in t.values.iter().enumerate() {
                let expected = if k % 2 == 0 { -1.0 } else { 1.0 };
                assert!((v - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trajectory_average_degenerate_cases() {
        let js = sample_disorder(&spec(4), 4, 0);
        let params = FloquetParams::new(0.1, js, 0.0, 6).unwrap();
        let base = SeedDerivation::new(2, StreamPurpose::Noise);
        let one = trajectory_average(&params, 1, base).unwrap();
        assert_eq!(one.mean, evolve_pure(&params).unwrap());
        assert!(one.std_err.iter().all(|&e| e == 0.0));
        let many = trajectory_average(&params, 50, base).unwrap();
        assert!(many.std_err.iter().all(|&e| e < 1e-14));
        assert!(trajectory_average(&params, 0, base).is_err());
    }

    #[test]
    fn noise_angles() {
        let cfg = NoiseConfiguration::from_flips(2, 2, vec![true, false, false, true]).unwrap();
        assert_eq!(cfg.angle(0, 0), PI);
        assert_eq!(cfg.angle(0, 1), 0.0);
        assert_eq!(cfg.angle(1, 1), PI);
        assert!(NoiseConfiguration::from_flips(2, 2, vec![true]).is_err());
    }
}
