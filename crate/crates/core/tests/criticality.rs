use dtc_sim::criticality::{
    batched_peak_estimate, estimate_peak, fit_smoothing_spline, heatmap_sweep, linspace, size_scan, variance_curve,
    CouplingUnits, EvolutionBackend, Protocol, Smoothing,
};
use dtc_sim::seed::{SeedDerivation, StreamPurpose};
use dtc_sim::DisorderSpec;
use std::f64::consts::PI;

fn protocol(n: usize, count: usize, steps: usize) -> Protocol {
    Protocol {
        n,
        steps,
        disorder: DisorderSpec::new(count, PI / 4.0, 3.0 * PI / 4.0, 2024).unwrap(),
        backend: EvolutionBackend::Exact,
        units: CouplingUnits::RzzAngle,
    }
}

fn gaussian(stream: &mut dtc_sim::seed::RandomStream) -> f64 {
    let (u, v) = (1.0 - stream.uniform(), stream.uniform());
    (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
}

#[test]
fn heavy_smoothing_gives_the_least_squares_line() {
    let x = linspace(0.0, 1.0, 15).unwrap();
    let y: Vec<f64> = x.iter().map(|v| (7.0 * v).sin() + 0.5 * v).collect();
    let s = fit_smoothing_spline(&x, &y, Smoothing::Fixed(1e12)).unwrap();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let slope = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
        / x.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>();
    for t in [0.0, 0.13, 0.5, 0.77, 1.0] {
        assert!((s.eval(t) - (my + slope * (t - mx))).abs() < 1e-6);
    }
}

#[test]
fn noisy_bumps_are_recovered() {
    let x = linspace(0.0, 0.5, 26).unwrap();
    for seed in 0..20 {
        let mut rng = SeedDerivation::new(seed, StreamPurpose::Noise).stream();
        let center = 0.15 + 0.2 * rng.uniform();
        let y: Vec<f64> = x
            .iter()
            .map(|v| (-(v - center).powi(2) / (2.0 * 0.08f64.powi(2))).exp() + 0.01 * gaussian(&mut rng))
            .collect();
        let p = estimate_peak(&x, &y).unwrap();
        assert!((p.location - center).abs() < 0.01, "seed {seed}: {} vs {center}", p.location);
    }
}

#[test]
fn heatmap_edges() {
    let proto = protocol(5, 6, 12);
    let eps = linspace(0.0, 0.4, 5).unwrap();
    let (grid, rows) = heatmap_sweep(&proto, &eps, &[0.0, 0.05, 0.1]).unwrap();
    for row in &grid.variance {
        assert!(row[0] < 1e-24, "eps = 0 column");
        assert!(row.iter().all(|v| *v >= 0.0));
    }
    let (curve, _) = variance_curve(&proto, &eps, 0.0).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&grid.variance[0]), bits(&curve.variances));
    assert_eq!(rows.len(), 3);
    assert_eq!(grid.to_table().rows().len(), 15);
}

#[test]
fn single_size_scan_is_the_batched_estimate() {
    let proto = protocol(4, 12, 10);
    let eps = linspace(0.0, 0.5, 11).unwrap();
    let rows = size_scan(&[4], &proto, &eps, 0.02, 3).unwrap();
    let (_, samples) = variance_curve(&proto, &eps, 0.02).unwrap();
    assert_eq!(rows[0].estimate, batched_peak_estimate(&samples, 3).unwrap());
    assert!(size_scan(&[13], &proto, &eps, 0.02, 3).is_err());
}

#[test]
fn dephasing_lowers_the_peak_at_every_size() {
    let proto = protocol(6, 80, 50);
    let eps = linspace(0.0, 0.5, 26).unwrap();
    let clean = size_scan(&[6, 8], &proto, &eps, 0.0, 4).unwrap();
    let noisy = size_scan(&[6, 8], &proto, &eps, 0.06, 4).unwrap();
    for (c, d) in clean.iter().zip(&noisy) {
        assert!(
            d.estimate.mean < c.estimate.mean,
            "n = {}: {} !< {}",
            c.n,
            d.estimate.mean,
            c.estimate.mean
        );
    }
}

#[test]
fn batch_statistics() {
    let proto = protocol(4, 10, 10);
    let eps = linspace(0.0, 0.5, 6).unwrap();
    let (_, samples) = variance_curve(&proto, &eps, 0.0).unwrap();
    let one = batched_peak_estimate(&samples, 1).unwrap();
    assert!(one.single_batch);
    assert_eq!(one.sigma, 0.0);
    assert_eq!(one.mean, one.location);
    let five = batched_peak_estimate(&samples, 5).unwrap();
    assert_eq!(five.batch_locations.len(), 5);
    assert!(five.sigma >= 0.0);
    assert!((five.two_sigma.1 - five.mean - 2.0 * five.sigma).abs() < 1e-12);
    assert!(batched_peak_estimate(&samples, 6).is_err());
}
