"""Smoke test for the dtc_sim_py extension module."""

import math

import dtc_sim_py as dtc


def main():
    couplings = dtc.sample_disorder(6, 0, seed=3)
    assert len(couplings) == 5
    assert all(math.pi / 4 <= j <= 3 * math.pi / 4 for j in couplings)

    # a perfect flip alternates regardless of noise
    flip = dtc.FloquetParams(0.0, couplings, p=0.3, steps=20)
    m = dtc.evolve_exact(flip)
    assert all(abs(v - (-1) ** k) < 1e-10 for k, v in enumerate(m, start=1))
    assert abs(dtc.order_parameter(m) - 1.0) < 1e-10

    params = dtc.FloquetParams(0.1, couplings, p=0.05, steps=20)
    exact = dtc.evolve_exact(params)
    reference = dtc.evolve_density(params)
    assert max(abs(a - b) for a, b in zip(exact, reference)) < 1e-10
    mean, se = dtc.trajectory_average(params, 400, seed=1)
    assert all(abs(a - b) <= 5 * s + 1e-12 for a, b, s in zip(mean, exact, se))

    freqs, amps = dtc.dft_spectrum(exact)
    assert freqs[-1] == 0.5 and len(amps) == 11

    proto = dtc.Protocol(6, 40, steps=20, seed=5)
    grid = [0.05 * i for i in range(11)]
    variances = proto.variance_curve(grid, 0.0)
    assert variances[0] < 1e-20 and all(v >= 0 for v in variances)
    peak = proto.peak(grid, 0.0, batches=4)
    assert 0.0 <= peak.location <= 0.5 and peak.sigma >= 0
    print(f"ok: h={dtc.order_parameter(exact):.4f} peak={peak.mean:.3f}+-{peak.sigma:.3f}")

    try:
        dtc.FloquetParams(0.1, couplings, p=1.5)
    except ValueError as e:
        assert "p" in str(e)
    else:
        raise AssertionError("p=1.5 accepted")


if __name__ == "__main__":
    main()
