#!/usr/bin/env python
"""
Test script to verify the oscillatory integral engine
"""
import os
import sys

import numpy as np
import pytest

# Add the parent directory to the Python path so we can import modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from errors import CostGuardError, ValidationError
from osc_engine import (AmplitudeSpec, CombinedAmplitude, OscSample, PerturbationSpec, critical_points, eval_J,
                        grid_sup, quad_factor_eval, sample_perturbation, split_blocks, uniform_stability_probe)
from polynomial import PolynomialPhase, build_phase_Pm, cube, d4_core, fresnel


def test_fresnel_gaussian_exact():
    sigma = 1.0
    amp = AmplitudeSpec.gaussian(1, sigma)
    for t in [1.0, 10.0, 40.0]:
        sample = eval_J(t, fresnel(1), amp)
        exact = np.sqrt(np.pi / (1.0 / sigma ** 2 - 1j * t))
        print(f"t={t}: {sample.value} vs {exact}")
        assert abs(sample.value - exact) < 1e-8 * abs(exact)


def test_zero_phase_is_amplitude_mass():
    sigma = 0.5
    sample = eval_J(100.0, PolynomialPhase.zero(1), AmplitudeSpec.gaussian(1, sigma))
    assert abs(sample.value - sigma * np.sqrt(np.pi)) < 1e-9


def test_negative_time_conjugates():
    amp = AmplitudeSpec.uniform(2)
    forward = eval_J(30.0, d4_core(), amp)
    backward = eval_J(-30.0, d4_core(), amp)
    assert backward.value == forward.value.conjugate()
    assert backward.t == -30.0


def test_linear_in_amplitude():
    phase = d4_core()
    product = AmplitudeSpec.uniform(2, 0.5, "product-bump")
    radial = AmplitudeSpec.uniform(2, 0.5, "radial-bump")
    nodes = (80, 80)
    combined = CombinedAmplitude(((2.0, product), (3.0, radial)))
    lhs = eval_J(20.0, phase, combined, nodes=nodes).value
    rhs = 2.0 * eval_J(20.0, phase, product, nodes=nodes).value + 3.0 * eval_J(20.0, phase, radial, nodes=nodes).value
    assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_nested_matches_dense():
    phase = PolynomialPhase.from_expression("z1^3 + z1*z2^2 + z3^2", 3)
    amp = AmplitudeSpec.uniform(3)
    nodes = (40, 40, 40)
    dense = eval_J(20.0, phase, amp, nodes=nodes)
    nested = eval_J(20.0, phase, amp, nodes=nodes, inner_blocks={1: 0})
    assert nested.method == "nested"
    assert abs(dense.value - nested.value) < 1e-12
    with pytest.raises(ValidationError):
        split_blocks(PolynomialPhase.from_expression("z1*z2*z3", 3), {1: 0})


def test_quad_factor_eval():
    phase = fresnel(2)
    amp = AmplitudeSpec.gaussian(2, 1.0)
    factorized = quad_factor_eval(5.0, phase, [[0], [1]], amp)
    single = eval_J(5.0, fresnel(1), AmplitudeSpec.gaussian(1, 1.0))
    assert factorized.method == "factorized"
    assert abs(factorized.value - single.value ** 2) < 1e-12
    with pytest.raises(ValidationError):
        quad_factor_eval(5.0, d4_core(), [[0], [1]], AmplitudeSpec.uniform(2))


def test_cost_guards():
    with pytest.raises(CostGuardError):
        eval_J(10.0, build_phase_Pm(4, 5), AmplitudeSpec.uniform(5))
    with pytest.raises(CostGuardError):
        eval_J(500.0, PolynomialPhase.zero(4), AmplitudeSpec.uniform(4))
    with pytest.raises(CostGuardError):
        eval_J(1000.0, d4_core(), AmplitudeSpec.uniform(2), max_points=1e3)


def test_amplitude_validation():
    with pytest.raises(ValidationError):
        AmplitudeSpec("triangle", (0.5,))
    with pytest.raises(ValidationError):
        AmplitudeSpec.uniform(2, radius=0.0)
    with pytest.raises(ValidationError):
        eval_J(1.0, d4_core(), AmplitudeSpec.uniform(3))


def test_csv_row():
    sample = OscSample(2.0, complex(0.5, -0.25), 1e-12, (10,))
    assert OscSample.csv_header() == ["phase_id", "t", "re", "im", "errEst"]
    row = sample.csv_row("D4")
    assert row[0] == "D4"
    assert float(row[3]) == -0.25


def test_perturbation_sampling():
    spec = PerturbationSpec(2, r=1.0, eps=1e-3, degree=4, seed=3)
    first = sample_perturbation(spec)
    assert first == sample_perturbation(spec)
    for seed in range(5):
        p = sample_perturbation(PerturbationSpec(2, eps=1e-3, seed=seed))
        assert grid_sup(p, 1.0, 101) < 1e-3
    assert sample_perturbation(PerturbationSpec(2, eps=0.0)).is_zero()
    with pytest.raises(ValidationError):
        PerturbationSpec(2, eps=-1.0)


def test_critical_points():
    points = critical_points(fresnel(2), 0.5)
    assert points.shape == (1, 2)
    assert np.allclose(points[0], 0.0)


def test_uniform_stability():
    times = np.geomspace(10.0, 1000.0, 8)
    report = uniform_stability_probe(cube(), PerturbationSpec(1, eps=0.0), times, trials=1)
    assert report.worst.key == report.unperturbed.key
    assert not report.exceeds(0.0)
    with pytest.raises(CostGuardError):
        uniform_stability_probe(PolynomialPhase.zero(4), PerturbationSpec(4), times, trials=1)


def test_stability_records_skipped_seeds():
    # perturbed cubes keep their critical points at distance ~ sqrt(eps), far outside this radius
    times = np.geomspace(10.0, 1000.0, 8)
    report = uniform_stability_probe(cube(), PerturbationSpec(1, eps=1e-3, seed=7), times, trials=3,
                                     search_radius=1e-5)
    assert report.trials == ()
    assert report.skipped == (7, 8, 9)
    assert report.sampled == 3
    assert report.worst.key == report.unperturbed.key
    payload = report.to_json()
    assert payload["skipped"] == [7, 8, 9]
    assert payload["sampled"] == 3


@pytest.mark.slow
def test_d4_core_decay():
    from decay_analysis import DecaySeries, fit_decay
    times = np.geomspace(10.0, 2000.0, 12)
    amp = AmplitudeSpec.uniform(2)
    mags = [abs(eval_J(t, d4_core(), amp).value) for t in times]
    fit = fit_decay(DecaySeries(times, np.array(mags), "D4"))
    print(f"D4 core: beta={fit.beta}, p={fit.p}")
    assert abs(fit.beta + 2.0 / 3.0) < 0.05


if __name__ == "__main__":
    test_fresnel_gaussian_exact()
    test_negative_time_conjugates()
    test_nested_matches_dense()
    test_perturbation_sampling()
    print("All oscillatory integral tests passed!")
