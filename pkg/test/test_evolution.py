#!/usr/bin/env python
"""
Test script to verify the periodic-box wave solvers and the Strichartz ratio test
"""
import os
import sys
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import trapezoid

# Add the parent directory to the Python path so we can import modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from errors import InadmissibleIndicesError, StepSizeError, ValidationError, WindowError
from evolution import (BoxState, StrichartzIndices, decay_bound, energy, lattice_norm, linear_propagate,
                       measured_order, nonlinear_evolve, random_sparse_data, strichartz_norm, strichartz_ratio_test,
                       wraparound_horizon)
from green_function import TorusGrid, green_wave


def test_linear_flow_matches_green_function():
    L = 41
    state = linear_propagate(BoxState.delta(2, L, "f2"), 1.0)
    u, _ = state.to_physical()
    grid = TorusGrid.for_time(2, 1.0)
    worst = 0.0
    for x in [(0, 0), (1, 0), (2, -1), (3, 3), (-5, 4)]:
        expected = green_wave(x, 1.0, grid).value
        worst = max(worst, abs(u[x[0] % L, x[1] % L] - expected))
    print(f"box vs spectral Green function: {worst:.3g}")
    assert worst < 1e-8


def test_linear_energy_conservation():
    state = BoxState.delta(2, 16, "f2")
    start = energy(state)
    assert abs(start - 1.0) < 1e-14
    for _ in range(1000):
        state = linear_propagate(state, 0.01)
    assert abs(energy(state) - start) < 1e-12 * start


def test_displacement_data_is_even_in_time():
    state = BoxState.delta(2, 16, "f1")
    forward, _ = linear_propagate(state, 0.7).to_physical()
    backward, _ = linear_propagate(state, -0.7).to_physical()
    assert np.allclose(forward, backward, atol=1e-14)


def test_propagation_composes():
    state = BoxState.from_physical(*random_sparse_data(2, 16, 2, seed=5))
    once = linear_propagate(state, 1.0)
    twice = linear_propagate(linear_propagate(state, 0.5), 0.5)
    assert np.allclose(once.u_hat, twice.u_hat, atol=1e-12)
    assert abs(twice.t - 1.0) < 1e-15


def test_klein_gordon_zero_mode():
    # a constant velocity field grows linearly when m = 0
    state = BoxState.from_physical(np.zeros((8, 8)), np.ones((8, 8)))
    u, _ = linear_propagate(state, 2.0).to_physical()
    assert np.allclose(u, 2.0)
    massive = BoxState.from_physical(np.zeros((8, 8)), np.ones((8, 8)), m=1.0)
    u, _ = linear_propagate(massive, 2.0).to_physical()
    assert np.allclose(u, np.sin(2.0))


def test_linear_run_equals_composed_steps():
    state = BoxState.delta(2, 16, "f2")
    traj = nonlinear_evolve(state, 1.0, 3, 20, nonlinearity=False, check=False)
    manual = state
    for _ in range(20):
        manual = linear_propagate(manual, 0.05)
    assert np.array_equal(traj.final.u_hat, manual.u_hat)
    assert len(traj.times) == 21
    assert set(traj.norms) == {2.0, 4.0, np.inf}


def test_nonlinear_validation():
    state = BoxState.delta(2, 16, "f2", scale=0.5)
    with pytest.raises(ValidationError):
        nonlinear_evolve(state, 1.0, 2, 20)
    with pytest.raises(ValidationError):
        nonlinear_evolve(state, 1.0, 3, 0)
    with pytest.raises(ValidationError):
        nonlinear_evolve(state, 1.0, 3, 20, sign=2)
    with pytest.raises(ValidationError):
        nonlinear_evolve(state, 1.0, 3, 20, data_bound=0.1)


def test_richardson_check_rejects_coarse_steps():
    state = BoxState.delta(2, 16, "f2", scale=0.5)
    with pytest.raises(StepSizeError):
        nonlinear_evolve(state, 1.0, 3, 2, tol=1e-14)
    traj = nonlinear_evolve(state, 1.0, 3, 200, tol=1e-3)
    assert traj.richardson is not None
    assert traj.richardson <= 1e-3


def test_hamiltonian_energy_nearly_conserved():
    state = BoxState.delta(2, 16, "f2", scale=0.5)
    traj = nonlinear_evolve(state, 2.0, 3, 400, check=False)
    drift = traj.summary()["energy_drift"]
    print(f"Hamiltonian drift: {drift:.3g}")
    assert drift < 1e-3 * abs(traj.energy[0])


def test_strang_order():
    state = BoxState.delta(2, 16, "f2", scale=0.5)
    estimate = measured_order(state, 1.0, 3, [10, 20, 40])
    print(f"measured order {estimate.order:.3f}")
    assert 1.7 < estimate.order < 2.3
    with pytest.raises(ValidationError):
        measured_order(state, 1.0, 3, [10])


def test_lattice_norms():
    u = np.array([[3.0, -4.0], [0.0, 0.0]])
    assert lattice_norm(u, 2.0) == 5.0
    assert lattice_norm(u, np.inf) == 4.0
    assert lattice_norm(np.zeros((4, 4)), 4.0) == 0.0


def test_strichartz_norm_l2():
    state = BoxState.from_physical(*random_sparse_data(2, 12, 2, seed=1))
    traj = nonlinear_evolve(state, 2.0, 3, 40, nonlinearity=False, record_r=(2.0,), check=False)
    manual, times = [], []
    current = state
    for step in range(41):
        u, _ = current.to_physical()
        manual.append(float(np.sum(u * u)))
        times.append(current.t)
        current = linear_propagate(current, 0.05)
    expected = np.sqrt(trapezoid(manual, times))
    assert abs(strichartz_norm(traj, 2, 2).value - expected) < 1e-10 * expected
    with pytest.raises(ValidationError):
        strichartz_norm(traj, 2, 4)
    with pytest.raises(ValidationError):
        decay_bound(traj, 1.0, 2.0 / 3.0)


def test_zero_field_has_zero_norm():
    zero = np.zeros((8, 8))
    traj = nonlinear_evolve(BoxState.from_physical(zero, zero), 1.0, 3, 20, check=False)
    assert strichartz_norm(traj, 4, 4).value == 0.0


def test_admissibility():
    assert not StrichartzIndices(2, Fraction(10, 3)).admissible
    four = StrichartzIndices(4, 4)
    assert four.admissible
    assert four.data_exponent == Fraction(10, 7)
    assert four.forcing_exponents() is None
    pair = StrichartzIndices(4, 4, 4, 4)
    assert pair.forcing_exponents() == (Fraction(4, 3), Fraction(20, 19))
    with pytest.raises(ValidationError):
        StrichartzIndices(1, 4)
    with pytest.raises(ValidationError):
        StrichartzIndices(4, 4, d=6)


def test_ratio_test_guards():
    samples = random_sparse_data(2, 16, 2)
    with pytest.raises(InadmissibleIndicesError):
        strichartz_ratio_test(samples, StrichartzIndices(2, 4, d=2), 2.0, 16, d=2)
    with pytest.raises(WindowError):
        strichartz_ratio_test(samples, StrichartzIndices(8, np.inf, d=2), 9.0, 16, d=2)


def test_ratio_is_homogeneous():
    indices = StrichartzIndices(8, np.inf, d=2)
    samples = random_sparse_data(2, 16, 2, seed=4)
    base = strichartz_ratio_test(samples, indices, 2.0, 16, d=2)
    scaled = strichartz_ratio_test([3.0 * f for f in samples], indices, 2.0, 16, d=2)
    assert base.admissible
    for a, b in zip(base.ratios, scaled.ratios):
        assert abs(a - b) < 1e-12 * a


def test_random_sparse_data():
    first = random_sparse_data(3, 8, 3, seed=2)
    second = random_sparse_data(3, 8, 3, seed=2)
    assert all(np.array_equal(a, b) for a, b in zip(first, second))
    assert all(0 < np.count_nonzero(f) <= 4 for f in first)
    assert wraparound_horizon(32) == 11.0


@pytest.mark.slow
def test_small_data_cubic_decay():
    eps = 1e-3
    L = 32
    T = wraparound_horizon(L)
    state = BoxState.delta(5, L, "f2", scale=eps)
    traj = nonlinear_evolve(state, T, 3, int(20 * T), tol=1e-4)
    bound = decay_bound(traj, eps, 11.0 / 6.0)
    print(f"sup (1+t)^(11/6) |u|/eps = {bound:.3f}")
    assert bound <= 10.0

    half_eps = nonlinear_evolve(BoxState.delta(5, L, "f2", scale=eps / 2), T, 3, int(20 * T), check=False)
    half_dt = nonlinear_evolve(state, T, 3, 2 * int(20 * T), check=False)
    for label, other in [("eps/2", decay_bound(half_eps, eps / 2, 11.0 / 6.0)),
                         ("dt/2", decay_bound(half_dt, eps, 11.0 / 6.0))]:
        print(f"{label}: {other:.3f}")
        assert abs(other - bound) <= 0.2 * bound


if __name__ == "__main__":
    test_linear_flow_matches_green_function()
    test_linear_energy_conservation()
    test_linear_run_equals_composed_steps()
    test_strang_order()
    test_admissibility()
    print("All evolution tests passed!")
