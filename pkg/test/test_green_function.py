#!/usr/bin/env python
"""
Test script to verify the lattice fundamental solution evaluators
"""
import os
import sys

import numpy as np
import pytest

# Add the parent directory to the Python path so we can import modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from errors import CostGuardError, ValidationError, WindowError
from green_function import (GreenSample, TorusGrid, box_oracle, directed_integral_I, green_kg, green_wave,
                            light_cone_excess, parseval_check, sup_over_window, sup_samples)


def test_zero_time_is_exact_zero():
    grid = TorusGrid.for_time(2, 0.0)
    sample = green_wave((3, 4), 0.0, grid)
    assert sample.value == 0.0
    assert sample.method == "exact"


def test_small_time_at_origin():
    grid = TorusGrid.for_time(2, 0.01)
    sample = green_wave((0, 0), 0.01, grid)
    print(f"G(0, 0.01) = {sample.value}")
    assert abs(sample.value - 0.01) < 1e-5


def test_against_box_oracle():
    grid = TorusGrid.for_time(2, 1.0)
    spectral = green_wave((1, 0), 1.0, grid).value
    oracle = box_oracle((1, 0), 1.0, 2)
    print(f"spectral {spectral} vs oracle {oracle}")
    assert abs(spectral - oracle) < 1e-6


def test_klein_gordon_against_box_oracle():
    grid = TorusGrid.for_time(3, 1.0)
    spectral = green_kg((1, 1, 0), 1.0, grid, m=1.0).value
    oracle = box_oracle((1, 1, 0), 1.0, 3, m=1.0, radius=6)
    assert abs(spectral - oracle) < 1e-6
    with pytest.raises(ValidationError):
        green_kg((0, 0, 0), 1.0, grid, m=0.0)


def test_grid_doubling_converges():
    c_grid = 4.0
    for d, points in [(2, [(0, 0), (1, 0), (2, 1), (3, 3)]), (3, [(0, 0, 0), (1, 1, 0), (2, 1, 0)])]:
        N = 32
        t = N / (4 * c_grid)
        coarse, fine = TorusGrid(d, N), TorusGrid(d, 2 * N)
        for x in points:
            diff = abs(green_wave(x, t, coarse, c_grid=c_grid).value - green_wave(x, t, fine, c_grid=c_grid).value)
            print(f"d={d} x={x}: |G_N - G_2N| = {diff:.3g}")
            assert diff <= 1e-8


def test_odd_in_time():
    grid = TorusGrid.for_time(2, 3.0)
    forward = green_wave((2, 1), 3.0, grid).value
    backward = green_wave((2, 1), -3.0, grid).value
    assert backward == -forward


def test_orbit_values_are_identical():
    grid = TorusGrid.for_time(3, 2.0)
    reference = green_wave((3, -1, 0), 2.0, grid).value
    for x in [(1, 3, 0), (0, -3, 1), (-1, 0, -3)]:
        assert green_wave(x, 2.0, grid).value == reference


def test_diagonal_uses_orbit_reduction():
    grid = TorusGrid.for_time(3, 2.0)
    diagonal = green_wave((1, 1, 1), 2.0, grid)
    assert diagonal.method == "diagonal-orbit"
    assert abs(diagonal.value - box_oracle((1, 1, 1), 2.0, 3, radius=8)) < 1e-6


def test_window_and_lattice_checks():
    grid = TorusGrid(2, 8)
    with pytest.raises(WindowError):
        green_wave((9, 0), 1.0, grid)
    with pytest.raises(ValidationError):
        green_wave((1.5, 0), 1.0, grid)
    with pytest.raises(ValidationError):
        TorusGrid(2, 9)


def test_memory_guard():
    grid = TorusGrid(5, 64)
    with pytest.raises(CostGuardError):
        green_wave((1, 0, 0, 0, 0), 1.0, grid)


def test_parseval_identity():
    spatial, spectral = parseval_check(3.0, TorusGrid(2, 16))
    print(f"Parseval: {spatial} vs {spectral}")
    assert abs(spatial - spectral) <= 1e-8 * spectral


def test_light_cone_excess_is_small():
    excess = light_cone_excess(2.0, TorusGrid(2, 16))
    assert excess < 1e-5


def test_sup_over_window():
    grid = TorusGrid.for_time(2, 4.0)
    result = sup_over_window(4.0, grid.N // 2, grid)
    assert result.value > 0.0
    assert result.x[0] >= result.x[1] >= 0
    assert abs(result.value - abs(green_wave(result.x, 4.0, grid).value)) < 1e-12
    assert sup_over_window(0.0, 4, grid).value == 0.0
    with pytest.raises(ValidationError):
        sup_over_window(4.0, 3, grid)


def test_directed_integral_symmetry():
    grid = TorusGrid(2, 16)
    a = directed_integral_I((0.3, -0.1), 2.0, grid, m=1.0)
    b = directed_integral_I((-0.1, 0.3), 2.0, grid, m=1.0)
    assert a.value == b.value
    rest = directed_integral_I((0.3, 0.2), 0.0, grid, m=1.0)
    assert rest.value.imag == 0.0


def test_csv_row_layout():
    sample = green_wave((1, 0), 1.0, TorusGrid(2, 8))
    assert GreenSample.csv_header(2) == ["d", "m", "t", "x1", "x2", "value", "errEst", "N"]
    row = sample.csv_row()
    assert len(row) == 8
    assert float(row[5]) == sample.value


@pytest.mark.slow
def test_two_dimensional_sup_decay():
    from decay_analysis import DecaySeries, fit_decay
    times = np.geomspace(50.0, 2000.0, 12)
    results = sup_samples(2, times)
    fit = fit_decay(DecaySeries(times, np.array([r.value for r in results])))
    print(f"d=2 sup decay: beta={fit.beta}, p={fit.p}")
    assert abs(fit.beta + 2.0 / 3.0) < 0.05
    assert fit.p == 0


if __name__ == "__main__":
    test_zero_time_is_exact_zero()
    test_small_time_at_origin()
    test_against_box_oracle()
    test_odd_in_time()
    test_parseval_identity()
    print("All Green function tests passed!")
