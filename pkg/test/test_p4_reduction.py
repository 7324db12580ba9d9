#!/usr/bin/env python
"""
Test script to verify the two-variable reduction of the quartic-corank model integral
"""
import os
import sys

import numpy as np
import pytest

# Add the parent directory to the Python path so we can import modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from decay_analysis import sharpness_plateau
from errors import LatwaveError, ValidationError
from p4_reduction import _reduce, appendix_series, direct_oracle, reduce_P4_appendix
from polynomial import appendix_form, d4_core


def test_reduced_structure():
    reduced = _reduce(appendix_form())
    assert reduced.cubic == (6.0, 24.0, 24.0, 6.0)
    assert reduced.q1 == -6.0
    assert reduced.q3 == -6.0
    with pytest.raises(LatwaveError):
        _reduce(d4_core().direct_sum(d4_core()))


def test_angular_zeros_are_roots():
    reduced = _reduce(appendix_form())
    zeros = reduced.angular_zeros(-np.pi / 2, 0.0)
    assert zeros
    for theta in zeros:
        assert abs(reduced.G(theta)) < 1e-10
    assert reduced.angular_zeros(0.0, np.pi / 2) == []


def test_parameter_validation():
    with pytest.raises(ValidationError):
        reduce_P4_appendix(5.0)
    with pytest.raises(ValidationError):
        reduce_P4_appendix(100.0, sigma=0.0)


def test_reduced_value_is_real():
    result = reduce_P4_appendix(1000.0)
    print(f"λ=1000: value={result.value}, K1={result.K1}, K2={result.K2}, err={result.err_est}")
    assert result.value.imag == 0.0
    assert result.value.real == 4.0 * (result.K1 + result.K2)
    assert np.isfinite(result.err_est) and result.err_est >= 0.0
    assert set(result.to_json()) == {"lambda", "re", "im", "K1", "K2", "errEst"}


@pytest.mark.slow
def test_reduction_matches_nested_oracle():
    lam = 10.0
    reduced = reduce_P4_appendix(lam)
    oracle = direct_oracle(lam)
    print(f"reduced {reduced.value} vs oracle {oracle.value}")
    assert abs(reduced.value - oracle.value) <= 10 * (reduced.err_est + oracle.err_est) + 1e-8 * abs(oracle.value)


@pytest.mark.slow
def test_plateau_at_four_thirds():
    lams = np.geomspace(1e3, 1e5, 12)
    _, series = appendix_series(lams)
    plateau = sharpness_plateau(series, 4.0 / 3.0)
    print(f"plateau c0={plateau.c0}, flatness={plateau.flatness}")
    assert plateau.conclusive


if __name__ == "__main__":
    test_reduced_structure()
    test_angular_zeros_are_roots()
    test_reduced_value_is_real()
    print("All reduction tests passed!")
