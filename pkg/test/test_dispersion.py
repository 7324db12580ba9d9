#!/usr/bin/env python
"""
Test script to verify the lattice dispersion relation and its derivatives
"""
import itertools
import os
import sys

import numpy as np
import pytest

# Add the parent directory to the Python path so we can import modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from dispersion import (DispersionRelation, grad_omega, hess_phi, hess_phi_corank, kernel_gap,
                        normalize_torus, omega, orbit_size, phase_phi, signed_permutations)
from errors import SingularPointError, ValidationError

HALF_PI = np.pi / 2


def test_omega_values():
    rel = DispersionRelation(5)
    assert omega(rel, np.zeros(5)) == 0.0
    assert abs(omega(rel, np.full(5, np.pi)) - np.sqrt(20.0)) < 1e-14
    assert abs(omega(rel, np.full(5, HALF_PI)) - np.sqrt(10.0)) < 1e-14
    kg = DispersionRelation(2, m=1.0)
    assert abs(omega(kg, np.zeros(2)) - 1.0) < 1e-15
    print("omega values test passed!")


def test_omega_permutation_symmetry_is_bitwise():
    rel = DispersionRelation(4)
    xi = np.array([0.3, -1.7, 2.9, 0.001])
    reference = omega(rel, xi)
    for image in signed_permutations(xi):
        assert omega(rel, np.array(image)) == reference
    print("omega symmetry test passed!")


def test_grad_omega_values():
    rel = DispersionRelation(5)
    assert np.allclose(grad_omega(rel, np.full(5, HALF_PI)), 1.0 / np.sqrt(10.0), atol=1e-15)
    assert np.allclose(grad_omega(rel, np.full(5, np.pi)), 0.0, atol=1e-15)
    v = grad_omega(DispersionRelation(2), np.array([HALF_PI, np.pi]))
    assert np.allclose(v, [1.0 / np.sqrt(6.0), 0.0], atol=1e-15)
    print("grad omega test passed!")


def test_group_velocity_below_one():
    rel = DispersionRelation(3)
    rng = np.random.default_rng(7)
    xi = rng.uniform(-np.pi, np.pi, size=(500, 3))
    speeds = np.linalg.norm(grad_omega(rel, xi), axis=-1)
    assert np.all(speeds < 1.0)
    print("group velocity test passed!")


def test_singular_origin():
    with pytest.raises(SingularPointError):
        grad_omega(DispersionRelation(3), np.zeros(3))
    with pytest.raises(SingularPointError):
        hess_phi(DispersionRelation(3), np.zeros(3))
    # Klein-Gordon is regular at the origin
    assert np.allclose(grad_omega(DispersionRelation(3, m=0.5), np.zeros(3)), 0.0)


def test_invalid_relation():
    with pytest.raises(ValidationError):
        DispersionRelation(6)
    with pytest.raises(ValidationError):
        DispersionRelation(1)
    with pytest.raises(ValidationError):
        DispersionRelation(3, m=-1.0)
    with pytest.raises(ValidationError):
        omega(DispersionRelation(3), np.zeros(4))


def test_corank_examples():
    rel = DispersionRelation(5)
    assert hess_phi_corank(rel, np.full(5, HALF_PI)) == 4
    assert hess_phi_corank(rel, np.array([HALF_PI, HALF_PI, HALF_PI, 1.0, 1.0])) == 2
    assert hess_phi_corank(rel, np.ones(5)) == 0
    # an independent eigenvalue routine agrees that nothing is near zero
    eig = np.linalg.eigvals(hess_phi(rel, np.ones(5)))
    assert np.min(np.abs(eig)) > 1e-8
    print("corank test passed!")


def test_corank_batch_and_gap():
    rel = DispersionRelation(5)
    batch = np.array([np.full(5, HALF_PI), np.ones(5)])
    assert list(hess_phi_corank(rel, batch)) == [4, 0]
    gaps = kernel_gap(rel, batch)
    assert gaps[0] > 1e-3
    assert gaps[1] > 1e-3
    with pytest.raises(ValidationError):
        hess_phi_corank(rel, np.ones(5), tol=0.0)


def test_phase_and_criticality():
    rel = DispersionRelation(3)
    xi = np.array([0.4, 1.1, 2.0])
    v = grad_omega(rel, xi)
    # φ(v, ·) is critical at ξ exactly when v = ∇ω(ξ)
    h = 1e-6
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        slope = (phase_phi(rel, v, xi + e) - phase_phi(rel, v, xi - e)) / (2 * h)
        assert abs(slope) < 1e-8


def test_normalize_torus():
    assert abs(normalize_torus(2 * np.pi + 0.5) - 0.5) < 1e-12
    assert abs(abs(normalize_torus(3 * np.pi)) - np.pi) < 1e-12
    assert np.all(np.abs(normalize_torus(np.linspace(-20, 20, 101))) <= np.pi + 1e-12)


def test_orbit_sizes():
    assert orbit_size((0, 0)) == 1
    assert orbit_size((1, 0)) == 4
    assert orbit_size((1, 1)) == 4
    assert orbit_size((1, 2)) == 8
    assert orbit_size((2, 2, 2)) == 8
    for x in [(1, 0, 3), (2, 2, 0), (1, 1, 1)]:
        assert orbit_size(x) == len(set(signed_permutations(x)))
    assert len(list(signed_permutations((1.0, 2.0)))) == len(set(itertools.permutations((1, 2)))) * 4


if __name__ == "__main__":
    test_omega_values()
    test_omega_permutation_symmetry_is_bitwise()
    test_grad_omega_values()
    test_group_velocity_below_one()
    test_corank_examples()
    test_orbit_sizes()
