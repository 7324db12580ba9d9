#!/usr/bin/env python
"""
Test script to verify the degenerate critical point scan for d = 5
"""
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

# Add the parent directory to the Python path so we can import modules
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from critical_structure import (CriticalRecord, expected_index, lattice_nodes, omega_image_stats,
                                predicted_count, records_to_csv_rows, scan_sigma, velocity_of)
from errors import ValidationError
from newton import DecayIndex


def test_velocity_of():
    assert np.allclose(velocity_of(np.full(5, np.pi / 2)), 1.0 / np.sqrt(10.0))
    assert np.allclose(velocity_of(np.full(5, np.pi)), 0.0, atol=1e-15)
    rng = np.random.default_rng(11)
    speeds = np.linalg.norm(velocity_of(rng.uniform(0.1, np.pi, size=(200, 5))), axis=1)
    assert np.all(speeds < 1.0)


def test_lattice_nodes():
    nodes = lattice_nodes(10)
    assert len(nodes) == 21
    assert nodes[10] == np.pi / 2
    assert nodes[0] == 0.0
    with pytest.raises(ValidationError):
        lattice_nodes(0)


def test_predicted_counts():
    assert predicted_count(5, 4, 10) == 1
    assert predicted_count(5, 3, 10) == 100
    assert predicted_count(5, 2, 10) == 10 * 400
    assert predicted_count(5, 1, 10) is None


def test_scan_corank_four():
    scan = scan_sigma(5, 4, resolution=2)
    assert len(scan.records) == 1
    record = scan.records[0]
    assert record.xi == (np.pi / 2,) * 5
    assert abs(record.speed - 1.0 / np.sqrt(2.0)) < 1e-12
    assert scan.verified
    assert scan.summary()["found"] == 1


def test_scan_corank_three():
    scan = scan_sigma(5, 3, resolution=2)
    assert len(scan.records) == 20
    assert all(r.half_pi_count == 4 for r in scan.records)
    assert all(r.speed < 1.0 for r in scan.records)
    assert scan.verified


def test_scan_full_corank_is_empty():
    scan = scan_sigma(5, 5, resolution=2)
    assert scan.records == ()
    with pytest.raises(ValidationError):
        scan_sigma(5, 0, resolution=2)


def test_scan_threads_agree():
    single = scan_sigma(5, 3, resolution=2, threads=1)
    many = scan_sigma(5, 3, resolution=2, threads=4)
    assert single.records == many.records


def test_omega_image_stats():
    records = {4: scan_sigma(5, 4, resolution=2).records, 3: scan_sigma(5, 3, resolution=2).records}
    stats = omega_image_stats(records)
    print(f"max speeds: {stats.max_speed_by_k}, separation: {stats.separation}")
    assert stats.max_speed < 1.0
    assert abs(stats.max_speed_by_k[4] - 1.0 / np.sqrt(2.0)) < 1e-12
    assert stats.separation[(3, 4)] > 0.0
    with pytest.raises(ValidationError):
        omega_image_stats({4: ()})


def test_expected_index():
    assert expected_index(4) == DecayIndex(Fraction(-11, 6), 0)
    assert expected_index(3) == DecayIndex(Fraction(-2), 1)
    assert expected_index(0) == DecayIndex(Fraction(-2), 0)


def test_csv_rows():
    scan = scan_sigma(5, 4, resolution=2)
    rows = records_to_csv_rows(scan.records)
    assert rows[0] == CriticalRecord.csv_header(5)
    assert rows[1][0] == "4"
    assert records_to_csv_rows([]) == []


if __name__ == "__main__":
    test_velocity_of()
    test_scan_corank_four()
    test_scan_corank_three()
    test_omega_image_stats()
    print("All critical structure tests passed!")
