"""Degenerate critical points of φ(v, ·) on the first orthant and their velocity images.

A torus point ξ is critical for φ(v, ·) exactly when v = ∇ω(ξ), so each scanned
point yields one record; its corank is the kernel dimension of Hess φ.
"""
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, pi
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

import utils
from dispersion import (DEFAULT_CORANK_TOL, DispersionRelation, grad_omega, hess_phi_corank,
                        kernel_gap, signed_permutations)
from errors import ResolutionError, ValidationError
from newton import DecayIndex
from quadrature import nondecreasing_tuples, ordered_map

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 10
CHUNK_ROWS = 20000
HALF_PI_TOL = 1e-12


def velocity_of(xi, m: float = 0.0) -> np.ndarray:
    """v = ∇ω(ξ) = sin ξ / ω(ξ), the unique velocity making ξ critical for φ(v, ·)."""
    xi = np.asarray(xi, dtype=float)
    return grad_omega(DispersionRelation(xi.shape[-1], m), xi)


@dataclass(frozen=True)
class CriticalRecord:
    xi: Tuple[float, ...]
    v: Tuple[float, ...]
    corank: int
    gap: float

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.v))

    @property
    def half_pi_count(self) -> int:
        return sum(1 for c in self.xi if abs(c - pi / 2) <= HALF_PI_TOL)

    def csv_row(self) -> List[str]:
        return ([str(self.corank)] + [utils.format_number(c) for c in self.xi]
                + [utils.format_number(c) for c in self.v]
                + [utils.format_number(self.speed), utils.format_number(self.gap)])

    @staticmethod
    def csv_header(d: int) -> List[str]:
        return (["k"] + [f"xi{j + 1}" for j in range(d)] + [f"v{j + 1}" for j in range(d)]
                + ["speed", "gap"])


@dataclass(frozen=True)
class SigmaScan:
    d: int
    k: int
    resolution: int
    records: Tuple[CriticalRecord, ...]
    predicted: Optional[int]

    @property
    def verified(self) -> bool:
        """Every record has exactly k + 1 coordinates equal to π/2 (the Σ_k structure)."""
        return all(r.half_pi_count == self.k + 1 for r in self.records)

    def summary(self) -> dict:
        return {"d": self.d, "k": self.k, "resolution": self.resolution, "found": len(self.records),
                "predicted": self.predicted, "verified": self.verified}


def lattice_nodes(resolution: int) -> np.ndarray:
    """Nodes j·π/(2R), j = 0..2R, with the exact float π/2 at j = R."""
    if resolution < 1:
        raise ValidationError("scan resolution must be >= 1")
    nodes = np.arange(2 * resolution + 1) * (pi / (2 * resolution))
    nodes[resolution] = pi / 2
    return nodes


def predicted_count(d: int, k: int, resolution: int) -> Optional[int]:
    """Lattice points with exactly k + 1 coordinates at π/2; None where no structure is asserted."""
    if k < 2:
        return None
    return comb(d, k + 1) * (2 * resolution) ** (d - k - 1)


def _distinct_permutations(row: Sequence[int]) -> List[Tuple[int, ...]]:
    return sorted(set(itertools.permutations(row)))


def scan_sigma(d: int = 5, k: int = 4, resolution: int = DEFAULT_RESOLUTION,
               tol: float = DEFAULT_CORANK_TOL, threads: int = 1) -> SigmaScan:
    """All first-orthant lattice points ξ ≠ 0 where Hess φ has corank k.

    Corank is invariant under coordinate permutations, so only sorted index
    tuples are evaluated and hits are expanded to their permutations.
    """
    rel = DispersionRelation(d)
    if not 1 <= k <= d:
        raise ValidationError(f"corank must lie in 1..{d}, got {k}")
    nodes = lattice_nodes(resolution)
    index = nondecreasing_tuples(0, 2 * resolution, d)[1:]  # drop the origin
    chunks = [index[s:s + CHUNK_ROWS] for s in range(0, len(index), CHUNK_ROWS)]
    logger.debug("scanning %d sorted lattice points for corank %d", len(index), k)

    def scan(rows):
        xi = nodes[rows]
        hits = hess_phi_corank(rel, xi, tol) == k
        return rows[hits]

    found = []
    for rows in ordered_map(scan, chunks, threads):
        for row in rows:
            found.extend(_distinct_permutations(tuple(int(j) for j in row)))
    found.sort()
    records = []
    if found:
        xi = nodes[np.array(found)]
        v = grad_omega(rel, xi)
        gaps = np.atleast_1d(kernel_gap(rel, xi, tol))
        records = [CriticalRecord(tuple(map(float, p)), tuple(map(float, w)), k, float(g))
                   for p, w, g in zip(xi, v, gaps)]
    predicted = predicted_count(d, k, resolution)
    if predicted is not None and len(records) < predicted:
        raise ResolutionError(f"found {len(records)} corank-{k} points, the lattice holds {predicted}")
    scan_result = SigmaScan(d, k, resolution, tuple(records), predicted)
    logger.info("Σ_%d: %d points (predicted %s), structure verified: %s", k, len(records), predicted,
                scan_result.verified)
    return scan_result


@dataclass(frozen=True)
class OmegaStats:
    max_speed: float
    max_speed_by_k: Dict[int, float]
    separation: Dict[Tuple[int, int], float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"max_speed": self.max_speed,
                "max_speed_by_k": {str(k): s for k, s in self.max_speed_by_k.items()},
                "separation": {f"{i},{j}": s for (i, j), s in self.separation.items()}}


def _velocity_set(records: Sequence[CriticalRecord], signed: bool) -> np.ndarray:
    if not signed:
        return np.array([r.v for r in records])
    images = {img for r in records for img in signed_permutations(r.v)}
    return np.array(sorted(images))


def omega_image_stats(records_by_k: Mapping[int, Sequence[CriticalRecord]], signed: bool = True) -> OmegaStats:
    """Largest |v| per Ω_k and the minimal distance between Ω_i and Ω_j samples."""
    sets = {k: _velocity_set(recs, signed) for k, recs in records_by_k.items() if len(recs)}
    if not sets:
        raise ValidationError("no critical records to summarize")
    by_k = {k: float(np.max(np.linalg.norm(v, axis=1))) for k, v in sorted(sets.items())}
    separation = {}
    for i, j in itertools.combinations(sorted(sets), 2):
        dist, _ = cKDTree(sets[j]).query(sets[i])
        separation[(i, j)] = float(np.min(dist))
    return OmegaStats(max(by_k.values()), by_k, separation)


def expected_index(corank: int) -> DecayIndex:
    """Uniform decay index of φ(v, ·) at a critical point of the given corank (d = 5)."""
    table = {4: DecayIndex(Fraction(-11, 6), 0), 3: DecayIndex(Fraction(-2), 1), 2: DecayIndex(Fraction(-13, 6), 0)}
    return table.get(corank, DecayIndex(Fraction(-2), 0))


def records_to_csv_rows(records: Sequence[CriticalRecord]) -> List[List[str]]:
    if not records:
        return []
    return [CriticalRecord.csv_header(len(records[0].xi))] + [r.csv_row() for r in records]
