"""Lattice dispersion relation ω(ξ) = (Σ 2 − 2cos ξ_j + m²)^{1/2} and its derivatives.

All functions accept a single torus point of shape (d,) or a batch of shape
(..., d) and return arrays with the trailing axis reduced where appropriate.
"""
import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from math import factorial
from typing import Iterator, Tuple

import numpy as np

from errors import SingularPointError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_CORANK_TOL = 1e-8


@dataclass(frozen=True)
class DispersionRelation:
    """The symbol ω for dimension d and mass m (m = 0 wave, m > 0 Klein-Gordon)."""

    d: int
    m: float = 0.0

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or not 2 <= self.d <= 5:
            raise ValidationError(f"dimension must be an integer in 2..5, got {self.d!r}")
        if not np.isfinite(self.m) or self.m < 0:
            raise ValidationError(f"mass must be a finite value >= 0, got {self.m!r}")


def normalize_torus(xi) -> np.ndarray:
    """Reduce coordinates modulo 2π into [−π, π] (round-half-to-even)."""
    xi = np.asarray(xi, dtype=float)
    return xi - 2.0 * np.pi * np.round(xi / (2.0 * np.pi))


def _as_points(rel: DispersionRelation, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1:] != (rel.d,):
        raise ValidationError(f"expected torus points with trailing dimension {rel.d}, got shape {xi.shape}")
    return xi


def omega(rel: DispersionRelation, xi) -> np.ndarray:
    """Evaluate ω(ξ); symmetric under signed permutations bit for bit."""
    xi = _as_points(rel, xi)
    terms = 4.0 * np.sin(0.5 * xi) ** 2
    # sorted summands make the sum independent of coordinate order
    total = np.sort(terms, axis=-1).sum(axis=-1)
    return np.sqrt(total + rel.m * rel.m)


def _check_regular(rel: DispersionRelation, xi: np.ndarray):
    if rel.m == 0.0 and np.any(np.all(xi == 0.0, axis=-1)):
        raise SingularPointError("grad/Hessian of ω are singular at ξ = 0 when m = 0")


def grad_omega(rel: DispersionRelation, xi) -> np.ndarray:
    xi = _as_points(rel, xi)
    _check_regular(rel, xi)
    w = omega(rel, xi)
    return np.sin(xi) / w[..., None]


def hess_omega(rel: DispersionRelation, xi) -> np.ndarray:
    """Hess ω = diag(cos ξ)/ω − sin ξ sin ξᵀ/ω³."""
    xi = _as_points(rel, xi)
    _check_regular(rel, xi)
    w = omega(rel, xi)[..., None, None]
    s = np.sin(xi)
    diag = np.cos(xi)[..., :, None] * np.eye(rel.d)
    return diag / w - s[..., :, None] * s[..., None, :] / w**3


def hess_phi(rel: DispersionRelation, xi) -> np.ndarray:
    # Hess_ξ φ(v, ξ) does not depend on v
    return -hess_omega(rel, xi)


def phase_phi(rel: DispersionRelation, v, xi) -> np.ndarray:
    """φ(v, ξ) = v·ξ − ω(ξ)."""
    xi = _as_points(rel, xi)
    v = np.asarray(v, dtype=float)
    return np.sum(v * xi, axis=-1) - omega(rel, xi)


def _kernel_split(rel: DispersionRelation, xi, tol: float):
    if tol <= 0:
        raise ValidationError("corank tolerance must be positive")
    eig = np.linalg.eigvalsh(hess_phi(rel, xi))
    mags = np.abs(eig)
    radius = mags.max(axis=-1, keepdims=True)
    threshold = tol * np.maximum(1.0, radius)
    return mags, mags <= threshold


def hess_phi_corank(rel: DispersionRelation, xi, tol: float = DEFAULT_CORANK_TOL):
    """Number of Hessian eigenvalues below tol·max(1, spectral radius)."""
    _, in_kernel = _kernel_split(rel, xi, tol)
    k = in_kernel.sum(axis=-1)
    return int(k) if np.ndim(k) == 0 else k


def kernel_gap(rel: DispersionRelation, xi, tol: float = DEFAULT_CORANK_TOL):
    """Smallest |eigenvalue| of Hess φ outside the numerical kernel (inf if none)."""
    mags, in_kernel = _kernel_split(rel, xi, tol)
    gap = np.where(in_kernel, np.inf, mags).min(axis=-1)
    return float(gap) if np.ndim(gap) == 0 else gap


def signed_permutations(xi) -> Iterator[Tuple[float, ...]]:
    """Distinct images of ξ under coordinate permutations and sign flips."""
    seen = set()
    for perm in itertools.permutations(tuple(xi)):
        for signs in itertools.product((1, -1), repeat=len(perm)):
            image = tuple(s * c for s, c in zip(signs, perm))
            if image not in seen:
                seen.add(image)
                yield image


def orbit_size(x) -> int:
    """Size of the signed-permutation orbit of an integer point."""
    mags = [abs(int(c)) for c in x]
    size = factorial(len(mags))
    for count in Counter(mags).values():
        size //= factorial(count)
    return size * 2 ** sum(1 for c in mags if c != 0)
