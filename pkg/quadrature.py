"""Tensor-product quadrature shared by the Green-function and oscillatory engines.

Every rule carries two weight vectors on the same nodes: the full grid and the
grid of every other node. Summing an integrand against both in one sweep gives
the value and its halving error estimate at no extra integrand cost.
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce
from math import comb, factorial, prod
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.special import roots_legendre

from errors import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_POINTS = 1 << 20

Integrand = Callable[[List], np.ndarray]


@dataclass(frozen=True)
class AxisRule:
    nodes: np.ndarray
    fine: np.ndarray
    coarse: np.ndarray

    def __len__(self):
        return len(self.nodes)

    def weighted(self, factor: np.ndarray) -> "AxisRule":
        """Fold a separable factor of the integrand into both weight vectors."""
        return AxisRule(self.nodes, self.fine * factor, self.coarse * factor)


def trapezoid_axis(lo: float, hi: float, n: int) -> AxisRule:
    """Trapezoid rule with n intervals on [lo, hi]; n must be even."""
    if n < 2 or n % 2:
        raise ValidationError(f"trapezoid rule needs an even number of intervals, got {n}")
    nodes = np.linspace(lo, hi, n + 1)
    h = (hi - lo) / n
    fine = np.full(n + 1, h)
    fine[0] = fine[-1] = 0.5 * h
    coarse = np.zeros(n + 1)
    coarse[::2] = 2.0 * h
    coarse[0] = coarse[-1] = h
    return AxisRule(nodes, fine, coarse)


def plateau(s):
    """C^∞ profile: 1 for |s| <= 1/2, 0 for |s| >= 1."""
    u = np.clip(2.0 * np.abs(s) - 1.0, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        left = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
        right = np.where(u > 0.0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
    return left / (left + right)


def gauss_legendre_panels(breaks: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on consecutive panels."""
    x, w = roots_legendre(order)
    a = np.asarray(breaks[:-1], dtype=float)[:, None]
    b = np.asarray(breaks[1:], dtype=float)[:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def ordered_map(fn: Callable, items: Iterable, threads: int = 1):
    """Map in input order; results are consumed in the same order for any thread count."""
    if threads is None or threads <= 1:
        return map(fn, items)
    pool = ThreadPoolExecutor(max_workers=threads)
    try:
        return list(pool.map(fn, items))
    finally:
        pool.shutdown()


def _leading_axes(sizes: Sequence[int], block_points: int) -> int:
    lead = 0
    while lead < len(sizes) - 1 and prod(sizes[lead:]) > block_points:
        lead += 1
    return lead


def _contract(values: np.ndarray, weights: Sequence[np.ndarray]):
    return reduce(lambda acc, w: acc @ w, reversed(weights), values)


def tensor_sum(rules: Sequence[AxisRule], integrand: Integrand,
               block_points: int = DEFAULT_BLOCK_POINTS, threads: int = 1):
    """Return (fine, coarse) sums of Π_j w_j(k_j) f(x_k) over the tensor grid.

    The integrand receives one coordinate per axis: plain floats for the
    leading axes of the current slab and broadcastable arrays for the rest.
    """
    sizes = [len(r) for r in rules]
    lead = _leading_axes(sizes, block_points)
    trailing = rules[lead:]
    ndim = len(trailing)
    block_shape = tuple(sizes[lead:])
    trailing_coords = [
        r.nodes.reshape(tuple(len(r) if a == i else 1 for a in range(ndim)))
        for i, r in enumerate(trailing)
    ]
    fine_weights = [r.fine for r in trailing]
    coarse_weights = [r.coarse for r in trailing]
    logger.debug("tensor sum over %s nodes in slabs of %d", sizes, prod(block_shape))

    def slab(index):
        lead_coords = [float(rules[j].nodes[k]) for j, k in enumerate(index)]
        values = np.broadcast_to(integrand(lead_coords + trailing_coords), block_shape)
        wf = prod(float(rules[j].fine[k]) for j, k in enumerate(index))
        wc = prod(float(rules[j].coarse[k]) for j, k in enumerate(index))
        fine = wf * _contract(values, fine_weights)
        coarse = wc * _contract(values, coarse_weights) if wc != 0.0 else 0.0
        return fine, coarse

    fine_total = 0.0
    coarse_total = 0.0
    indices = itertools.product(*(range(s) for s in sizes[:lead]))
    for fine, coarse in ordered_map(slab, indices, threads):
        fine_total += fine
        coarse_total += coarse
    return fine_total, coarse_total


def nondecreasing_tuples(lo: int, hi: int, length: int) -> np.ndarray:
    """All nondecreasing integer tuples of the given length with entries in [lo, hi]."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.intp)
    n = hi - lo + 1
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n + length - 1), length)),
        dtype=np.intp,
    )
    return flat.reshape(-1, length) - np.arange(length) + lo


def permutation_counts(indices: np.ndarray) -> np.ndarray:
    """Number of distinct permutations of each sorted row."""
    rows, d = indices.shape
    run = np.ones(rows, dtype=np.int64)
    denom = np.ones(rows)
    for j in range(1, d):
        run = np.where(indices[:, j] == indices[:, j - 1], run + 1, 1)
        denom *= run
    return factorial(d) / denom


def symmetric_tensor_sum(rule: AxisRule, d: int, integrand: Integrand, threads: int = 1):
    """(fine, coarse) tensor sums for an integrand symmetric under axis permutations.

    All axes share one rule, so the sum runs over sorted index tuples weighted by
    their permutation counts.
    """
    n = len(rule) - 1
    lead = 1 if d <= 3 else 2

    def chunk(head):
        tails = nondecreasing_tuples(head[-1], n, d - lead)
        idx = np.hstack([np.broadcast_to(np.asarray(head, dtype=np.intp), (len(tails), lead)), tails])
        mult = permutation_counts(idx)
        values = integrand([rule.nodes[idx[:, j]] for j in range(d)])
        fine = np.sum(mult * np.prod(rule.fine[idx], axis=1) * values)
        coarse = np.sum(mult * np.prod(rule.coarse[idx], axis=1) * values)
        return fine, coarse

    fine_total = 0.0
    coarse_total = 0.0
    heads = itertools.combinations_with_replacement(range(n + 1), lead)
    for fine, coarse in ordered_map(chunk, heads, threads):
        fine_total += fine
        coarse_total += coarse
    return fine_total, coarse_total


def symmetric_point_count(n_nodes: int, d: int) -> int:
    """Number of sorted index tuples visited by symmetric_tensor_sum."""
    return comb(n_nodes + d - 1, d)
