"""Fundamental solution G(x,t) of the lattice wave equation and the directed integral I(v,t).

G(x,t) = (1/(2π)^d) ∫ e^{ix·ξ} sin(tω)/ω dξ is even in every ξ_j, so it is
evaluated as (1/π^d) ∫_{[0,π]^d} Π cos(x_j ξ_j) sin(tω)/ω dξ with the
trapezoid rule on the first orthant.
"""
import logging
from dataclasses import dataclass, field
from math import ceil, pi
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.fft import dctn

import utils
from dispersion import DispersionRelation, orbit_size
from errors import CostGuardError, ValidationError, WindowError
from quadrature import (AxisRule, plateau, symmetric_point_count, symmetric_tensor_sum,
                        tensor_sum, trapezoid_axis)

logger = logging.getLogger(__name__)

DEFAULT_C_GRID = 4.0
MAX_ORTHANT_POINTS = 5 * 10**8


@dataclass(frozen=True)
class TorusGrid:
    """Symmetry-reduced orthant grid: N + 1 trapezoid nodes per axis on [0, π]."""

    d: int
    N: int
    rule: str = "trapezoidal-periodic"
    refine_factor: int = 4
    refine_radius: float = 0.2

    def __post_init__(self):
        DispersionRelation(self.d)
        if self.N < 8 or self.N % 2:
            raise ValidationError(f"grid needs an even N >= 8, got {self.N}")
        if self.rule != "trapezoidal-periodic":
            raise ValidationError(f"unknown quadrature rule {self.rule!r}")
        if self.refine_factor < 1 or not 0.0 < self.refine_radius < pi:
            raise ValidationError("refinement needs factor >= 1 and radius in (0, π)")

    @classmethod
    def for_time(cls, d: int, t: float, c_grid: float = DEFAULT_C_GRID, **kwargs) -> "TorusGrid":
        n = max(8, ceil(c_grid * abs(t)))
        return cls(d, n + n % 2, **kwargs)

    @property
    def points(self) -> int:
        return (self.N + 1) ** self.d

    def axis_rule(self) -> AxisRule:
        return trapezoid_axis(0.0, pi, self.N)

    def describe(self) -> dict:
        return {"d": self.d, "N": self.N, "rule": self.rule,
                "refine_factor": self.refine_factor, "refine_radius": self.refine_radius}


@dataclass(frozen=True)
class GreenSample:
    x: Tuple[int, ...]
    t: float
    value: float
    err_est: float
    grid: TorusGrid
    m: float = 0.0
    method: str = "orthant-trapezoid"

    def csv_row(self) -> List[str]:
        return ([str(self.grid.d), utils.format_number(self.m), utils.format_number(self.t)]
                + [str(c) for c in self.x]
                + [utils.format_number(self.value), utils.format_number(self.err_est), str(self.grid.N)])

    @staticmethod
    def csv_header(d: int) -> List[str]:
        return ["d", "m", "t"] + [f"x{j + 1}" for j in range(d)] + ["value", "errEst", "N"]


@dataclass(frozen=True)
class DirectedSample:
    v: Tuple[float, ...]
    t: float
    value: complex
    err_est: float
    grid: TorusGrid


@dataclass(frozen=True)
class SupResult:
    t: float
    x: Tuple[int, ...]
    value: float
    orbit_size: int
    err_est: float
    signed_value: float = field(default=0.0, compare=False)


def _omega_sq(coords: Sequence, m: float):
    total = m * m
    for c in coords:
        total = total + 4.0 * np.sin(0.5 * c) ** 2
    return total


def _radius(coords: Sequence):
    total = 0.0
    for c in coords:
        total = total + c * c
    return np.sqrt(total)


def _wave_profile(t: float, m: float):
    def profile(coords):
        w2 = _omega_sq(coords, m)
        w = np.sqrt(w2)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = np.sin(t * w) / w
        # removable singularity at ω = 0
        return np.where(w2 == 0.0, t, g)
    return profile


def _guard(points: int, force: bool, what: str):
    if points > MAX_ORTHANT_POINTS and not force:
        raise CostGuardError(
            f"{what} needs {points:.3g} orthant points (limit {MAX_ORTHANT_POINTS:.0e}); use --force to override")


def _warn_if_coarse(grid: TorusGrid, t: float, c_grid: float):
    needed = ceil(c_grid * abs(t))
    if grid.N < needed:
        logger.warning("grid too coarse: N=%d < ceil(c_grid*t)=%d (c_grid=%g, t=%g)", grid.N, needed, c_grid, t)


def _lattice_point(x, d: int) -> Tuple[int, ...]:
    point = tuple(int(c) for c in x)
    if len(point) != d or any(p != c for p, c in zip(point, x)):
        raise ValidationError(f"expected an integer lattice point with {d} coordinates, got {x!r}")
    return point


def _cos_rules(grid: TorusGrid, freqs: Sequence[float]) -> List[AxisRule]:
    base = grid.axis_rule()
    return [base.weighted(np.cos(a * base.nodes) / pi) for a in freqs]


def _orthant_sum(grid: TorusGrid, freqs: Sequence[float], profile, force: bool, threads: int, what: str):
    """(fine, coarse) of (1/π^d)∫ Π cos(a_j ξ_j) profile(ξ) over [0,π]^d."""
    if grid.d >= 3 and len(set(freqs)) == 1:
        _guard(symmetric_point_count(grid.N + 1, grid.d), force, what)
        rule = _cos_rules(grid, freqs[:1])[0]
        return symmetric_tensor_sum(rule, grid.d, profile, threads=threads), "diagonal-orbit"
    _guard(grid.points, force, what)
    return tensor_sum(_cos_rules(grid, freqs), profile, threads=threads), "orthant-trapezoid"


def green_wave(x, t: float, grid: TorusGrid, m: float = 0.0, window: Optional[int] = None,
               c_grid: float = DEFAULT_C_GRID, force: bool = False, threads: int = 1) -> GreenSample:
    """Evaluate G(x,t) (m = 0) or its Klein-Gordon variant (m > 0)."""
    x = _lattice_point(x, grid.d)
    DispersionRelation(grid.d, m)
    limit = grid.N if window is None else min(window, grid.N)
    if max(abs(c) for c in x) > limit:
        raise WindowError(f"lattice point {x} lies outside the window |x_j| <= {limit}")
    if t == 0:
        return GreenSample(x, t, 0.0, 0.0, grid, m, "exact")
    _warn_if_coarse(grid, t, c_grid)
    # orbit members share one canonical evaluation
    canonical = tuple(sorted((abs(c) for c in x), reverse=True))
    (fine, coarse), method = _orthant_sum(grid, canonical, _wave_profile(abs(t), m), force, threads, "green_wave")
    sign = 1.0 if t > 0 else -1.0
    return GreenSample(x, t, sign * float(fine), abs(float(fine) - float(coarse)), grid, m, method)


def green_kg(x, t: float, grid: TorusGrid, m: float, **kwargs) -> GreenSample:
    """Klein-Gordon fundamental solution with ω_* = (ω² + m²)^{1/2}, m > 0."""
    if not m > 0:
        raise ValidationError(f"Klein-Gordon mass must be positive, got {m!r}")
    return green_wave(x, t, grid, m=m, **kwargs)


def _directed_profile(t: float, m: float, cutoff=None):
    def profile(coords):
        w2 = _omega_sq(coords, m)
        w = np.sqrt(w2)
        with np.errstate(invalid="ignore", divide="ignore"):
            if t == 0.0:
                h = 1.0 / w
            else:
                h = np.exp(-1j * t * w) / w
        if cutoff is not None:
            h = h * cutoff(_radius(coords))
        # the massless origin node is punctured
        return np.where(w2 == 0.0, 0.0, h)
    return profile


def directed_integral_I(v, t: float, grid: TorusGrid, m: float = 0.0, force: bool = False,
                        threads: int = 1) -> DirectedSample:
    """I(v,t) = (1/(2π)^d) ∫ e^{it(v·ξ − ω)} / ω dξ.

    For m = 0 the 1/ω singularity is split off with a smooth cutoff χ of radius
    refine_radius: (1 − χ)/ω runs on the main grid, χ/ω on a local grid
    refine_factor times finer.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (grid.d,):
        raise ValidationError(f"velocity must have {grid.d} components")
    DispersionRelation(grid.d, m)
    freqs = tuple(sorted(np.abs(t * v).tolist(), reverse=True))
    if m > 0:
        (fine, coarse), _ = _orthant_sum(grid, freqs, _directed_profile(t, m), force, threads, "directed_integral_I")
        err = abs(fine - coarse)
    else:
        rho = grid.refine_radius
        outer = lambda r: 1.0 - plateau(r / rho)
        (fine, coarse), _ = _orthant_sum(grid, freqs, _directed_profile(t, m, outer), force, threads,
                                         "directed_integral_I")
        local = _local_grid(grid)
        inner = lambda r: plateau(r / rho)
        (lf, lc), _ = _orthant_sum(local, freqs, _directed_profile(t, m, inner), force, threads,
                                   "directed_integral_I")
        fine, coarse = fine + lf, coarse + lc
        err = abs(fine - coarse)
    value = complex(fine)
    if t == 0:
        value = complex(value.real, 0.0)
    return DirectedSample(tuple(v.tolist()), t, value, float(err), grid)


def _local_grid(grid: TorusGrid) -> "ScaledGrid":
    h = pi / grid.N / grid.refine_factor
    k = max(8, ceil(grid.refine_radius / h))
    k += k % 2
    return ScaledGrid(grid.d, k, refine_radius=grid.refine_radius, extent=k * h)


@dataclass(frozen=True)
class ScaledGrid(TorusGrid):
    """Orthant grid on [0, extent]^d used for local refinement near ξ = 0."""

    extent: float = pi

    def axis_rule(self) -> AxisRule:
        return trapezoid_axis(0.0, self.extent, self.N)


def _full_profile_array(grid: TorusGrid, t: float, m: float) -> np.ndarray:
    theta = grid.axis_rule().nodes
    coords = [theta.reshape(tuple(grid.N + 1 if a == j else 1 for a in range(grid.d))) for j in range(grid.d)]
    return np.broadcast_to(_wave_profile(t, m)(coords), (grid.N + 1,) * grid.d)


def green_window(t: float, grid: TorusGrid, m: float = 0.0, force: bool = False, threads: int = 1):
    """G(x,t) for every x in [0, N]^d via one type-I DCT, plus the N/2 grid values on [0, N/2]^d."""
    _guard(grid.points, force, "green_window")
    g = _full_profile_array(grid, abs(t), m)
    sign = 1.0 if t >= 0 else -1.0
    fine = sign * dctn(g, type=1, workers=threads) / (2 * grid.N) ** grid.d
    coarse_in = np.ascontiguousarray(g[(slice(None, None, 2),) * grid.d])
    coarse = sign * dctn(coarse_in, type=1, workers=threads) / grid.N ** grid.d
    return fine, coarse


def _fundamental_mask(shape: Tuple[int, ...]) -> np.ndarray:
    d = len(shape)
    idx = np.indices(shape, sparse=True)
    mask = np.ones(shape, dtype=bool)
    for j in range(d - 1):
        mask &= idx[j] >= idx[j + 1]
    return mask


def sup_over_window(t: float, R: int, grid: TorusGrid, m: float = 0.0, force: bool = False,
                    threads: int = 1) -> SupResult:
    """max_x |G(x,t)| over |x_j| <= R, searched on x_1 >= ... >= x_d >= 0."""
    d = grid.d
    if t == 0:
        return SupResult(t, (0,) * d, 0.0, 1, 0.0, 0.0)
    if R < ceil(abs(t)) + 2:
        raise ValidationError(f"window radius {R} does not cover the light cone (needs >= {ceil(abs(t)) + 2})")
    if R > grid.N // 2:
        raise ValidationError(f"window radius {R} exceeds N/2 = {grid.N // 2}")
    fine, coarse = green_window(t, grid, m, force, threads)
    window = (slice(0, R + 1),) * d
    mags = np.where(_fundamental_mask((R + 1,) * d), np.abs(fine[window]), -1.0)
    x_star = tuple(int(i) for i in np.unravel_index(int(np.argmax(mags)), mags.shape))
    if x_star[0] == R:
        raise WindowError(f"maximizer {x_star} touches the window boundary R={R}")
    value = float(fine[x_star])
    return SupResult(t, x_star, abs(value), orbit_size(x_star), abs(value - float(coarse[x_star])), value)


def parseval_check(t: float, grid: TorusGrid, m: float = 0.0, force: bool = False) -> Tuple[float, float]:
    """(Σ_x |G(x,t)|², (1/(2π)^d)∫ (sin tω/ω)² dξ) on one grid."""
    fine, _ = green_window(t, grid, m, force)
    n = grid.N
    mult = np.full(n + 1, 2.0)
    mult[0] = mult[-1] = 1.0
    spatial = fine**2
    for axis in range(grid.d):
        shape = tuple(n + 1 if a == axis else 1 for a in range(grid.d))
        spatial = spatial * mult.reshape(shape)
    g = _full_profile_array(grid, abs(t), m)
    rule = grid.axis_rule()
    spectral = g**2
    for axis in range(grid.d):
        shape = tuple(n + 1 if a == axis else 1 for a in range(grid.d))
        spectral = spectral * (rule.fine / pi).reshape(shape)
    return float(spatial.sum()), float(spectral.sum())


def light_cone_excess(t: float, grid: TorusGrid, slope: float = 1.2, offset: float = 5.0,
                      m: float = 0.0, force: bool = False) -> float:
    """max |G(x,t)| over the window points with |x|_∞ > slope·t + offset."""
    fine, _ = green_window(t, grid, m, force)
    idx = np.indices(fine.shape)
    outside = idx.max(axis=0) > slope * abs(t) + offset
    if not outside.any():
        raise WindowError("the grid window does not reach beyond the light cone")
    return float(np.abs(fine[outside]).max())


def box_oracle(x, t: float, d: int, m: float = 0.0, dt: float = 1e-4, radius: Optional[int] = None) -> float:
    """Independent G(x,t): RK4 for ü = Δu − m²u, u(0) = 0, u̇(0) = δ₀ on a periodic box."""
    x = _lattice_point(x, d)
    R = radius if radius is not None else ceil(2 * abs(t) + 10)
    if max(abs(c) for c in x) >= R:
        raise WindowError(f"point {x} lies outside the oracle box of radius {R}")
    side = 2 * R + 1
    u = np.zeros((side,) * d)
    ut = np.zeros((side,) * d)
    ut[(R,) * d] = 1.0
    steps = max(1, ceil(abs(t) / dt))
    h = t / steps

    def accel(field_u):
        lap = -2.0 * d * field_u
        for axis in range(d):
            lap = lap + np.roll(field_u, 1, axis) + np.roll(field_u, -1, axis)
        return lap - m * m * field_u

    for _ in range(steps):
        k1u, k1v = ut, accel(u)
        k2u, k2v = ut + 0.5 * h * k1v, accel(u + 0.5 * h * k1u)
        k3u, k3v = ut + 0.5 * h * k2v, accel(u + 0.5 * h * k2u)
        k4u, k4v = ut + h * k3v, accel(u + h * k3u)
        u = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        ut = ut + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return float(u[tuple(R + c for c in x)])


def sup_samples(d: int, times: Sequence[float], c_grid: float = DEFAULT_C_GRID, m: float = 0.0,
                force: bool = False, threads: int = 1) -> List[SupResult]:
    """sup_x |G(x,t)| for each t on grids sized N >= c_grid·t, window N/2."""
    results = []
    for t in times:
        grid = TorusGrid.for_time(d, t, c_grid)
        result = sup_over_window(t, grid.N // 2, grid, m, force, threads)
        logger.info("sup |G| at t=%g: %s at x=%s (N=%d)", t, utils.format_number(result.value), result.x, grid.N)
        results.append(result)
    return results


def diagonal_samples(d: int, times: Sequence[float], c_grid: float = DEFAULT_C_GRID,
                     force: bool = False, threads: int = 1) -> List[GreenSample]:
    """G(round(v t), t) along the critical velocity v = (2d)^{-1/2}(1, ..., 1)."""
    speed = 1.0 / np.sqrt(2.0 * d)
    samples = []
    for t in times:
        grid = TorusGrid.for_time(d, t, c_grid)
        x = (int(round(speed * t)),) * d
        samples.append(green_wave(x, t, grid, c_grid=c_grid, force=force, threads=threads))
    return samples
