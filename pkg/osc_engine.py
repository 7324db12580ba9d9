"""Oscillatory integrals J(t, S, ψ) = ∫ e^{itS(ξ)} ψ(ξ) dξ for polynomial phases.

The integral is a tensor trapezoid sum over the amplitude box. For a smooth
compactly supported (or Gaussian) amplitude the rule converges spectrally once
the grid resolves the local frequency t·|∇S|, so the grid is sized from a
bound on |∂_j S| over the box and the error is estimated by grid halving.
"""
import itertools
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import ceil, pi, prod
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

import utils
from decay_analysis import DecayFitResult, DecaySeries, fit_decay
from errors import ConvergenceError, CostGuardError, ValidationError
from polynomial import PolynomialPhase, sample_points
from quadrature import AxisRule, plateau, tensor_sum, trapezoid_axis

logger = logging.getLogger(__name__)

KINDS = ("product-bump", "radial-bump")
DEFAULT_RADIUS = 0.5
GAUSSIAN_EXTENT = 5.0
AMPLITUDE_NODES = 64
DEFAULT_OVERSAMPLE = 2.5
DEFAULT_MAX_POINTS = 2e9
MAX_DENSE_DIM = 4
D4_MAX_T = 200.0


@dataclass(frozen=True)
class AmplitudeSpec:
    """Cutoff ψ: the plateau profile per axis (product) or of |x/r| (radial).

    Axes listed in gaussian_axes carry exp(−(x/r_j)²) instead and are
    truncated at GAUSSIAN_EXTENT·r_j.
    """

    kind: str = "product-bump"
    radii: Tuple[float, ...] = (DEFAULT_RADIUS,)
    gaussian_axes: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"amplitude kind must be one of {KINDS}, got {self.kind!r}")
        radii = tuple(float(r) for r in self.radii)
        if not radii or any(not np.isfinite(r) or r <= 0 for r in radii):
            raise ValidationError(f"amplitude radii must be positive, got {self.radii}")
        object.__setattr__(self, "radii", radii)
        axes = tuple(sorted(set(int(j) for j in self.gaussian_axes)))
        if any(not 0 <= j < len(radii) for j in axes):
            raise ValidationError(f"gaussian axes {axes} out of range for d={len(radii)}")
        object.__setattr__(self, "gaussian_axes", axes)

    @classmethod
    def uniform(cls, d: int, radius: float = DEFAULT_RADIUS, kind: str = "product-bump") -> "AmplitudeSpec":
        return cls(kind, (radius,) * d)

    @classmethod
    def gaussian(cls, d: int, sigma: float) -> "AmplitudeSpec":
        return cls("product-bump", (sigma,) * d, tuple(range(d)))

    @property
    def d(self) -> int:
        return len(self.radii)

    @property
    def separable(self) -> bool:
        return self.kind == "product-bump" or len(self.gaussian_axes) == self.d

    def box(self) -> Tuple[float, ...]:
        """Half-widths of the integration box."""
        return tuple(GAUSSIAN_EXTENT * r if j in self.gaussian_axes else r for j, r in enumerate(self.radii))

    def axis_profile(self, j: int, nodes) -> np.ndarray:
        if not self.separable:
            raise ValidationError("a radial bump has no axis profiles")
        x = np.asarray(nodes, dtype=float) / self.radii[j]
        if j in self.gaussian_axes:
            return np.exp(-x * x)
        return plateau(x)

    def __call__(self, coords) -> np.ndarray:
        if self.separable:
            return prod(self.axis_profile(j, c) for j, c in enumerate(coords))
        s2 = 0.0
        value = 1.0
        for j, c in enumerate(coords):
            x = np.asarray(c, dtype=float) / self.radii[j]
            if j in self.gaussian_axes:
                value = value * np.exp(-x * x)
            else:
                s2 = s2 + x * x
        return value * plateau(np.sqrt(s2))

    def restrict(self, variables: Sequence[int]) -> "AmplitudeSpec":
        keep = list(variables)
        return AmplitudeSpec(self.kind, tuple(self.radii[j] for j in keep),
                             tuple(k for k, j in enumerate(keep) if j in self.gaussian_axes))

    def describe(self) -> dict:
        return {"kind": self.kind, "radii": list(self.radii), "gaussian_axes": list(self.gaussian_axes)}


@dataclass(frozen=True)
class CombinedAmplitude:
    """Linear combination Σ c_k ψ_k of amplitudes in the same variables."""

    parts: Tuple[Tuple[float, AmplitudeSpec], ...]

    def __post_init__(self):
        if not self.parts or len({amp.d for _, amp in self.parts}) != 1:
            raise ValidationError("a combined amplitude needs parts of one common dimension")

    @property
    def d(self) -> int:
        return self.parts[0][1].d

    separable = False

    def box(self) -> Tuple[float, ...]:
        return tuple(max(widths) for widths in zip(*(amp.box() for _, amp in self.parts)))

    def __call__(self, coords) -> np.ndarray:
        return sum(c * amp(coords) for c, amp in self.parts)

    def describe(self) -> dict:
        return {"kind": "combined", "parts": [[c, amp.describe()] for c, amp in self.parts]}


Amplitude = Union[AmplitudeSpec, CombinedAmplitude]


@dataclass(frozen=True)
class OscSample:
    t: float
    value: complex
    err_est: float
    nodes: Tuple[int, ...]
    method: str = "dense"

    def csv_row(self, phase_id: str) -> List[str]:
        return [phase_id, utils.format_number(self.t), utils.format_number(self.value.real),
                utils.format_number(self.value.imag), utils.format_number(self.err_est)]

    @staticmethod
    def csv_header() -> List[str]:
        return ["phase_id", "t", "re", "im", "errEst"]


def gradient_bounds(phase: PolynomialPhase, half_widths: Sequence[float]) -> np.ndarray:
    """Upper bounds of |∂_j S| on the box Π [−h_j, h_j] from the coefficients."""
    bounds = np.zeros(phase.d)
    for g, c in phase.terms.items():
        size = abs(float(c)) * prod(h**e for h, e in zip(half_widths, g))
        for j, e in enumerate(g):
            if e:
                bounds[j] += size * e / half_widths[j]
    return bounds


def node_counts(t: float, phase: PolynomialPhase, amp: Amplitude, oversample: float = DEFAULT_OVERSAMPLE) -> Tuple[int, ...]:
    """Even interval counts per axis: oversampled Nyquist count of t·|∂_j S| plus the amplitude bandwidth."""
    half = amp.box()
    bounds = gradient_bounds(phase, half)
    counts = []
    for h, b in zip(half, bounds):
        n = int(ceil(oversample * abs(t) * b * 2.0 * h / pi)) + AMPLITUDE_NODES
        counts.append(n + n % 2)
    return tuple(counts)


def _check_cost(d: int, t: float):
    if d > MAX_DENSE_DIM:
        raise CostGuardError(f"dense oscillatory quadrature is limited to d <= {MAX_DENSE_DIM}, got d={d}")
    if d == MAX_DENSE_DIM and abs(t) > D4_MAX_T:
        raise CostGuardError(f"4-variable quadrature is limited to |t| <= {D4_MAX_T:g}, got t={t:g}")


def _weighted_rules(amp: Amplitude, rules: Sequence[AxisRule]) -> List[AxisRule]:
    return [r.weighted(amp.axis_profile(j, r.nodes)) for j, r in enumerate(rules)]


def _dense_sum(t, phase, amp, rules, threads):
    if amp.separable:
        return tensor_sum(_weighted_rules(amp, rules), lambda c: np.exp(1j * t * phase.evaluate(c)), threads=threads)
    return tensor_sum(rules, lambda c: amp(c) * np.exp(1j * t * phase.evaluate(c)), threads=threads)


def split_blocks(phase: PolynomialPhase, inner: Mapping[int, int]):
    d = phase.d
    for i, o in inner.items():
        if not (0 <= i < d and 0 <= o < d) or i == o or o in inner:
            raise ValidationError(f"invalid inner block {i} -> {o}")
    outer_terms: Dict[tuple, Fraction] = {}
    block_terms: Dict[int, Dict[tuple, Fraction]] = {i: {} for i in inner}
    for g, c in phase.terms.items():
        used = [i for i in inner if g[i]]
        if not used:
            outer_terms[g] = c
        elif len(used) == 1 and all(g[k] == 0 for k in range(d) if k not in (used[0], inner[used[0]])):
            block_terms[used[0]][g] = c
        else:
            raise ValidationError(f"monomial {g} couples an inner variable to more than its outer variable")
    return PolynomialPhase(d, outer_terms), {i: PolynomialPhase(d, ts) for i, ts in block_terms.items()}


def _blocked_sum(t, phase, amp, rules, inner, threads, block_points=1 << 22):
    """Nested summation: inner variables are summed first for every node of their outer variable."""
    if not amp.separable:
        raise ValidationError("nested summation needs a separable amplitude")
    d = phase.d
    outer_phase, block_phases = split_blocks(phase, inner)
    weighted = _weighted_rules(amp, rules)
    factors = {}
    for i, o in inner.items():
        x = rules[i].nodes[:, None]
        y_all = rules[o].nodes
        step = max(1, block_points // len(x))
        fine, coarse = [], []
        for start in range(0, len(y_all), step):
            coords: List = [0.0] * d
            coords[i] = x
            coords[o] = y_all[None, start:start + step]
            values = np.broadcast_to(np.exp(1j * t * block_phases[i].evaluate(coords)), (len(x), len(coords[o][0])))
            fine.append(weighted[i].fine @ values)
            coarse.append(weighted[i].coarse @ values)
        factors[i] = (np.concatenate(fine), np.concatenate(coarse))
    outer_vars = [j for j in range(d) if j not in inner]
    index_rules = [AxisRule(np.arange(len(rules[j]), dtype=float), weighted[j].fine, weighted[j].coarse)
                   for j in outer_vars]

    def integrand(which):
        def f(index_coords):
            idx = [np.asarray(c).astype(np.intp) for c in index_coords]
            coords: List = [0.0] * d
            for pos, j in enumerate(outer_vars):
                coords[j] = rules[j].nodes[idx[pos]]
            value = np.exp(1j * t * outer_phase.evaluate(coords))
            for i, o in inner.items():
                value = value * factors[i][which][idx[outer_vars.index(o)]]
            return value
        return f

    fine, _ = tensor_sum(index_rules, integrand(0), threads=threads)
    _, coarse = tensor_sum(index_rules, integrand(1), threads=threads)
    return fine, coarse


def eval_J(t: float, phase: PolynomialPhase, amp: Amplitude, *, oversample: float = DEFAULT_OVERSAMPLE,
           inner_blocks: Optional[Mapping[int, int]] = None, max_points: float = DEFAULT_MAX_POINTS,
           nodes: Optional[Sequence[int]] = None, tol: Optional[float] = None, max_refinements: int = 2,
           threads: int = 1) -> OscSample:
    """J(t, S, ψ) by tensor trapezoid quadrature with a halving error estimate.

    inner_blocks maps an inner variable to the single outer variable it
    interacts with; those variables are summed first, so the cost is the outer
    grid plus one matrix per block instead of the full tensor grid.
    """
    if phase.d != amp.d:
        raise ValidationError(f"phase has {phase.d} variables but the amplitude has {amp.d}")
    _check_cost(phase.d, t)
    if t < 0:
        sample = eval_J(-t, phase, amp, oversample=oversample, inner_blocks=inner_blocks, max_points=max_points,
                        nodes=nodes, tol=tol, max_refinements=max_refinements, threads=threads)
        return replace(sample, t=t, value=sample.value.conjugate())
    inner = dict(inner_blocks or {})
    half = amp.box()
    for attempt in range(max_refinements + 1):
        counts = tuple(nodes) if nodes is not None else node_counts(t, phase, amp, oversample * 2**attempt)
        if inner:
            cost = prod(counts[j] + 1 for j in range(phase.d) if j not in inner)
            cost += sum((counts[i] + 1) * (counts[o] + 1) for i, o in inner.items())
        else:
            cost = prod(c + 1 for c in counts)
        if cost > max_points:
            raise CostGuardError(f"oscillatory quadrature needs {cost:.3g} points, limit is {max_points:.3g}")
        rules = [trapezoid_axis(-h, h, n) for h, n in zip(half, counts)]
        logger.debug("eval_J t=%g nodes=%s cost=%.3g", t, counts, cost)
        if inner:
            fine, coarse = _blocked_sum(t, phase, amp, rules, inner, threads)
        else:
            fine, coarse = _dense_sum(t, phase, amp, rules, threads)
        err = abs(fine - coarse)
        if tol is None or nodes is not None or err <= tol:
            return OscSample(float(t), complex(fine), float(err), counts, "nested" if inner else "dense")
        logger.debug("eval_J t=%g: estimate %.3g above %.3g, refining", t, err, tol)
    raise ConvergenceError(f"J(t={t:g}) error estimate {err:.3g} above {tol:.3g} after {max_refinements} refinements")


def quad_factor_eval(t: float, phase: PolynomialPhase, blocks: Sequence[Sequence[int]], amp: AmplitudeSpec,
                     **kwargs) -> OscSample:
    """J of a direct sum A(x) + B(y) + ... with a product amplitude as the product of the factors."""
    blocks = [tuple(int(j) for j in b) for b in blocks]
    flat = [j for b in blocks for j in b]
    if len(flat) != len(set(flat)):
        raise ValidationError(f"variable blocks are not disjoint: {blocks}")
    if sorted(flat) != list(range(phase.d)):
        raise ValidationError(f"variable blocks {blocks} do not partition {phase.d} variables")
    if not amp.separable:
        raise ValidationError("factorized evaluation needs a product amplitude")
    owner = {j: k for k, b in enumerate(blocks) for j in b}
    for g in phase.terms:
        if len({owner[j] for j, e in enumerate(g) if e}) > 1:
            raise ValidationError(f"monomial {g} couples variables of different blocks")
    samples = [eval_J(t, phase.restrict(b), amp.restrict(b), **kwargs) for b in blocks]
    values = [s.value for s in samples]
    value = prod(values)
    err = sum(s.err_est * prod(abs(v) for k, v in enumerate(values) if k != i) for i, s in enumerate(samples))
    nodes = [0] * phase.d
    for b, s in zip(blocks, samples):
        for j, n in zip(b, s.nodes):
            nodes[j] = n
    return OscSample(float(t), complex(value), float(err), tuple(nodes), "factorized")


# ---------------------------------------------------------------------------
# perturbations

@dataclass(frozen=True)
class PerturbationSpec:
    d: int
    r: float = 1.0
    eps: float = 1e-3
    degree: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError("perturbations need at least one variable")
        if self.r <= 0:
            raise ValidationError("perturbation radius must be positive")
        if self.eps < 0:
            raise ValidationError("perturbation size must be >= 0")
        if self.degree < 0:
            raise ValidationError("perturbation degree must be >= 0")

    @property
    def grid_per_axis(self) -> int:
        return 101 if self.d <= 3 else 21


def monomials_up_to(d: int, degree: int) -> List[Tuple[int, ...]]:
    exps = [g for g in itertools.product(range(degree + 1), repeat=d) if sum(g) <= degree]
    return sorted(exps, key=lambda g: (sum(g), g))


def grid_sup(poly: PolynomialPhase, radius: float, per_axis: int) -> float:
    if poly.is_zero():
        return 0.0
    return float(np.max(np.abs(poly.evaluate(sample_points(poly.d, radius, per_axis)))))


def sample_perturbation(spec: PerturbationSpec) -> PolynomialPhase:
    """Seeded polynomial with uniform [−1, 1] coefficients, rescaled below ε on the ball."""
    if spec.eps == 0:
        return PolynomialPhase.zero(spec.d)
    exps = monomials_up_to(spec.d, spec.degree)
    coeffs = np.random.default_rng(spec.seed).uniform(-1.0, 1.0, len(exps))
    poly = PolynomialPhase(spec.d, {g: Fraction(float(c)).limit_denominator(1 << 30) for g, c in zip(exps, coeffs)})
    sup = grid_sup(poly, spec.r, spec.grid_per_axis)
    if sup >= spec.eps:
        poly = poly.scale(Fraction(0.999 * spec.eps / sup).limit_denominator(10**12))
        logger.debug("perturbation seed=%d rescaled from sup %.3g", spec.seed, sup)
    return poly


def critical_points(phase: PolynomialPhase, radius: float, starts_per_axis: int = 5,
                    tol: float = 1e-10, max_iter: int = 100) -> np.ndarray:
    """Critical points in the cube of the given radius by multi-start damped Newton."""
    axis = np.linspace(-radius, radius, starts_per_axis)
    starts = np.stack(np.meshgrid(*([axis] * phase.d), indexing="ij"), axis=-1).reshape(-1, phase.d)
    found = []
    for x in starts:
        g = phase.gradient(x)
        gn = np.linalg.norm(g)
        for _ in range(max_iter):
            if gn < tol:
                break
            step = np.linalg.lstsq(phase.hessian(x), -g, rcond=None)[0]
            lam = 1.0
            while lam > 1e-6:
                trial = x + lam * step
                g_trial = phase.gradient(trial)
                if np.linalg.norm(g_trial) < gn:
                    break
                lam *= 0.5
            else:
                break
            x, g, gn = trial, g_trial, np.linalg.norm(g_trial)
        if gn < tol and np.max(np.abs(x)) <= radius:
            found.append(x)
    found.sort(key=lambda p: (np.linalg.norm(p), tuple(p)))
    unique: List[np.ndarray] = []
    for p in found:
        if all(np.linalg.norm(p - q) > 1e-6 * max(1.0, radius) for q in unique):
            unique.append(p)
    return np.array(unique).reshape(-1, phase.d)


@dataclass(frozen=True)
class TrialFit:
    seed: int
    point: Tuple[float, ...]
    fit: DecayFitResult


@dataclass(frozen=True)
class StabilityReport:
    worst: DecayFitResult
    unperturbed: DecayFitResult
    trials: Tuple[TrialFit, ...] = field(default_factory=tuple)
    skipped: Tuple[int, ...] = field(default_factory=tuple)  # seeds with no critical point in range

    @property
    def sampled(self) -> int:
        return len({tr.seed for tr in self.trials}) + len(self.skipped)

    def exceeds(self, beta_margin: float) -> bool:
        """True when the worst fit is lexicographically above (β₀ + margin, p₀)."""
        base = (self.unperturbed.beta + beta_margin, self.unperturbed.p)
        return (self.worst.beta, self.worst.p) > base

    def to_json(self) -> dict:
        return {"worst": self.worst.to_json(), "unperturbed": self.unperturbed.to_json(),
                "trials": [{"seed": tr.seed, "point": list(tr.point), "fit": tr.fit.to_json()} for tr in self.trials],
                "skipped": list(self.skipped), "sampled": self.sampled}


def uniform_stability_probe(phase: PolynomialPhase, spec: PerturbationSpec, t_list: Sequence[float], trials: int,
                            amp: Optional[AmplitudeSpec] = None, search_radius: float = 0.25,
                            max_points: int = 4, threads: int = 1) -> StabilityReport:
    """Worst fitted decay of J(t, τ_ξ(S + P), ψ) over sampled P and critical points ξ.

    A finite set of trials only samples the uniform bound.
    """
    if phase.d > 3:
        raise CostGuardError(f"the stability check is limited to d <= 3, got d={phase.d}")
    if spec.d != phase.d:
        raise ValidationError("perturbation and phase dimensions differ")
    amp = amp or AmplitudeSpec.uniform(phase.d)
    times = np.asarray(t_list, dtype=float)
    origin = np.zeros(phase.d)

    def fit_at(h: PolynomialPhase, point, source: str) -> DecayFitResult:
        if np.any(point):
            h = h.translate([Fraction(float(c)).limit_denominator(10**12) for c in point])
        mags = [abs(eval_J(t, h, amp, threads=threads).value) for t in times]
        return fit_decay(DecaySeries(times, np.array(mags), source))

    base = fit_at(phase, origin, "unperturbed")
    results = []
    skipped = []
    for k in range(trials):
        sub = replace(spec, seed=spec.seed + k)
        perturbation = sample_perturbation(sub)
        h = phase + perturbation
        points = [origin] if perturbation.is_zero() else list(critical_points(h, search_radius)[:max_points])
        if not points:
            logger.warning("seed %d: no critical point within %g, trial skipped", sub.seed, search_radius)
            skipped.append(sub.seed)
        for point in points:
            results.append(TrialFit(sub.seed, tuple(float(c) for c in point),
                                    fit_at(h, point, f"seed={sub.seed}")))
    worst = max([base] + [r.fit for r in results], key=lambda f: (f.beta, f.p))
    logger.info("stability check: worst (%.4f, %d) against unperturbed (%.4f, %d)",
                worst.beta, worst.p, base.beta, base.p)
    return StabilityReport(worst, base, tuple(results), tuple(skipped))
