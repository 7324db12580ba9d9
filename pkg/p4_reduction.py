"""Large-λ evaluation of J(λ, 𝐏̃₄, ψ) through a two-variable reduction.

With ξ₁ = w₁ + w₂, ξ₂ = w₁ − w₂, ξ₃ = w₃ + w₄, ξ₄ = w₃ − w₄ the phase becomes
g(w₁, w₃) + q·w₁w₂² + q·w₃w₄², and dξ = 4 dw. The amplitude is the Gaussian
ψ(w) = exp(−|w|²/σ²), so the two quadratic directions integrate in closed form:

    ∫ e^{iλq w₁ w₂²} e^{−w₂²/σ²} dw₂ = (π / (1/σ² − iλq w₁))^{1/2}.

What remains is a 2-D integral over (w₁, w₃) with weights that behave like
|w₁ w₃|^{−1/2} away from the axes. In polar coordinates w = ρ(cos θ, sin θ)
the phase is λρ³G(θ) with G cubic, and every other factor is analytic in ρ,
so the radial integral is rotated to ρ = u²·e^{±iπ/6}, where the oscillation
turns into the decay exp(−λ|G|u⁶). The substitution ρ = u² smooths the square
root weights at the origin. The angular integral is adaptive (quad_vec) with
breakpoints at the zeros of G.

The reflection w → −w conjugates the integrand, so only the quadrants
w₁, w₃ > 0 (K₁) and w₁ > 0 > w₃ (K₂) are integrated.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import pi
from typing import List, Sequence, Tuple

import numpy as np
from scipy.integrate import quad_vec

from decay_analysis import DecaySeries
from errors import LatwaveError, ValidationError
from osc_engine import AmplitudeSpec, OscSample, eval_J, split_blocks
from polynomial import PolynomialPhase, appendix_form
from quadrature import gauss_legendre_panels

logger = logging.getLogger(__name__)

MIN_LAMBDA = 10.0
DEFAULT_SIGMA = 0.25
JACOBIAN = 4.0
INNER_BLOCKS = {1: 0, 3: 2}
DECAY_EXPONENT = 40.0
GRADING_LEVELS = 30
PANEL_ORDER = 16


@dataclass(frozen=True)
class AppendixResult:
    lam: float
    value: complex
    K1: float
    K2: float
    err_est: float
    evaluations: int = 0

    def to_json(self) -> dict:
        return {"lambda": self.lam, "re": self.value.real, "im": self.value.imag,
                "K1": self.K1, "K2": self.K2, "errEst": self.err_est}


@dataclass(frozen=True)
class _ReducedPhase:
    """g(w₁, w₃) as binary cubic coefficients and the two quadratic couplings."""

    cubic: Tuple[float, float, float, float]  # coefficients of w₁³, w₁²w₃, w₁w₃², w₃³
    q1: float
    q3: float

    def G(self, theta):
        c, s = np.cos(theta), np.sin(theta)
        a, b, e, f = self.cubic
        return a * c**3 + b * c**2 * s + e * c * s**2 + f * s**3

    def angular_zeros(self, lo: float, hi: float) -> List[float]:
        """Zeros of G in (lo, hi) from the real roots of g(1, τ), τ = tan θ."""
        a, b, e, f = self.cubic
        roots = np.roots([f, e, b, a])
        angles = [float(np.arctan(r.real)) for r in roots if abs(r.imag) < 1e-12]
        return sorted(th for th in angles if lo < th < hi)


def _reduce(phase: PolynomialPhase) -> _ReducedPhase:
    outer, blocks = split_blocks(phase, INNER_BLOCKS)
    core = outer.restrict((0, 2))
    if core.degree() != 3 or any(sum(g) != 3 for g in core.terms):
        raise LatwaveError("the reduced phase is not a binary cubic in (w₁, w₃)")
    couplings = []
    for inner, outer_var in INNER_BLOCKS.items():
        exponent = tuple(2 if k == inner else 1 if k == outer_var else 0 for k in range(4))
        terms = blocks[inner].terms
        if set(terms) != {exponent}:
            raise LatwaveError(f"variable w{inner + 1} does not enter as q·w{outer_var + 1}·w{inner + 1}²")
        couplings.append(float(terms[exponent]))
    coeff = lambda g: float(core.terms.get(g, Fraction(0)))
    return _ReducedPhase((coeff((3, 0)), coeff((2, 1)), coeff((1, 2)), coeff((0, 3))), *couplings)


def _radial(theta: float, lam: float, sigma: float, reduced: _ReducedPhase):
    """Rotated radial integral at angle θ: (high-order value, |high − low|)."""
    G = reduced.G(theta)
    rotation = np.exp(1j * np.sign(G) * pi / 6.0)
    damping = np.cos(2.0 * np.angle(rotation))
    u_max = (DECAY_EXPONENT * sigma**2 / damping) ** 0.25
    if G != 0.0:
        u_max = min(u_max, (DECAY_EXPONENT / (lam * abs(G))) ** (1.0 / 6.0))
    breaks = np.concatenate([[0.0], u_max * 0.5 ** np.arange(GRADING_LEVELS, -1, -1)])
    c, s = np.cos(theta), np.sin(theta)

    def integrate(order):
        u, w = gauss_legendre_panels(breaks, order)
        rho = u * u * rotation
        a1 = 1.0 / sigma**2 - 1j * lam * reduced.q1 * rho * c
        a3 = 1.0 / sigma**2 - 1j * lam * reduced.q3 * rho * s
        f = (np.exp(-lam * abs(G) * u**6) * np.sqrt(pi / a1) * np.sqrt(pi / a3)
             * np.exp(-(rho * rho) / sigma**2) * 2.0 * u**3 * rotation**2)
        return np.sum(w * f)

    high = integrate(PANEL_ORDER)
    low = integrate(PANEL_ORDER // 2)
    return high, abs(high - low)


def _quadrant(lo: float, hi: float, lam: float, sigma: float, reduced: _ReducedPhase, epsrel: float):
    points = reduced.angular_zeros(lo, hi)

    def f(theta):
        value, err = _radial(theta, lam, sigma, reduced)
        return np.array([value.real, value.imag, err])

    result, err, info = quad_vec(f, lo, hi, epsabs=0.0, epsrel=epsrel, norm="max",
                                 points=points or None, full_output=True)
    if not info.success:
        logger.warning("angular quadrature on (%.4f, %.4f) stopped with status %d", lo, hi, info.status)
    return complex(result[0], result[1]), float(err + result[2]), int(info.neval)


def reduce_P4_appendix(lam: float, sigma: float = DEFAULT_SIGMA, epsrel: float = 1e-10) -> AppendixResult:
    """J(λ, 𝐏̃₄, ψ) with ψ(ξ) = exp(−|ξ|²/(2σ²)) through the reduced 2-D integral."""
    if lam < MIN_LAMBDA:
        raise ValidationError(f"the reduction is used for λ >= {MIN_LAMBDA:g}, got λ={lam:g}")
    if sigma <= 0:
        raise ValidationError("the Gaussian width must be positive")
    reduced = _reduce(appendix_form())
    q_same, err_same, n_same = _quadrant(0.0, pi / 2.0, lam, sigma, reduced, epsrel)
    q_mixed, err_mixed, n_mixed = _quadrant(-pi / 2.0, 0.0, lam, sigma, reduced, epsrel)
    K1 = 2.0 * q_same.real
    K2 = 2.0 * q_mixed.real
    value = JACOBIAN * (K1 + K2)
    err = JACOBIAN * 2.0 * (err_same + err_mixed)
    logger.debug("λ=%g: K1=%.6g K2=%.6g err=%.3g (%d evaluations)", lam, K1, K2, err, n_same + n_mixed)
    return AppendixResult(float(lam), complex(value), K1, K2, err, n_same + n_mixed)


def direct_oracle(lam: float, sigma: float = DEFAULT_SIGMA, threads: int = 1, **kwargs) -> OscSample:
    """The same integral as a 4-variable eval_J of the transformed phase, by nested summation."""
    sample = eval_J(lam, appendix_form(), AmplitudeSpec.gaussian(4, sigma),
                    inner_blocks=INNER_BLOCKS, threads=threads, **kwargs)
    return OscSample(sample.t, JACOBIAN * sample.value, JACOBIAN * sample.err_est, sample.nodes, "nested-oracle")


def appendix_series(lams: Sequence[float], sigma: float = DEFAULT_SIGMA) -> Tuple[List[AppendixResult], DecaySeries]:
    results = [reduce_P4_appendix(lam, sigma) for lam in lams]
    series = DecaySeries(np.array([r.lam for r in results]), np.array([abs(r.value) for r in results]),
                         "p4-appendix")
    return results, series
