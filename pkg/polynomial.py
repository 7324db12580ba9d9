"""Exact multivariate polynomials over ℚ and the library of model phases."""
import logging
from fractions import Fraction
from math import prod
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy.polys.polyerrors import BasePolynomialError

from errors import ValidationError

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]


def _fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    return Fraction(value)


class PolynomialPhase:
    """Immutable polynomial Σ s_γ z^γ with rational coefficients in d variables."""

    __slots__ = ("d", "_terms")

    def __init__(self, d: int, terms: Optional[Mapping[MultiIndex, object]] = None):
        if d < 1:
            raise ValidationError(f"a phase needs at least one variable, got d={d}")
        clean: Dict[MultiIndex, Fraction] = {}
        for gamma, coef in (terms or {}).items():
            gamma = tuple(int(g) for g in gamma)
            if len(gamma) != d or any(g < 0 for g in gamma):
                raise ValidationError(f"invalid multi-index {gamma} for d={d}")
            c = _fraction(coef)
            if c != 0:
                clean[gamma] = clean.get(gamma, Fraction(0)) + c
        self.d = d
        self._terms = {g: c for g, c in clean.items() if c != 0}

    @classmethod
    def zero(cls, d: int) -> "PolynomialPhase":
        return cls(d)

    @classmethod
    def constant(cls, d: int, value) -> "PolynomialPhase":
        return cls(d, {(0,) * d: value})

    @classmethod
    def variable(cls, d: int, j: int) -> "PolynomialPhase":
        return cls(d, {tuple(1 if i == j else 0 for i in range(d)): 1})

    @classmethod
    def variables(cls, d: int) -> List["PolynomialPhase"]:
        return [cls.variable(d, j) for j in range(d)]

    @classmethod
    def from_expression(cls, text: str, d: int) -> "PolynomialPhase":
        """Parse an expression in z1..zd, e.g. "z2**3 - z1**2*z2"."""
        symbols = sympy.symbols(f"z1:{d + 1}")
        try:
            expr = sympy.sympify(text.replace("^", "**"), locals={str(s): s for s in symbols})
        except (sympy.SympifyError, TypeError) as e:
            raise ValidationError(f"cannot parse phase {text!r}: {e}")
        extra = sorted(str(s) for s in getattr(expr, "free_symbols", ()) if s not in symbols)
        if extra:
            raise ValidationError(f"phase {text!r} uses {', '.join(extra)}; only z1..z{d} are allowed")
        try:
            poly = sympy.Poly(expr, *symbols, domain=sympy.QQ)
        except (BasePolynomialError, TypeError) as e:
            raise ValidationError(f"cannot parse phase {text!r}: {e}")
        return cls(d, {tuple(m): c for m, c in poly.terms()})

    @property
    def terms(self) -> Dict[MultiIndex, Fraction]:
        return dict(self._terms)

    def support(self) -> frozenset:
        return frozenset(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(g) for g in self._terms), default=0)

    def is_critical_germ(self) -> bool:
        """S(0) = 0 and ∇S(0) = 0."""
        return all(sum(g) >= 2 for g in self._terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, PolynomialPhase) and self.d == other.d and self._terms == other._terms

    def __hash__(self):
        return hash((self.d, frozenset(self._terms.items())))

    def __repr__(self):
        return f"PolynomialPhase(d={self.d}, {self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for gamma in sorted(self._terms, reverse=True):
            mono = "*".join(f"z{j + 1}" + (f"^{g}" if g > 1 else "") for j, g in enumerate(gamma) if g)
            coef = self._terms[gamma]
            parts.append(f"{coef}" + (f"*{mono}" if mono else "") if coef != 1 or not mono else mono)
        return " + ".join(parts).replace("+ -", "- ")

    def _check(self, other: "PolynomialPhase"):
        if not isinstance(other, PolynomialPhase):
            raise TypeError(f"expected PolynomialPhase, got {type(other).__name__}")
        if other.d != self.d:
            raise ValidationError(f"variable counts differ: {self.d} vs {other.d}")

    def __add__(self, other):
        if not isinstance(other, PolynomialPhase):
            other = PolynomialPhase.constant(self.d, other)
        self._check(other)
        terms = dict(self._terms)
        for g, c in other._terms.items():
            terms[g] = terms.get(g, Fraction(0)) + c
        return PolynomialPhase(self.d, terms)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, PolynomialPhase):
            other = PolynomialPhase.constant(self.d, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PolynomialPhase):
            return self.scale(other)
        self._check(other)
        terms: Dict[MultiIndex, Fraction] = {}
        for g1, c1 in self._terms.items():
            for g2, c2 in other._terms.items():
                g = tuple(a + b for a, b in zip(g1, g2))
                terms[g] = terms.get(g, Fraction(0)) + c1 * c2
        return PolynomialPhase(self.d, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValidationError("only nonnegative integer powers are supported")
        result = PolynomialPhase.constant(self.d, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, factor) -> "PolynomialPhase":
        f = _fraction(factor)
        return PolynomialPhase(self.d, {g: c * f for g, c in self._terms.items()})

    def derivative(self, j: int) -> "PolynomialPhase":
        terms = {}
        for g, c in self._terms.items():
            if g[j]:
                h = list(g)
                h[j] -= 1
                terms[tuple(h)] = c * g[j]
        return PolynomialPhase(self.d, terms)

    def gradient_polys(self) -> List["PolynomialPhase"]:
        return [self.derivative(j) for j in range(self.d)]

    def hessian_polys(self) -> List[List["PolynomialPhase"]]:
        grads = self.gradient_polys()
        return [[g.derivative(k) for k in range(self.d)] for g in grads]

    def evaluate(self, coords) -> np.ndarray:
        """Float evaluation on points (..., d) or on a list of broadcastable coordinates."""
        if isinstance(coords, (list, tuple)):
            axes = list(coords)
        else:
            pts = np.asarray(coords, dtype=float)
            axes = [pts[..., j] for j in range(self.d)]
        if len(axes) != self.d:
            raise ValidationError(f"expected {self.d} coordinates, got {len(axes)}")
        total = 0.0
        powers: Dict[Tuple[int, int], np.ndarray] = {}
        for g, c in self._terms.items():
            term = float(c)
            for j, e in enumerate(g):
                if e:
                    key = (j, e)
                    if key not in powers:
                        powers[key] = np.asarray(axes[j], dtype=float) ** e
                    term = term * powers[key]
            total = total + term
        return np.asarray(total, dtype=float)

    __call__ = evaluate

    def gradient(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.stack([np.broadcast_to(g.evaluate(pts), pts.shape[:-1]) for g in self.gradient_polys()], axis=-1)

    def hessian(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        rows = [np.stack([np.broadcast_to(h.evaluate(pts), pts.shape[:-1]) for h in row], axis=-1)
                for row in self.hessian_polys()]
        return np.stack(rows, axis=-2)

    def translate(self, c: Sequence) -> "PolynomialPhase":
        """τ_c S(z) = S(z + c), expanded exactly."""
        shifts = [PolynomialPhase.variable(self.d, j) + _fraction(cj) for j, cj in enumerate(c)]
        return self._compose(shifts)

    def substitute_linear(self, matrix: Sequence[Sequence]) -> "PolynomialPhase":
        """S(M w): row i of M expresses the old variable z_i in the new variables w."""
        n_new = len(matrix[0])
        new_vars = PolynomialPhase.variables(n_new)
        images = []
        for row in matrix:
            image = PolynomialPhase.zero(n_new)
            for k, entry in enumerate(row):
                if entry:
                    image = image + new_vars[k].scale(entry)
            images.append(image)
        return self._compose(images)

    def _compose(self, images: List["PolynomialPhase"]) -> "PolynomialPhase":
        if len(images) != self.d:
            raise ValidationError("composition needs one image per variable")
        n = images[0].d
        result = PolynomialPhase.zero(n)
        cache: Dict[Tuple[int, int], PolynomialPhase] = {}
        for g, c in self._terms.items():
            term = PolynomialPhase.constant(n, c)
            for j, e in enumerate(g):
                if e:
                    if (j, e) not in cache:
                        cache[(j, e)] = images[j] ** e
                    term = term * cache[(j, e)]
            result = result + term
        return result

    def direct_sum(self, other: "PolynomialPhase") -> "PolynomialPhase":
        """S(x) + T(y) in d₁ + d₂ variables."""
        terms = {g + (0,) * other.d: c for g, c in self._terms.items()}
        for g, c in other._terms.items():
            key = (0,) * self.d + g
            terms[key] = terms.get(key, Fraction(0)) + c
        return PolynomialPhase(self.d + other.d, terms)

    def restrict(self, variables: Sequence[int]) -> "PolynomialPhase":
        """Terms involving only the given variables, re-indexed in that order."""
        keep = list(variables)
        terms = {}
        for g, c in self._terms.items():
            if all(g[j] == 0 for j in range(self.d) if j not in keep):
                terms[tuple(g[j] for j in keep)] = c
        return PolynomialPhase(len(keep), terms)

    def variables_used(self) -> frozenset:
        return frozenset(j for g in self._terms for j, e in enumerate(g) if e)

    def to_sympy(self, symbols: Optional[Sequence] = None):
        symbols = symbols or sympy.symbols(f"z1:{self.d + 1}")
        return sum((sympy.Rational(c.numerator, c.denominator) * prod(s**e for s, e in zip(symbols, g))
                    for g, c in self._terms.items()), sympy.Integer(0))


def build_phase_Pm(m: int, d: int, signs: Optional[Sequence[int]] = None) -> PolynomialPhase:
    """(Σ_{j≤m} z_j)³ − Σ_{j≤m} z_j³ + Σ_{j>m} s_j z_j²."""
    if not 2 <= m <= d - 1:
        raise ValidationError(f"need 2 <= m <= d-1, got m={m}, d={d}")
    signs = list(signs) if signs is not None else [1] * (d - m)
    if len(signs) != d - m or any(s not in (1, -1) for s in signs):
        raise ValidationError(f"expected {d - m} signs in {{+1, -1}}, got {signs}")
    z = PolynomialPhase.variables(d)
    linear = PolynomialPhase.zero(d)
    cubes = PolynomialPhase.zero(d)
    for j in range(m):
        linear = linear + z[j]
        cubes = cubes + z[j] ** 3
    quadratic = PolynomialPhase.zero(d)
    for s, j in zip(signs, range(m, d)):
        quadratic = quadratic + (z[j] ** 2).scale(s)
    return linear ** 3 - cubes + quadratic


def p4_tilde() -> PolynomialPhase:
    """Cubic core (Σ_{j≤4} z_j)³ − Σ z_j³ of 𝐏₄."""
    z = PolynomialPhase.variables(4)
    return (z[0] + z[1] + z[2] + z[3]) ** 3 - (z[0] ** 3 + z[1] ** 3 + z[2] ** 3 + z[3] ** 3)


def d4_core() -> PolynomialPhase:
    z1, z2 = PolynomialPhase.variables(2)
    return z2 ** 3 - z1 ** 2 * z2


def t444_core() -> PolynomialPhase:
    z1, z2, z3 = PolynomialPhase.variables(3)
    return z1 * z2 * z3


def u12_core() -> PolynomialPhase:
    z1, z2, z3 = PolynomialPhase.variables(3)
    return z1 ** 4 + z2 * z3 * (z2 + z3)


def fresnel(d: int = 1) -> PolynomialPhase:
    z = PolynomialPhase.variables(d)
    total = PolynomialPhase.zero(d)
    for zj in z:
        total = total + zj ** 2
    return total


def cube() -> PolynomialPhase:
    return PolynomialPhase.variable(1, 0) ** 3


APPENDIX_SUBSTITUTION = (
    (1, 1, 0, 0),
    (1, -1, 0, 0),
    (0, 0, 1, 1),
    (0, 0, 1, -1),
)


def appendix_form() -> PolynomialPhase:
    """𝐏̃₄ after ξ₁ = w₁ + w₂, ξ₂ = w₁ − w₂, ξ₃ = w₃ + w₄, ξ₄ = w₃ − w₄."""
    return p4_tilde().substitute_linear(APPENDIX_SUBSTITUTION)


def phase_library() -> Dict[str, PolynomialPhase]:
    return {
        "P2": build_phase_Pm(2, 3),
        "P3": build_phase_Pm(3, 5),
        "P4": build_phase_Pm(4, 5),
        "P4-tilde": p4_tilde(),
        "D4": d4_core(),
        "z1z2z3": t444_core(),
        "U12": u12_core(),
        "fresnel": fresnel(1),
        "cube": cube(),
    }


def library_manifest() -> List[dict]:
    return [{"id": name, "d": phase.d, "expression": str(phase),
             "terms": [{"exponent": list(g), "coefficient": str(c)} for g, c in sorted(phase.terms.items())]}
            for name, phase in phase_library().items()]


def monomial_support(exponents: Iterable[Sequence[int]]) -> PolynomialPhase:
    """Phase with unit coefficients on the given exponents."""
    exps = [tuple(int(e) for e in g) for g in exponents]
    if not exps:
        raise ValidationError("at least one monomial is required")
    d = len(exps[0])
    if any(len(g) != d for g in exps):
        raise ValidationError("all monomials must have the same number of variables")
    return PolynomialPhase(d, {g: 1 for g in exps})


def sample_points(d: int, radius: float, per_axis: int) -> np.ndarray:
    """Cube grid points inside the closed ball of the given radius."""
    axis = np.linspace(-radius, radius, per_axis)
    pts = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return pts[np.linalg.norm(pts, axis=1) <= radius + 1e-12]
