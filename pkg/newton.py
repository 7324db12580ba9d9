"""Newton polyhedra over exact rationals and the (β, p) decay-index calculus.

Everything here is pure and works on immutable values. Linear programs are
solved with a two-phase simplex over Fraction (Bland's rule), and real-root
multiplicities come from sympy's square-free decomposition and Sturm sequences.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import gcd, lcm
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import sympy

from errors import DegenerateInputError, LatwaveError, ValidationError
from polynomial import PolynomialPhase

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, ...]


# ---------------------------------------------------------------------------
# exact linear programming

@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    value: Optional[Fraction] = None
    x: Tuple[Fraction, ...] = ()


def _pivot(table: List[List[Fraction]], basis: List[int], row: int, col: int):
    piv = table[row][col]
    table[row] = [v / piv for v in table[row]]
    for i, other in enumerate(table):
        if i != row and other[col] != 0:
            f = other[col]
            table[i] = [a - f * b for a, b in zip(other, table[row])]
    basis[row] = col


def _simplex(table, basis, cost, allowed) -> str:
    m = len(table)
    while True:
        entering = None
        for j in allowed:
            if j in basis:
                continue
            reduced = cost[j] - sum(cost[basis[i]] * table[i][j] for i in range(m))
            if reduced < 0:
                entering = j
                break
        if entering is None:
            return "optimal"
        leave = None
        for i in range(m):
            a = table[i][entering]
            if a > 0:
                ratio = table[i][-1] / a
                if leave is None or ratio < leave[0] or (ratio == leave[0] and basis[i] < basis[leave[1]]):
                    leave = (ratio, i)
        if leave is None:
            return "unbounded"
        _pivot(table, basis, leave[1], entering)


def linprog_exact(c: Sequence, A_eq: Sequence[Sequence], b_eq: Sequence) -> LPResult:
    """Minimize c·x subject to A_eq x = b_eq, x >= 0, in exact arithmetic."""
    n = len(c)
    rows = []
    for a_row, b in zip(A_eq, b_eq):
        row = [Fraction(v) for v in a_row] + [Fraction(b)]
        if row[-1] < 0:
            row = [-v for v in row]
        rows.append(row)
    m = len(rows)
    table = [row[:n] + [Fraction(int(i == k)) for k in range(m)] + [row[-1]] for i, row in enumerate(rows)]
    basis = [n + i for i in range(m)]
    phase_one = [Fraction(0)] * n + [Fraction(1)] * m
    _simplex(table, basis, phase_one, range(n + m))
    if sum(table[i][-1] for i in range(m) if basis[i] >= n) != 0:
        return LPResult("infeasible")
    # drive remaining artificial variables out of the basis
    for i in reversed(range(m)):
        if basis[i] >= n:
            col = next((j for j in range(n) if table[i][j] != 0), None)
            if col is None:
                del table[i]
                del basis[i]
            else:
                _pivot(table, basis, i, col)
    cost = [Fraction(v) for v in c] + [Fraction(0)] * m
    status = _simplex(table, basis, cost, range(n))
    if status != "optimal":
        return LPResult(status)
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        x[j] = table[i][-1]
    return LPResult("optimal", sum(cv * xv for cv, xv in zip(cost, x)), tuple(x))


# ---------------------------------------------------------------------------
# supports and polyhedra

@dataclass(frozen=True)
class SupportSet:
    d: int
    points: FrozenSet[Tuple[int, ...]]

    def __post_init__(self):
        if not self.points:
            raise DegenerateInputError("the support of a phase must be nonempty")
        for g in self.points:
            if len(g) != self.d or any(e < 0 for e in g):
                raise ValidationError(f"invalid exponent {g} for d={self.d}")

    @classmethod
    def from_phase(cls, phase: PolynomialPhase) -> "SupportSet":
        return cls(phase.d, phase.support())

    @classmethod
    def from_exponents(cls, exponents: Iterable[Sequence[int]]) -> "SupportSet":
        pts = frozenset(tuple(int(e) for e in g) for g in exponents)
        if not pts:
            raise DegenerateInputError("the support of a phase must be nonempty")
        return cls(len(next(iter(pts))), pts)

    def sorted_points(self) -> List[Tuple[int, ...]]:
        return sorted(self.points)

    def permuted(self, perm: Sequence[int]) -> "SupportSet":
        return SupportSet(self.d, frozenset(tuple(g[j] for j in perm) for g in self.points))


def _dominated_lp(gens: Sequence[Sequence], target: Sequence, direction: Optional[Sequence] = None) -> LPResult:
    """Maximize ε with Σλ_i γ_i <= target − ε·direction, Σλ = 1 (ε <= 1)."""
    n, d = len(gens), len(target)
    with_eps = direction is not None
    n_vars = n + d + (2 if with_eps else 0)
    A, b = [], []
    for j in range(d):
        row = [Fraction(g[j]) for g in gens] + [Fraction(int(k == j)) for k in range(d)]
        if with_eps:
            row += [Fraction(direction[j]), Fraction(0)]
        A.append(row)
        b.append(Fraction(target[j]))
    A.append([Fraction(1)] * n + [Fraction(0)] * (n_vars - n))
    b.append(Fraction(1))
    if with_eps:
        A.append([Fraction(0)] * (n + d) + [Fraction(1), Fraction(1)])
        b.append(Fraction(1))
    c = [Fraction(0)] * n_vars
    if with_eps:
        c[n + d] = Fraction(-1)
    return linprog_exact(c, A, b)


def in_polyhedron(support: SupportSet, point: Sequence) -> bool:
    return _dominated_lp(support.sorted_points(), point).status == "optimal"


def newton_distance(s: SupportSet) -> Fraction:
    """d_S: minimal t with t·𝟙 >= a convex combination of the generators."""
    gens = s.sorted_points()
    n, d = len(gens), s.d
    # variables: λ (n), t, slacks (d)
    A = []
    for j in range(d):
        A.append([Fraction(g[j]) for g in gens] + [Fraction(-1)] + [Fraction(int(k == j)) for k in range(d)])
    A.append([Fraction(1)] * n + [Fraction(0)] * (d + 1))
    b = [Fraction(0)] * d + [Fraction(1)]
    c = [Fraction(0)] * n + [Fraction(1)] + [Fraction(0)] * d
    result = linprog_exact(c, A, b)
    if result.status != "optimal":
        raise LatwaveError(f"Newton distance LP ended with status {result.status}")
    return result.value


def _rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    rows = [list(map(Fraction, v)) for v in vectors if any(v)]
    rank, col = 0, 0
    width = len(rows[0]) if rows else 0
    while rank < len(rows) and col < width:
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(rank + 1, len(rows)):
            f = rows[i][col] / rows[rank][col]
            rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def _nullspace(vectors: Sequence[Sequence[Fraction]], width: int) -> List[List[Fraction]]:
    rows = [list(map(Fraction, v)) for v in vectors]
    pivots = []
    r = 0
    for col in range(width):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        rows[r] = [v / rows[r][col] for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    basis = []
    for free in (c for c in range(width) if c not in pivots):
        vec = [Fraction(0)] * width
        vec[free] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -rows[i][free]
        basis.append(vec)
    return basis


def _primitive(normal: Sequence[Fraction]) -> Tuple[int, ...]:
    den = lcm(*(f.denominator for f in normal))
    ints = [int(f * den) for f in normal]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    return tuple(v // g for v in ints)


@dataclass(frozen=True)
class Facet:
    normal: Tuple[int, ...]
    offset: int

    def holds(self, point: Sequence) -> bool:
        return sum(a * Fraction(p) for a, p in zip(self.normal, point)) >= self.offset


class NewtonPolyhedron:
    """conv(∪ γ + ℝ₊^d) with vertices and facets computed on demand."""

    def __init__(self, support: SupportSet):
        self.support = support
        self.d = support.d

    @property
    def generators(self) -> List[Tuple[int, ...]]:
        return self.support.sorted_points()

    def contains(self, point: Sequence) -> bool:
        return in_polyhedron(self.support, point)

    @cached_property
    def vertices(self) -> List[Tuple[int, ...]]:
        gens = self.generators
        result = []
        for k, g in enumerate(gens):
            others = gens[:k] + gens[k + 1:]
            if not others or _dominated_lp(others, g).status != "optimal":
                result.append(g)
        return result

    @cached_property
    def facets(self) -> List[Facet]:
        d = self.d
        verts = self.vertices
        units = [tuple(int(i == j) for i in range(d)) for j in range(d)]
        found = set()
        for base_index, base in enumerate(verts):
            directions = [tuple(v[i] - base[i] for i in range(d)) for v in verts[base_index + 1:]] + units
            for chosen in combinations(directions, d - 1):
                null = _nullspace(chosen, d)
                if len(null) != 1:
                    continue
                normal = null[0]
                if all(a <= 0 for a in normal):
                    normal = [-a for a in normal]
                if any(a < 0 for a in normal):
                    continue
                prim = _primitive(normal)
                offset = sum(a * b for a, b in zip(prim, base))
                if all(sum(a * b for a, b in zip(prim, v)) >= offset for v in verts):
                    found.add(Facet(prim, offset))
        return sorted(found, key=lambda f: (f.normal, f.offset))


@dataclass(frozen=True)
class PrincipalFaceDesc:
    dimension: int
    generators: Tuple[Tuple[int, ...], ...]
    recession: Tuple[int, ...]
    distance: Fraction
    normal: Optional[Tuple[Fraction, Fraction, Fraction]] = None

    @property
    def compact(self) -> bool:
        return not self.recession

    @property
    def is_vertex(self) -> bool:
        return self.dimension == 0

    def to_json(self) -> dict:
        return {"dim": self.dimension, "generators": [list(g) for g in self.generators],
                "compact": self.compact, "recession": list(self.recession)}


def principal_face(s: SupportSet, distance: Optional[Fraction] = None) -> PrincipalFaceDesc:
    """Minimal face of 𝒩(S) containing (d_S, ..., d_S).

    A generator γ lies on it when the diagonal point can step back along γ − p
    inside 𝒩(S); a unit direction e_j recedes along it when p − ε e_j ∈ 𝒩(S).
    """
    dist = newton_distance(s) if distance is None else Fraction(distance)
    d = s.d
    p = [dist] * d
    gens = s.sorted_points()

    def steps_back(direction) -> bool:
        result = _dominated_lp(gens, p, direction)
        return result.status == "optimal" and result.x[len(gens) + d] > 0

    on_face = tuple(g for g in gens if steps_back([Fraction(gi) - dist for gi in g]))
    recession = tuple(j for j in range(d) if steps_back([Fraction(int(i == j)) for i in range(d)]))
    vectors = [[Fraction(gi) - dist for gi in g] for g in on_face]
    vectors += [[Fraction(int(i == j)) for i in range(d)] for j in recession]
    dim = _rank(vectors)
    normal = None
    if d == 2 and dim == 1 and not recession:
        g1, g2 = on_face[0], on_face[-1]
        n1, n2 = Fraction(abs(g2[1] - g1[1])), Fraction(abs(g2[0] - g1[0]))
        normal = (n1, n2, n1 * g1[0] + n2 * g1[1])
    return PrincipalFaceDesc(dim, on_face, recession, dist, normal)


# ---------------------------------------------------------------------------
# real roots and adaptedness

@dataclass(frozen=True)
class RealRoot:
    interval: Tuple[Fraction, Fraction]
    multiplicity: int


def _to_poly(poly, x=None) -> sympy.Poly:
    x = x or sympy.Symbol("x")
    if isinstance(poly, sympy.Poly):
        return poly
    if isinstance(poly, dict):
        expr = sum((sympy.Rational(Fraction(c).numerator, Fraction(c).denominator) * x**k
                    for k, c in poly.items()), sympy.Integer(0))
        return sympy.Poly(expr, x, domain=sympy.QQ)
    coeffs = [sympy.Rational(Fraction(c).numerator, Fraction(c).denominator) for c in poly]
    return sympy.Poly(coeffs, x, domain=sympy.QQ)


def sturm_count(poly: sympy.Poly) -> int:
    """Number of distinct real roots from sign changes of the Sturm sequence at ±∞."""
    if poly.degree() <= 0:
        return 0
    seq = sympy.sturm(poly)

    def changes(signs):
        signs = [s for s in signs if s != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    at_pos = [sympy.sign(q.LC()) for q in seq]
    at_neg = [sympy.sign(q.LC()) * (-1) ** q.degree() for q in seq]
    return changes(at_neg) - changes(at_pos)


def real_root_multiplicities(poly) -> List[RealRoot]:
    """Real roots with multiplicities from the square-free tower, no numerics involved."""
    p = _to_poly(poly)
    if p.is_zero:
        raise DegenerateInputError("the zero polynomial has no isolated roots")
    roots: List[RealRoot] = []
    _, factors = p.sqf_list()
    for factor, mult in factors:
        count = sturm_count(factor)
        intervals = factor.intervals()
        if len(intervals) != count:
            raise LatwaveError(f"Sturm count {count} disagrees with {len(intervals)} isolating intervals")
        for (lo, hi), _ in intervals:
            roots.append(RealRoot((Fraction(int(sympy.Rational(lo).p), int(sympy.Rational(lo).q)),
                                   Fraction(int(sympy.Rational(hi).p), int(sympy.Rational(hi).q))), mult))
    return sorted(roots, key=lambda r: r.interval)


@dataclass(frozen=True)
class AdaptednessResult:
    status: str  # "adapted", "not-adapted" or "not-applicable"
    condition: Optional[str]
    face: PrincipalFaceDesc
    bound: Optional[Fraction] = None
    witness: Optional[RealRoot] = None

    @property
    def adapted(self):
        return {"adapted": True, "not-adapted": False}.get(self.status, "n/a")


def is_adapted_2d(poly: PolynomialPhase) -> AdaptednessResult:
    """Adaptedness of 2-D coordinates via the principal face of 𝒩(S)."""
    if poly.d != 2:
        raise ValidationError(f"the adaptedness criterion is two-dimensional, got d={poly.d}")
    if poly.is_zero():
        raise DegenerateInputError("the zero phase has no Newton polyhedron")
    if not poly.is_critical_germ():
        raise ValidationError("the phase must satisfy S(0) = 0 and ∇S(0) = 0")
    face = principal_face(SupportSet.from_phase(poly))
    if face.is_vertex:
        return AdaptednessResult("adapted", "a", face)
    if not face.compact:
        return AdaptednessResult("adapted", "b", face)
    n1, n2, c = face.normal
    terms = poly.terms
    if (n1 / n2).denominator == 1:
        a1, a2 = n1 / n2, c / n2
        coeffs = {g[0]: terms[g] for g in face.generators}
    elif (n2 / n1).denominator == 1:
        a1, a2 = n2 / n1, c / n1
        coeffs = {g[1]: terms[g] for g in face.generators}
    else:
        return AdaptednessResult("not-applicable", None, face)
    if a2.denominator != 1:
        return AdaptednessResult("not-applicable", None, face)
    bound = a2 / (1 + a1)
    roots = real_root_multiplicities(coeffs)
    worst = max(roots, key=lambda r: r.multiplicity, default=None)
    if worst is not None and worst.multiplicity > bound:
        return AdaptednessResult("not-adapted", "c", face, bound, worst)
    return AdaptednessResult("adapted", "c", face, bound)


# ---------------------------------------------------------------------------
# decay indices

@dataclass(frozen=True, order=True)
class DecayIndex:
    """(β, p): the bound C(1 + |t|)^β log^p(|t| + 2), ordered lexicographically."""

    beta: Fraction
    p: int = 0

    def __post_init__(self):
        object.__setattr__(self, "beta", Fraction(self.beta))
        if int(self.p) != self.p or self.p < 0:
            raise ValidationError(f"log power must be a natural number, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))

    def __str__(self):
        return f"{self.beta},{self.p}"

    @classmethod
    def parse(cls, text: str) -> "DecayIndex":
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 2:
            raise ValidationError(f"decay index must look like 'beta,p', got {text!r}")
        try:
            return cls(Fraction(parts[0]), int(parts[1]))
        except (ValueError, ZeroDivisionError) as e:
            raise ValidationError(f"cannot parse decay index {text!r}: {e}")


@dataclass(frozen=True)
class WeightVector:
    alpha: Tuple[Fraction, ...]

    def __post_init__(self):
        alpha = tuple(Fraction(a) for a in self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if not alpha:
            raise ValidationError("weight vector must be nonempty")
        if not (0 < alpha[-1] and alpha[0] < 1 and all(a >= b for a, b in zip(alpha, alpha[1:]))):
            raise ValidationError(f"weights must satisfy 0 < α_d <= ... <= α_1 < 1, got {alpha}")

    @property
    def norm1(self) -> Fraction:
        return sum(self.alpha, Fraction(0))


def index_lex_max(*indices: DecayIndex) -> DecayIndex:
    if not indices:
        raise ValidationError("index_lex_max needs at least one index")
    return max(indices)


def quad_split_shift(index: DecayIndex, m: int) -> DecayIndex:
    """Index after adding m nondegenerate quadratic variables: (β − m/2, p)."""
    if m < 0:
        raise ValidationError("the number of quadratic variables must be >= 0")
    return DecayIndex(index.beta - Fraction(m, 2), index.p)


def karpushkin_combine(alpha: WeightVector, cond_a: DecayIndex, cond_b: Optional[DecayIndex] = None) -> DecayIndex:
    """Combine the deformation and sphere-restriction indices of a quasi-homogeneous phase."""
    norm = alpha.norm1
    homogeneous = DecayIndex(-norm, 0)
    if cond_b is None:
        return index_lex_max(cond_a, homogeneous)
    if norm + cond_b.beta != 0:
        return index_lex_max(cond_a, cond_b, homogeneous)
    return index_lex_max(cond_a, DecayIndex(cond_b.beta, cond_b.p + 1))


# ---------------------------------------------------------------------------
# binary quartics

@dataclass(frozen=True)
class QuarticClass:
    label: str
    index: DecayIndex
    coarse_index: DecayIndex
    multiplicities: Tuple[int, ...]
    complex_pairs: int


_QUARTIC_TABLE: Dict[Tuple[Tuple[int, ...], int], Tuple[str, DecayIndex]] = {
    ((4,), 0): ("x1^4", DecayIndex(Fraction(-1, 4), 0)),
    ((3, 1), 0): ("x1^3*x2", DecayIndex(Fraction(-1, 3), 0)),
    ((2, 2), 0): ("x1^2*x2^2", DecayIndex(Fraction(-1, 2), 1)),
    ((2, 1, 1), 0): ("x1^2*x2*(x1+x2)", DecayIndex(Fraction(-1, 2), 1)),
    ((2,), 1): ("x1^2*(x1^2+x2^2)", DecayIndex(Fraction(-1, 2), 1)),
    ((1, 1, 1, 1), 0): ("x1*x2*(x1^2+a1*x1*x2+a2*x2^2)", DecayIndex(Fraction(-1, 2), 0)),
    ((1, 1), 1): ("(x1^2+x2^2)*(x1^2+a1*x1*x2+a2*x2^2)", DecayIndex(Fraction(-1, 2), 0)),
    ((), 2): ("(x1^2+x2^2)*(x1^2+a1*x1*x2+a2*x2^2)", DecayIndex(Fraction(-1, 2), 0)),
}


def classify_binary_quartic(coeffs: Sequence) -> QuarticClass:
    """Normal form of f = Σ a_k x1^{4−k} x2^k up to real linear changes of variables."""
    coeffs = [Fraction(c) for c in coeffs]
    if len(coeffs) != 5:
        raise ValidationError(f"a binary quartic has 5 coefficients, got {len(coeffs)}")
    if not any(coeffs):
        raise DegenerateInputError("the zero form has no normal form")
    p = _to_poly(coeffs)
    finite = [r.multiplicity for r in real_root_multiplicities(p)] if p.degree() > 0 else []
    # a drop in degree of f(x, 1) is a real factor x2^k
    at_infinity = 4 - p.degree()
    mults = tuple(sorted(finite + ([at_infinity] if at_infinity else []), reverse=True))
    pairs = (4 - sum(mults)) // 2
    label, index = _QUARTIC_TABLE[(mults, pairs)]
    coarse = DecayIndex(Fraction(-1, 4), 0) if mults[:1] == (4,) else DecayIndex(Fraction(-1, 3), 0)
    return QuarticClass(label, index, coarse, mults, pairs)


@dataclass(frozen=True)
class ProportionalityResult:
    kind: str  # "no-mult-4-root" or "proportional"
    c0: Optional[Fraction] = None
    root: Optional[Fraction] = None


def quartic_proportionality(f: Sequence, g: Sequence, c) -> ProportionalityResult:
    """Decide whether f² + c·g² = s(r − r₀)⁴ for quadratics f, g; then f = c₀ g."""
    c = Fraction(c)
    if c == 0:
        raise ValidationError("the constant c must be nonzero")
    F, G = _to_poly(f), _to_poly(g)
    if F.is_zero or G.is_zero:
        raise DegenerateInputError("f and g must both be nonzero quadratics")
    r = F.gens[0]
    H = F**2 + sympy.Rational(c.numerator, c.denominator) * G**2
    if H.is_zero:
        raise DegenerateInputError("f² + c·g² vanishes identically")
    if H.degree() != 4:
        return ProportionalityResult("no-mult-4-root")
    lc = H.LC()
    r0 = -H.coeff_monomial(r**3) / (4 * lc)
    if H != sympy.Poly(lc * (r - r0) ** 4, r, domain=sympy.QQ):
        return ProportionalityResult("no-mult-4-root")
    c0 = F.LC() / G.LC() if F.degree() == G.degree() else None
    if c0 is None or F != G * c0:
        raise LatwaveError("f² + c·g² is a fourth power but f and g are not proportional")
    to_fraction = lambda q: Fraction(int(sympy.Rational(q).p), int(sympy.Rational(q).q))
    return ProportionalityResult("proportional", to_fraction(c0), to_fraction(r0))


# ---------------------------------------------------------------------------
# report

def newton_report(s: SupportSet, phase: Optional[PolynomialPhase] = None) -> dict:
    """JSON-ready summary: support, exact distance, principal face, 2-D adaptedness."""
    dist = newton_distance(s)
    face = principal_face(s, dist)
    adapted = "n/a"
    if s.d == 2:
        phase = phase or PolynomialPhase(2, {g: 1 for g in s.points})
        if phase.is_critical_germ():
            adapted = is_adapted_2d(phase).adapted
    return {"support": [list(g) for g in s.sorted_points()], "distance": str(dist),
            "principal_face": face.to_json(), "adapted": adapted}
