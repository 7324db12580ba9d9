"""Linear and nonlinear lattice wave equations on the periodic box ℤ_L^d.

States live on the real-FFT half spectrum. The linear flow is the exact
Fourier multiplier of ∂_t² u + ω² u = 0; the nonlinear flow ∂_t² u − Δu = F
with F = σ|u|^{k−1}u uses Strang splitting around that exact step.
"""
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import ceil
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft
from scipy.integrate import trapezoid

import utils
from errors import InadmissibleIndicesError, StepSizeError, ValidationError, WindowError

logger = logging.getLogger(__name__)

DECAY_RATES = {2: Fraction(2, 3), 3: Fraction(7, 6), 4: Fraction(3, 2), 5: Fraction(11, 6)}
DEFAULT_RECORD_R = (2.0, 4.0, np.inf)
SAMPLES_PER_UNIT_TIME = 20
WRAPAROUND_MARGIN = 5


@lru_cache(maxsize=8)
def _box_omega(d: int, L: int, m: float) -> np.ndarray:
    """ω on the rfftn frequency grid ξ_k = 2πk/L."""
    total = 0.0
    for j in range(d):
        xi = 2.0 * np.pi * (np.fft.rfftfreq(L) if j == d - 1 else np.fft.fftfreq(L))
        shape = [1] * d
        shape[j] = len(xi)
        total = total + (4.0 * np.sin(0.5 * xi) ** 2).reshape(shape)
    w = np.sqrt(total + m * m)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=8)
def _half_weights(d: int, L: int) -> np.ndarray:
    """Parseval multiplicities of the stored half spectrum."""
    n = L // 2 + 1
    wt = np.full(n, 2.0)
    wt[0] = 1.0
    if L % 2 == 0:
        wt[-1] = 1.0
    wt = wt.reshape([1] * (d - 1) + [n])
    wt.setflags(write=False)
    return wt


@dataclass(frozen=True, eq=False)
class BoxState:
    d: int
    L: int
    t: float
    u_hat: np.ndarray
    v_hat: np.ndarray
    m: float = 0.0

    def __post_init__(self):
        if self.d < 1 or self.L < 2:
            raise ValidationError(f"invalid box d={self.d}, L={self.L}")
        shape = (self.L,) * (self.d - 1) + (self.L // 2 + 1,)
        if self.u_hat.shape != shape or self.v_hat.shape != shape:
            raise ValidationError(f"spectral arrays must have shape {shape}")

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.L,) * self.d

    @classmethod
    def from_physical(cls, f1, f2, t: float = 0.0, m: float = 0.0, workers: Optional[int] = None) -> "BoxState":
        f1 = np.asarray(f1, dtype=float)
        f2 = np.asarray(f2, dtype=float)
        if f1.shape != f2.shape or len(set(f1.shape)) != 1:
            raise ValidationError("initial data must be two arrays on the same cubic box")
        return cls(f1.ndim, f1.shape[0], float(t), fft.rfftn(f1, workers=workers), fft.rfftn(f2, workers=workers), m)

    @classmethod
    def delta(cls, d: int, L: int, which: str = "f2", scale: float = 1.0, m: float = 0.0) -> "BoxState":
        """δ₀ placed in the displacement (f1) or the velocity (f2)."""
        if which not in ("f1", "f2"):
            raise ValidationError(f"delta data goes into 'f1' or 'f2', got {which!r}")
        zero = np.zeros((L,) * d)
        spike = zero.copy()
        spike[(0,) * d] = scale
        return cls.from_physical(spike, zero, m=m) if which == "f1" else cls.from_physical(zero, spike, m=m)

    def to_physical(self, workers: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        u = fft.irfftn(self.u_hat, s=self.shape, workers=workers)
        v = fft.irfftn(self.v_hat, s=self.shape, workers=workers)
        return u, v


def energy(state: BoxState) -> float:
    """|∂_t u|₂² + Σ_j |u(·+e_j) − u(·)|₂² (+ m²|u|₂²), evaluated by Parseval."""
    w = _box_omega(state.d, state.L, state.m)
    wt = _half_weights(state.d, state.L)
    dens = np.abs(state.v_hat) ** 2 + (w * np.abs(state.u_hat)) ** 2
    return float(np.sum(wt * dens) / state.L**state.d)


def linear_propagate(state: BoxState, dt: float) -> BoxState:
    """Exact step û ← cos(Δt ω)û + sin(Δt ω)/ω ∂_tû, with sin(Δt ω)/ω = Δt at ω = 0."""
    w = _box_omega(state.d, state.L, state.m)
    c = np.cos(dt * w)
    s = np.sin(dt * w)
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc = np.where(w == 0.0, dt, s / w)
    u = c * state.u_hat + sinc * state.v_hat
    v = -w * s * state.u_hat + c * state.v_hat
    return replace(state, t=state.t + dt, u_hat=u, v_hat=v)


def lattice_norm(u: np.ndarray, r: float) -> float:
    if np.isinf(r):
        return float(np.max(np.abs(u)))
    return float(np.sum(np.abs(u) ** r) ** (1.0 / r))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    norms: Dict[float, np.ndarray]
    energy: np.ndarray
    final: BoxState
    dt: float
    k: int
    sign: int
    nonlinear: bool
    richardson: Optional[float] = None

    def csv_rows(self) -> List[List[str]]:
        keys = sorted(self.norms)
        header = ["t"] + [f"l{'inf' if np.isinf(r) else utils.format_number(r)}" for r in keys] + ["energy"]
        rows = [header]
        for i, t in enumerate(self.times):
            rows.append([utils.format_number(t)] + [utils.format_number(self.norms[r][i]) for r in keys]
                        + [utils.format_number(self.energy[i])])
        return rows

    def summary(self) -> dict:
        return {"d": self.final.d, "L": self.final.L, "k": self.k, "dt": self.dt, "T": float(self.times[-1]),
                "steps": len(self.times) - 1, "nonlinear": self.nonlinear, "richardson": self.richardson,
                "energy_drift": float(np.max(np.abs(self.energy - self.energy[0])))}


def _forcing(u: np.ndarray, k: int, sign: int) -> np.ndarray:
    return sign * np.abs(u) ** (k - 1) * u


def _integrate(state: BoxState, dt: float, steps: int, k: int, sign: int, nonlinear: bool,
               record_r: Sequence[float], workers: Optional[int]):
    times = [state.t]
    u = fft.irfftn(state.u_hat, s=state.shape, workers=workers)

    def observe(st, u_phys):
        e = energy(st)
        if nonlinear:
            e -= 2.0 * sign * float(np.sum(np.abs(u_phys) ** (k + 1))) / (k + 1)
        return [lattice_norm(u_phys, r) for r in record_r], e

    norms, energies = [], []
    if record_r is not None:
        first_norms, first_energy = observe(state, u)
        norms.append(first_norms)
        energies.append(first_energy)
    for _ in range(steps):
        if nonlinear:
            kick = 0.5 * dt * fft.rfftn(_forcing(u, k, sign), workers=workers)
            state = replace(state, v_hat=state.v_hat + kick)
        state = linear_propagate(state, dt)
        u = fft.irfftn(state.u_hat, s=state.shape, workers=workers)
        if nonlinear:
            kick = 0.5 * dt * fft.rfftn(_forcing(u, k, sign), workers=workers)
            state = replace(state, v_hat=state.v_hat + kick)
        if record_r is not None:
            step_norms, e = observe(state, u)
            norms.append(step_norms)
            energies.append(e)
        times.append(state.t)
    return state, np.array(times), np.array(norms), np.array(energies), u


def nonlinear_evolve(state: BoxState, T: float, k: int, steps: int, sign: int = 1, nonlinearity: bool = True,
                     record_r: Sequence[float] = DEFAULT_RECORD_R, check: bool = True, tol: float = 1e-6,
                     data_bound: Optional[float] = None, workers: Optional[int] = None) -> Trajectory:
    """Strang splitting: half kick with F, exact linear step, half kick.

    With nonlinearity=False the steps are plain linear_propagate calls. The
    check repeats the run at half the step and rejects it when the final
    sup-norm moves by more than tol (relative).
    """
    if int(k) != k or k < 3:
        raise ValidationError(f"the power k must be an integer >= 3, got {k}")
    if steps < 1 or T <= 0:
        raise ValidationError("need a positive horizon and at least one step")
    if sign not in (1, -1):
        raise ValidationError("the nonlinearity sign must be +1 or -1")
    if data_bound is not None:
        _, f2 = state.to_physical(workers)
        if np.sum(np.abs(f2)) > data_bound:
            raise ValidationError(f"|f2|_1 = {np.sum(np.abs(f2)):.3g} exceeds the small-data bound {data_bound:g}")
    dt = T / steps
    if steps < SAMPLES_PER_UNIT_TIME * T:
        logger.warning("%d steps over T=%g is below %d samples per unit time", steps, T, SAMPLES_PER_UNIT_TIME)
    record_r = tuple(float(r) for r in record_r)
    final, times, norms, energies, u = _integrate(state, dt, steps, int(k), sign, nonlinearity, record_r, workers)
    richardson = None
    if check:
        _, _, _, _, u_half = _integrate(state, dt / 2, 2 * steps, int(k), sign, nonlinearity, None, workers)
        sup = max(float(np.max(np.abs(u))), np.finfo(float).tiny)
        richardson = float(abs(np.max(np.abs(u_half)) - np.max(np.abs(u)))) / sup
        if richardson > tol:
            raise StepSizeError(f"halving dt={dt:g} changes the final sup-norm by {richardson:.3g} (tol {tol:g})")
    logger.debug("evolved to T=%g in %d steps, richardson=%s", T, steps, richardson)
    return Trajectory(times, {r: norms[:, i] for i, r in enumerate(record_r)}, energies, final, dt, int(k), sign,
                      nonlinearity, richardson)


@dataclass(frozen=True)
class OrderEstimate:
    order: float
    dts: Tuple[float, ...]
    errors: Tuple[float, ...]


def measured_order(state: BoxState, T: float, k: int, steps_list: Sequence[int], sign: int = 1,
                   workers: Optional[int] = None) -> OrderEstimate:
    """Slope of log error against log Δt, errors taken against a run with 4× the finest step count."""
    steps_list = sorted(int(s) for s in steps_list)
    if len(steps_list) < 2:
        raise ValidationError("at least two step counts are needed to measure an order")
    reference = _integrate(state, T / (4 * steps_list[-1]), 4 * steps_list[-1], k, sign, True, None, workers)[4]
    dts, errors = [], []
    for s in steps_list:
        u = _integrate(state, T / s, s, k, sign, True, None, workers)[4]
        dts.append(T / s)
        errors.append(float(np.max(np.abs(u - reference))))
    slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
    return OrderEstimate(float(slope), tuple(dts), tuple(errors))


def _reciprocal(x) -> Fraction:
    if isinstance(x, float) and np.isinf(x):
        return Fraction(0)
    value = Fraction(x).limit_denominator(10**6) if isinstance(x, float) else Fraction(x)
    return 1 / value


@dataclass(frozen=True)
class StrichartzIndices:
    q: object
    r: object
    q_tilde: object = None
    r_tilde: object = None
    d: int = 5

    def __post_init__(self):
        if self.d not in DECAY_RATES:
            raise ValidationError(f"no decay rate known for d={self.d}")
        for name in ("q", "r", "q_tilde", "r_tilde"):
            value = getattr(self, name)
            if value is not None and _reciprocal(value) > Fraction(1, 2):
                raise ValidationError(f"{name} must be >= 2, got {value}")

    @property
    def rate(self) -> Fraction:
        return DECAY_RATES[self.d]

    def pair_admissible(self, q, r) -> bool:
        """1/q <= rate·(1/2 − 1/r)."""
        return _reciprocal(q) <= self.rate * (Fraction(1, 2) - _reciprocal(r))

    @property
    def admissible(self) -> bool:
        ok = self.pair_admissible(self.q, self.r)
        if self.q_tilde is not None and self.r_tilde is not None:
            ok = ok and self.pair_admissible(self.q_tilde, self.r_tilde)
        return ok

    @property
    def data_exponent(self) -> Fraction:
        """Exponent of the ‖f₂‖ norm on the right-hand side: 2d/(d + 2)."""
        return Fraction(2 * self.d, self.d + 2)

    def forcing_exponents(self) -> Optional[Tuple[Fraction, Fraction]]:
        """(q̃′, d·r̃′/(d + r̃′)) for the forcing norm, when tilde indices are given."""
        if self.q_tilde is None or self.r_tilde is None:
            return None
        q_dual = 1 / (1 - _reciprocal(self.q_tilde))
        r_dual = 1 / (1 - _reciprocal(self.r_tilde))
        return q_dual, self.d * r_dual / (self.d + r_dual)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    err_est: float


def _time_norm(times: np.ndarray, values: np.ndarray, q: float) -> float:
    if np.isinf(q):
        return float(np.max(values)) if len(values) else 0.0
    return float(trapezoid(values**q, times) ** (1.0 / q))


def strichartz_norm(trajectory: Trajectory, q, r) -> NormEstimate:
    """‖u‖_{L^q_t ℓ^r} by the trapezoid rule in t, with the every-other-sample rule as estimate."""
    qf, rf = float(q), float(r)
    if qf < 1 or rf < 1:
        raise ValidationError(f"norm exponents must be >= 1, got q={q}, r={r}")
    if rf not in trajectory.norms:
        raise ValidationError(f"ℓ^{r} norms were not recorded (have {sorted(trajectory.norms)})")
    values = trajectory.norms[rf]
    fine = _time_norm(trajectory.times, values, qf)
    coarse = _time_norm(trajectory.times[::2], values[::2], qf) if len(values) > 2 else fine
    return NormEstimate(fine, abs(fine - coarse))


@dataclass(frozen=True)
class RatioReport:
    max_ratio: float
    ratios: Tuple[float, ...]
    T: float
    admissible: bool

    def to_json(self) -> dict:
        return {"max_ratio": self.max_ratio, "ratios": list(self.ratios), "T": self.T, "admissible": self.admissible}


def strichartz_ratio_test(f2_samples: Sequence[np.ndarray], indices: StrichartzIndices, T: float, L: int,
                          d: int = 5, f1: Optional[np.ndarray] = None, steps_per_unit: int = SAMPLES_PER_UNIT_TIME,
                          allow_inadmissible: bool = False, workers: Optional[int] = None) -> RatioReport:
    """max over samples of ‖u‖_{L^q_t ℓ^r} / (‖f₁‖₂ + ‖f₂‖_{2d/(d+2)}) for the free flow."""
    if indices.d != d:
        raise ValidationError("indices were built for a different dimension")
    if not indices.admissible and not allow_inadmissible:
        raise InadmissibleIndicesError(f"(q, r) = ({indices.q}, {indices.r}) is not admissible for d={d}")
    if T > L / 2:
        raise WindowError(f"horizon T={T:g} exceeds the wraparound guard L/2 = {L / 2:g}")
    r = float(indices.r)
    p2 = float(indices.data_exponent)
    zero = np.zeros((L,) * d)
    f1 = zero if f1 is None else np.asarray(f1, dtype=float)
    steps = max(1, int(ceil(steps_per_unit * T)))
    ratios = []
    for f2 in f2_samples:
        f2 = np.asarray(f2, dtype=float)
        traj = nonlinear_evolve(BoxState.from_physical(f1, f2, workers=workers), T, 3, steps, nonlinearity=False,
                                record_r=(r,), check=False, workers=workers)
        lhs = strichartz_norm(traj, indices.q, r).value
        rhs = lattice_norm(f1, 2.0) + lattice_norm(f2, p2)
        if rhs == 0.0:
            raise ValidationError("initial data must not vanish")
        ratios.append(lhs / rhs)
    return RatioReport(float(max(ratios)), tuple(ratios), float(T), indices.admissible)


def random_sparse_data(d: int, L: int, count: int, nonzeros: int = 4, radius: int = 3,
                       seed: int = 0) -> List[np.ndarray]:
    """Seeded sparse ±1 data supported within the given radius of the origin."""
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        f = np.zeros((L,) * d)
        sites = rng.integers(-radius, radius + 1, size=(nonzeros, d)) % L
        f[tuple(sites.T)] = rng.choice((-1.0, 1.0), size=nonzeros)
        samples.append(f)
    return samples


def decay_bound(trajectory: Trajectory, eps: float, rate: float) -> float:
    """sup_t (1 + t)^rate |u(t)|_∞ / ε."""
    if np.inf not in trajectory.norms:
        raise ValidationError("sup norms were not recorded")
    if eps <= 0:
        raise ValidationError("ε must be positive")
    return float(np.max((1.0 + trajectory.times) ** float(rate) * trajectory.norms[np.inf]) / eps)


def wraparound_horizon(L: int) -> float:
    """Largest time for which the periodic solution is compared with the infinite lattice."""
    return L / 2 - WRAPAROUND_MARGIN
