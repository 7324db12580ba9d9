"""Decay-law fits |value(t)| ≈ C·t^β·log^p t and sharpness plateaus."""
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from errors import FitWindowError, ValidationError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 8
MIN_SPAN = 10.0
DEFAULT_MARGIN = 0.05
TRIM_FACTOR = 2.0


@dataclass(frozen=True)
class DecaySeries:
    t: np.ndarray
    magnitude: np.ndarray
    source: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        m = np.asarray(self.magnitude, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "magnitude", m)
        if t.shape != m.shape or t.ndim != 1:
            raise ValidationError("times and magnitudes must be 1-D arrays of equal length")
        if len(t) < MIN_SAMPLES:
            raise FitWindowError(f"{self.source or 'series'}: {len(t)} samples, at least {MIN_SAMPLES} required")
        if np.any(np.diff(t) <= 0) or t[0] <= 0:
            raise ValidationError("sample times must be positive and strictly increasing")
        if t[-1] / t[0] < MIN_SPAN:
            raise FitWindowError(f"{self.source or 'series'}: span t ∈ [{t[0]:g}, {t[-1]:g}] is shorter than one decade")
        if np.any(~np.isfinite(m)) or np.any(m <= 0):
            raise ValidationError("magnitudes must be finite and positive")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, float]], source: str = "") -> "DecaySeries":
        pairs = list(pairs)
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]), source)

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class DecayFitResult:
    beta: float
    p: int
    C: float
    residual: float
    residual_p0: float
    residual_p1: float
    window: Tuple[float, float]
    source: str = ""

    @property
    def score(self) -> float:
        """Ratio of the p = 1 residual to the p = 0 residual."""
        if self.residual_p0 == 0.0:
            return np.inf if self.residual_p1 > 0.0 else 1.0
        return self.residual_p1 / self.residual_p0

    @property
    def key(self):
        return (self.beta, self.p)

    def to_json(self) -> dict:
        return {"source": self.source, "beta": self.beta, "p": self.p, "C": self.C,
                "residual": self.residual, "residual_p0": self.residual_p0,
                "residual_p1": self.residual_p1, "window": list(self.window)}


def _least_squares(logt: np.ndarray, target: np.ndarray):
    A = np.stack([np.ones_like(logt), logt], axis=1)
    coef, *_ = np.linalg.lstsq(A, target, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - target) ** 2)))
    return float(coef[0]), float(coef[1]), rms


def _fit_window(t: np.ndarray, m: np.ndarray, margin: float):
    logt = np.log(t)
    logm = np.log(m)
    logC0, beta0, rms0 = _least_squares(logt, logm)
    if t[0] > 1.0:
        logC1, beta1, rms1 = _least_squares(logt, logm - np.log(logt))
    else:
        logC1, beta1, rms1 = np.nan, np.nan, np.inf
    # ties go to p = 0
    if rms1 < (1.0 - margin) * rms0:
        return beta1, 1, float(np.exp(logC1)), rms1, rms0, rms1
    return beta0, 0, float(np.exp(logC0)), rms0, rms0, rms1


def _windows(t: np.ndarray) -> List[int]:
    """Start indices obtained by dropping whole leading decades."""
    starts = [0]
    lo = t[0]
    while True:
        lo *= 10.0
        start = int(np.searchsorted(t, lo))
        if len(t) - start < MIN_SAMPLES or t[-1] / t[start] < MIN_SPAN:
            return starts
        starts.append(start)


def fit_decay(series: DecaySeries, margin: float = DEFAULT_MARGIN) -> DecayFitResult:
    """Fit log m = log C + β log t + p log log t for p ∈ {0, 1}.

    p = 1 is selected only when its residual beats p = 0 by the margin. The
    smallest decade of t is discarded while the residual stays above twice the
    best residual over all admissible windows.
    """
    if not 0.0 <= margin < 1.0:
        raise ValidationError("model-selection margin must lie in [0, 1)")
    t, m = series.t, series.magnitude
    starts = _windows(t)
    fits = [_fit_window(t[s:], m[s:], margin) for s in starts]
    best = min(f[3] for f in fits)
    chosen = 0
    while fits[chosen][3] > TRIM_FACTOR * best and chosen + 1 < len(fits):
        chosen += 1
    if chosen:
        logger.debug("%s: trimmed fit window to t >= %g", series.source or "series", t[starts[chosen]])
    beta, p, C, rms, rms0, rms1 = fits[chosen]
    return DecayFitResult(float(beta), p, C, rms, rms0, rms1,
                          (float(t[starts[chosen]]), float(t[-1])), series.source)


@dataclass(frozen=True)
class PlateauResult:
    c0: Optional[float]
    flatness: float
    conclusive: bool
    window: Tuple[float, float]
    exponent: float
    mean: float = field(repr=False, default=np.nan)

    def to_json(self) -> dict:
        return {"c0": self.c0, "flatness": self.flatness, "conclusive": self.conclusive,
                "window": list(self.window), "exponent": self.exponent}


def sharpness_plateau(series: DecaySeries, exponent: float, bound: float = DEFAULT_MARGIN) -> PlateauResult:
    """Plateau of t^exponent·m(t) over the last third of the samples.

    A flatness above the bound yields an inconclusive result with no constant.
    """
    scaled = series.magnitude * series.t ** float(exponent)
    tail = max(2, -(-len(scaled) // 3))
    window = scaled[-tail:]
    mean = float(np.mean(window))
    flatness = float(np.max(np.abs(window / mean - 1.0)))
    conclusive = flatness <= bound
    if not conclusive:
        logger.warning("%s: plateau flatness %.3g exceeds %.3g", series.source or "series", flatness, bound)
    return PlateauResult(mean if conclusive else None, flatness, conclusive,
                         (float(series.t[-tail]), float(series.t[-1])), float(exponent), mean)


def remainder_fit(series: DecaySeries, exponent: float, c0: Optional[float] = None,
                  margin: float = DEFAULT_MARGIN) -> DecayFitResult:
    """Decay of the remainder relative to the main term c0·t^(−exponent).

    With c0 given the remainder is |t^exponent·m/c0 − 1|. Without it the
    differences of s = t^exponent·m between consecutive samples are fitted
    instead: for s = c0 + a·t^δ·log^p t they decay like t^δ·log^p t on a
    geometric time grid, independently of c0.
    """
    scaled = series.magnitude * series.t ** float(exponent)
    if c0 is not None:
        if c0 == 0:
            raise ValidationError("the plateau constant must be nonzero")
        t, rel = series.t, np.abs(scaled / c0 - 1.0)
    else:
        t = np.sqrt(series.t[1:] * series.t[:-1])
        rel = np.abs(np.diff(scaled)) / np.abs(scaled[1:])
    keep = rel > 0.0
    return fit_decay(DecaySeries(t[keep], rel[keep], f"{series.source}:remainder"), margin)
