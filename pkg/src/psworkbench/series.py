"""Poincaré series on orbit balls and critical-exponent estimates.

Everything here works from the sorted distances of an :class:`OrbitBall`;
annulus ``n`` holds the elements with ``n - 1 < d <= n``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .groups import OrbitBall, annuli_counts, annulus_index

DEFAULT_EPS_DIV = 0.01
BOOTSTRAP_SEED = 20240607


class InsufficientData(ValueError):
    pass


class NoCrossing(RuntimeError):
    def __init__(self, message: str, direction: str, slopes: dict | None = None):
        super().__init__(message)
        self.direction = direction
        self.slopes = slopes or {}


def poincare_partial(ball: OrbitBall, s: float) -> float:
    """Truncated series ``sum exp(-s d(p, alpha q))`` over the ball (identity included)."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    return float(np.sum(np.exp(-s * ball.distances)))


def _annulus_slices(ball: OrbitBall) -> list[slice]:
    """Contiguous index ranges of annuli ``0 .. floor(radius)`` in the distance-sorted ball."""
    n_max = int(math.floor(ball.radius + 1e-9))
    idx = annulus_index(ball.distances)
    edges = np.searchsorted(idx, np.arange(n_max + 2), side="left")
    return [slice(int(edges[n]), int(edges[n + 1])) for n in range(n_max + 1)]


def annulus_sums(ball: OrbitBall, s: float) -> np.ndarray:
    """``A_n(s) = sum over annulus n of exp(-s d)`` for ``n = 0 .. floor(radius)``.

    Each annulus is a pairwise ``np.sum`` over a fixed index range, so the
    result does not depend on how the ball was produced.
    """
    w = np.exp(-s * ball.distances)
    return np.array([np.sum(w[sl]) for sl in _annulus_slices(ball)])


def partial_sums(ball: OrbitBall, s: float) -> np.ndarray:
    """Partial sums ``P_n(s)`` over the balls of radius ``n = 0 .. floor(radius)``.

    Accumulated from nonnegative annulus sums, so nondecreasing in ``n`` exactly.
    """
    return np.cumsum(annulus_sums(ball, s))


def _outer_half(n_max: int) -> np.ndarray:
    return np.arange(int(math.ceil(n_max / 2)), n_max + 1)


def _ls_slope(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


@dataclass
class DeltaEstimate:
    value: float
    interval: tuple[float, float]
    raw_slope: float
    n_points: int
    low_confidence: bool
    out_of_range: bool

    def to_dict(self) -> dict:
        return asdict(self)


def estimate_delta_counting(annuli: Sequence[int], n_boot: int = 400, seed: int = BOOTSTRAP_SEED,
                            max_ci_width: float = 0.2) -> DeltaEstimate:
    """Growth rate of the cumulative count ``N(n)`` from a least-squares fit of ``ln N`` on ``n``.

    The fit uses the outer half of the annuli.  The interval is a percentile
    bootstrap over the fitted points with a fixed seed.
    """
    a = np.asarray(annuli, dtype=float)
    if np.count_nonzero(a) < 5:
        raise InsufficientData(f"need at least 5 nonempty annuli, got {np.count_nonzero(a)}")
    N = np.cumsum(a)
    n = _outer_half(len(a) - 1)
    n = n[N[n] > 0]
    y = np.log(N[n])
    slope = _ls_slope(n, y)
    rng = np.random.default_rng(seed)
    boot = []
    for _ in range(n_boot):
        pick = rng.integers(0, len(n), len(n))
        if np.ptp(n[pick]) > 0:
            boot.append(_ls_slope(n[pick], y[pick]))
    lo, hi = (np.percentile(boot, [2.5, 97.5]) if boot else (-np.inf, np.inf))
    value = max(slope, 0.0)
    low = len(n) < 5 or (hi - lo) > max_ci_width
    return DeltaEstimate(value, (max(float(lo), 0.0), max(float(hi), 0.0)), slope, len(n), bool(low),
                         not 0.0 <= value <= 1.0)


def increment_slope(ball: OrbitBall, s: float) -> float:
    """Least-squares slope of ``ln A_n(s)`` over the nonempty outer-half annuli.

    Positive means the truncated series is still growing geometrically at
    ``s``; negative means its tail shrinks geometrically.
    """
    A = annulus_sums(ball, s)
    n = _outer_half(len(A) - 1)
    n = n[A[n] > 0]
    if len(n) < 3:
        raise InsufficientData("fewer than 3 nonempty outer annuli")
    return _ls_slope(n, np.log(A[n]))


def default_s_grid(step: float = 0.05, top: float = 1.2) -> np.ndarray:
    return np.round(np.arange(0.0, top + step / 2, step), 12)


def estimate_delta_partial_sum(ball: OrbitBall, s_grid: Sequence[float] | None = None,
                               zero_tol: float = 1e-9, xtol: float = 1e-6) -> float:
    """Exponent at which the truncated series switches from growing to converging.

    The ball's partial sums ``P_n(s)`` grow by ``A_n(s)`` per unit radius.
    The sign of the log-slope of ``A_n(s)`` over the outer half changes at the
    critical exponent; it is scanned on ``s_grid`` and the first sign change is
    refined by bisection.  If the slope is already ``<= 0`` at the start of the
    grid the estimate is the grid start.
    """
    grid = default_s_grid() if s_grid is None else np.asarray(sorted(s_grid), dtype=float)
    if len(grid) < 2:
        raise ValueError("s_grid needs at least two points")
    if np.any(np.diff(grid) > 0.05 + 1e-12):
        raise ValueError("s_grid step must be at most 0.05")
    slopes = {float(s): increment_slope(ball, s) for s in grid}
    vals = list(slopes.values())
    if vals[0] <= zero_tol:
        return float(grid[0])
    for k in range(1, len(grid)):
        if vals[k] <= 0:
            lo, hi = float(grid[k - 1]), float(grid[k])
            while hi - lo > xtol:
                mid = 0.5 * (lo + hi)
                if increment_slope(ball, mid) > 0:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
    raise NoCrossing(f"series still growing at s = {grid[-1]}", "diverging", slopes)


class Divergence(str, enum.Enum):
    DIVERGING = "diverging"
    CONVERGING = "converging"
    INCONCLUSIVE = "inconclusive"


@dataclass
class DivergenceResult:
    verdict: Divergence
    slope: float
    tail_log_slope: float

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "slope": self.slope, "tail_log_slope": self.tail_log_slope}


def divergence_diagnostic(ball: OrbitBall, s: float, eps_div: float = DEFAULT_EPS_DIV) -> DivergenceResult:
    """Slope test on ``P_n(s)`` against ``n`` over the outer half of the ball.

    ``slope > eps_div`` reads as diverging.  A flat partial sum whose annulus
    increments also decay geometrically reads as converging.  Anything else is
    inconclusive.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    P = partial_sums(ball, s)
    n = _outer_half(len(P) - 1)
    if len(n) < 2:
        return DivergenceResult(Divergence.INCONCLUSIVE, float("nan"), float("nan"))
    slope = _ls_slope(n, P[n])
    try:
        tail = increment_slope(ball, s)
    except InsufficientData:
        tail = float("nan")
    if slope > eps_div:
        verdict = Divergence.DIVERGING
    elif abs(slope) <= eps_div and tail < 0:
        verdict = Divergence.CONVERGING
    else:
        verdict = Divergence.INCONCLUSIVE
    return DivergenceResult(verdict, slope, tail)


@dataclass(frozen=True)
class WeightTable:
    """Piecewise-constant rate ``eps(u)``: value ``rates[i]`` on ``[breaks[i], breaks[i+1])``.

    ``breaks[0]`` must be 0 and the last rate extends to infinity.  The
    weight is ``h(t) = exp(integral_0^t eps)``.
    """

    breaks: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        b = np.asarray(self.breaks, float)
        r = np.asarray(self.rates, float)
        if len(b) != len(r) or len(b) == 0:
            raise ValueError("breaks and rates must have the same nonzero length")
        if b[0] != 0 or np.any(np.diff(b) <= 0):
            raise ValueError("breaks must start at 0 and increase strictly")
        if np.any(r < 0) or np.any(np.diff(r) > 0):
            raise ValueError("rates must be nonnegative and nonincreasing")

    @classmethod
    def constant(cls, rate: float = 0.0) -> "WeightTable":
        return cls((0.0,), (float(rate),))

    def log_weight(self, t) -> np.ndarray:
        t = np.asarray(t, float)
        b = np.asarray(self.breaks, float)
        r = np.asarray(self.rates, float)
        ends = np.append(b[1:], np.inf)
        seg = np.clip(t[..., None] - b, 0.0, ends - b)
        return np.sum(seg * r, axis=-1)

    def __call__(self, t) -> np.ndarray:
        return np.exp(self.log_weight(t))


def modified_series_partial(ball: OrbitBall, s: float, weight: WeightTable) -> float:
    """Weighted truncated series ``sum h(d) exp(-s d)``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    terms = weight(ball.distances) * np.exp(-s * ball.distances)
    return float(np.sum(terms))


@dataclass
class PoincareReport:
    preset: str
    radius: float
    s_grid: list[float]
    partial_sums: dict[str, list[float]]
    annuli: list[int]
    delta_counting: DeltaEstimate
    delta_partial_sum: float | None
    partial_sum_error: str | None
    divergence: DivergenceResult
    elements: int
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "preset": self.preset,
            "radius": self.radius,
            "elements": self.elements,
            "annuli": self.annuli,
            "s_grid": self.s_grid,
            "partial_sums": self.partial_sums,
            "delta_counting": self.delta_counting.to_dict(),
            "delta_partial_sum": self.delta_partial_sum,
            "delta_partial_sum_error": self.partial_sum_error,
            "divergence_at_delta": self.divergence.to_dict(),
            "flags": self.flags,
        }


def poincare_report(ball: OrbitBall, s_grid: Sequence[float] | None = None,
                    eps_div: float = DEFAULT_EPS_DIV) -> PoincareReport:
    grid = default_s_grid() if s_grid is None else np.asarray(s_grid, float)
    annuli = annuli_counts(ball)
    dc = estimate_delta_counting(annuli)
    flags = []
    try:
        dps, err = estimate_delta_partial_sum(ball, grid), None
    except (NoCrossing, InsufficientData) as exc:
        dps, err = None, str(exc)
        flags.append("partial_sum_no_crossing")
    if dc.low_confidence:
        flags.append("delta_counting_low_confidence")
    if dc.out_of_range or (dps is not None and not 0 <= dps <= 1):
        flags.append("delta_outside_unit_interval")
    if not ball.complete:
        flags.append("incomplete_ball")
    sums = {f"{s:.2f}": partial_sums(ball, s).tolist() for s in grid}
    return PoincareReport(ball.label, ball.radius, [float(s) for s in grid], sums, annuli.tolist(), dc,
                          dps, err, divergence_diagnostic(ball, dc.value, eps_div), len(ball), flags)
