"""
Bounded closed time scales: jump operators, graininess, grid iteration,
the time-scale exponential and the linear comparison envelope.
"""
import bisect
import logging
import math
from functools import lru_cache
from typing import Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.errors import DomainError, InvalidArgumentError, RegressivityError

logger = logging.getLogger(__name__)

# Relative guard used when sampling dense segments and matching grid points.
_GRID_EPS = 1e-9


class GridPoint(NamedTuple):
    """One enumerated point of a time scale."""
    t: float
    mu: float
    is_dense: bool


class TimeScale(BaseModel):
    """
    A bounded closed subset of the reals as disjoint closed segments.

    A segment with ``a == b`` is an isolated point. ``dense_step`` is the
    sampling step used on non-degenerate segments.
    """
    model_config = ConfigDict(frozen=True)

    segments: Tuple[Tuple[float, float], ...]
    dense_step: float = Field(0.1, gt=0.0)

    @model_validator(mode="after")
    def _check_segments(self) -> "TimeScale":
        if not self.segments:
            raise ValueError("time scale must contain at least one segment")
        previous_end = -math.inf
        for a, b in self.segments:
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError(f"segment ({a}, {b}) is not finite")
            if a > b:
                raise ValueError(f"segment ({a}, {b}) has a > b")
            if a <= previous_end:
                raise ValueError(f"segment ({a}, {b}) overlaps or touches its predecessor")
            previous_end = b
        return self

    @property
    def start(self) -> float:
        return self.segments[0][0]

    @property
    def end(self) -> float:
        return self.segments[-1][1]

    @property
    def gaps(self) -> Tuple[float, ...]:
        """Lengths of the gaps between consecutive segments."""
        return tuple(
            self.segments[k + 1][0] - self.segments[k][1]
            for k in range(len(self.segments) - 1)
        )

    @property
    def is_dense_only(self) -> bool:
        return len(self.segments) == 1 and self.segments[0][0] < self.segments[0][1]

    def tolerance(self) -> float:
        """Absolute tolerance used when matching points against the scale."""
        return _GRID_EPS * max(1.0, abs(self.start), abs(self.end))

    def locate(self, t: float) -> int:
        """Index of the segment containing ``t``, or -1 when ``t`` is not in the scale."""
        tol = self.tolerance()
        starts = [a for a, _ in self.segments]
        idx = bisect.bisect_right(starts, t + tol) - 1
        if idx < 0:
            return -1
        a, b = self.segments[idx]
        if a - tol <= t <= b + tol:
            return idx
        return -1


def make_uniform_grid(t0: float, h: float, n_steps: int) -> TimeScale:
    """
    Build the scale {t0, t0 + h, ..., t0 + n_steps*h}.

    Args:
        t0: First point
        h: Spacing, strictly positive
        n_steps: Number of steps, at least one

    Returns:
        TimeScale made of ``n_steps + 1`` isolated points
    """
    if not h > 0:
        raise InvalidArgumentError(f"grid spacing must be positive, got h={h}")
    if n_steps < 1:
        raise InvalidArgumentError(f"grid needs at least one step, got n_steps={n_steps}")
    points = tuple((t0 + k * h, t0 + k * h) for k in range(n_steps + 1))
    return TimeScale(segments=points, dense_step=h)


def make_union(segments: Iterable[Sequence[float]], dense_step: float) -> TimeScale:
    """
    Build a scale from closed segments, merging touching ones.

    Args:
        segments: (a, b) pairs with a <= b, in any order
        dense_step: Sampling step for non-degenerate segments

    Returns:
        Normalized TimeScale
    """
    pairs = sorted((float(a), float(b)) for a, b in segments)
    if not pairs:
        raise InvalidArgumentError("time scale needs at least one segment")
    if not dense_step > 0:
        raise InvalidArgumentError(f"dense_step must be positive, got {dense_step}")

    merged: List[Tuple[float, float]] = []
    for a, b in pairs:
        if a > b:
            raise InvalidArgumentError(f"segment ({a}, {b}) has a > b")
        if merged:
            prev_a, prev_b = merged[-1]
            if a < prev_b or (a == prev_b and prev_a == prev_b and a == b):
                raise InvalidArgumentError(
                    f"segments ({prev_a}, {prev_b}) and ({a}, {b}) overlap"
                )
            if a == prev_b:
                merged[-1] = (prev_a, max(prev_b, b))
                continue
        merged.append((a, b))

    return TimeScale(segments=tuple(merged), dense_step=dense_step)


def _require_member(ts: TimeScale, t: float) -> int:
    idx = ts.locate(t)
    if idx < 0:
        raise DomainError(f"t={t!r} is not a point of the time scale")
    return idx


def sigma(ts: TimeScale, t: float) -> float:
    """Forward jump operator; the maximum of the scale maps to itself."""
    idx = _require_member(ts, t)
    a, b = ts.segments[idx]
    if t < b - ts.tolerance():
        return t
    if idx + 1 < len(ts.segments):
        return ts.segments[idx + 1][0]
    return t


def rho(ts: TimeScale, t: float) -> float:
    """Backward jump operator; the minimum of the scale maps to itself."""
    idx = _require_member(ts, t)
    a, b = ts.segments[idx]
    if t > a + ts.tolerance():
        return t
    if idx > 0:
        return ts.segments[idx - 1][1]
    return t


def graininess(ts: TimeScale, t: float) -> float:
    """mu(t) = sigma(t) - t."""
    return sigma(ts, t) - t


def mu_sup(ts: TimeScale) -> float:
    """Largest graininess over every grid point except the last."""
    gaps = ts.gaps
    return max(gaps) if gaps else 0.0


@lru_cache(maxsize=256)
def _grid(ts: TimeScale) -> Tuple[GridPoint, ...]:
    points: List[GridPoint] = []
    segments = ts.segments
    for k, (a, b) in enumerate(segments):
        gap = segments[k + 1][0] - b if k + 1 < len(segments) else 0.0
        if a == b:
            points.append(GridPoint(a, gap, False))
            continue
        h = ts.dense_step
        count = math.ceil((b - a) / h - _GRID_EPS)
        for j in range(count):
            points.append(GridPoint(a + j * h, 0.0, True))
        points.append(GridPoint(b, gap, False))
    logger.debug(f"Enumerated {len(points)} grid points over {len(segments)} segments")
    return tuple(points)


def iterate(ts: TimeScale) -> Tuple[GridPoint, ...]:
    """
    Enumerate the scale deterministically.

    Isolated points are returned as-is. Each non-degenerate segment [a, b] is
    sampled at a, a + dense_step, ... and capped at b. The last point carries
    mu = 0.
    """
    return _grid(ts)


def grid_arrays(ts: TimeScale) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Times, graininess and dense flags of ``iterate(ts)`` as arrays."""
    points = _grid(ts)
    times = np.fromiter((gp.t for gp in points), dtype=float, count=len(points))
    mus = np.fromiter((gp.mu for gp in points), dtype=float, count=len(points))
    dense = np.fromiter((gp.is_dense for gp in points), dtype=bool, count=len(points))
    return times, mus, dense


def circle_minus(p: float, mu: float) -> float:
    """The time-scale inverse rate: (-)p = -p / (1 + mu*p)."""
    denominator = 1.0 + mu * p
    if denominator == 0.0:
        raise RegressivityError(f"p={p} is not regressive at mu={mu}")
    return -p / denominator


def _exponential(ts: TimeScale, t: float, t0: float, scattered, dense_rate: float) -> float:
    _require_member(ts, t)
    _require_member(ts, t0)
    tol = ts.tolerance()
    if t < t0 - tol:
        raise DomainError(f"backward exponential requested (t={t} < t0={t0})")

    product = 1.0
    dense_length = 0.0
    segments = ts.segments
    for k, (a, b) in enumerate(segments):
        lo, hi = max(a, t0), min(b, t)
        if hi > lo:
            dense_length += hi - lo
        if k + 1 < len(segments) and t0 - tol <= b < t - tol:
            product *= scattered(segments[k + 1][0] - b)
    return product * math.exp(dense_rate * dense_length)


def ts_exp(ts: TimeScale, p: float, t: float, t0: float) -> float:
    """
    Time-scale exponential e_p(t, t0) for a constant rate p and t0 <= t.

    Scattered points contribute (1 + mu*p); dense parts contribute
    exp(p * length).
    """
    def factor(mu: float) -> float:
        value = 1.0 + mu * p
        if value == 0.0:
            raise RegressivityError(f"p={p} is not regressive: 1 + mu*p = 0 at mu={mu}")
        return value

    return _exponential(ts, t, t0, factor, p)


def ts_exp_ominus(ts: TimeScale, alpha: float, t: float, t0: float) -> float:
    """e_{(-)alpha}(t, t0): factor 1/(1 + mu*alpha) on scattered points."""
    def factor(mu: float) -> float:
        value = 1.0 + mu * alpha
        if value == 0.0:
            raise RegressivityError(f"alpha={alpha} is not regressive at mu={mu}")
        return 1.0 / value

    return _exponential(ts, t, t0, factor, -alpha)


def _series(ts: TimeScale, t0: float, scattered, dense_rate: float) -> Tuple[np.ndarray, np.ndarray]:
    times, mus, dense = grid_arrays(ts)
    _require_member(ts, t0)
    start = int(np.searchsorted(times, t0 - ts.tolerance()))
    times, mus, dense = times[start:], mus[start:], dense[start:]
    if times.size == 0:
        raise DomainError(f"t0={t0} is not a grid point")

    steps = np.diff(times)
    scattered_step = ~dense[:-1]
    factors = np.where(
        scattered_step,
        scattered(mus[:-1]),
        np.exp(dense_rate * steps),
    )
    values = np.concatenate(([1.0], np.cumprod(factors)))
    return times, values


def ts_exp_series(ts: TimeScale, p: float, t0: float) -> Tuple[np.ndarray, np.ndarray]:
    """e_p(t, t0) at every grid point t >= t0, as (times, values)."""
    _, mus, dense = grid_arrays(ts)
    if np.any((1.0 + mus[~dense] * p) == 0.0):
        raise RegressivityError(f"p={p} is not regressive on this scale")
    return _series(ts, t0, lambda mu: 1.0 + mu * p, p)


def ts_exp_ominus_series(ts: TimeScale, alpha: float, t0: float) -> Tuple[np.ndarray, np.ndarray]:
    """e_{(-)alpha}(t, t0) at every grid point t >= t0."""
    _, mus, dense = grid_arrays(ts)
    if np.any((1.0 + mus[~dense] * alpha) == 0.0):
        raise RegressivityError(f"alpha={alpha} is not regressive on this scale")
    return _series(ts, t0, lambda mu: 1.0 / (1.0 + mu * alpha), -alpha)


def regressive_positive(ts: TimeScale, p: float) -> bool:
    """True iff 1 + mu(s)*p > 0 at every grid point of ``ts``."""
    return all(1.0 + gap * p > 0.0 for gap in ts.gaps)


def _check_comparison_args(b: float, alpha: float, y0: float) -> None:
    if not b > 0:
        raise InvalidArgumentError(f"comparison bound needs b > 0, got {b}")
    if not alpha > 0:
        raise InvalidArgumentError(f"comparison bound needs alpha > 0, got {alpha}")
    if y0 < 0:
        raise InvalidArgumentError(f"comparison bound needs y0 >= 0, got {y0}")


def comparison_bound(b: float, alpha: float, y0: float, ts: TimeScale, t: float, t0: float) -> float:
    """
    Envelope (b/alpha) * [1 + (alpha*y0/b - 1) * e_{-alpha}(t, t0)].

    Requires -alpha to be positively regressive on ``ts``.
    """
    _check_comparison_args(b, alpha, y0)
    if not regressive_positive(ts, -alpha):
        raise RegressivityError(f"-alpha={-alpha} is not positively regressive on this scale")
    return (b / alpha) * (1.0 + (alpha * y0 / b - 1.0) * ts_exp(ts, -alpha, t, t0))


def comparison_solution(b: float, alpha: float, y0: float, ts: TimeScale, t: float, t0: float) -> float:
    """
    Exact solution of y^Delta = b - alpha*y^sigma with y(t0) = y0.

    Same shape as ``comparison_bound`` with e_{(-)alpha} in place of e_{-alpha}.
    """
    _check_comparison_args(b, alpha, y0)
    return (b / alpha) * (1.0 + (alpha * y0 / b - 1.0) * ts_exp_ominus(ts, alpha, t, t0))


def comparison_bound_series(
    b: float, alpha: float, y0: float, ts: TimeScale, t0: float
) -> Tuple[np.ndarray, np.ndarray]:
    """``comparison_bound`` at every grid point t >= t0."""
    _check_comparison_args(b, alpha, y0)
    if not regressive_positive(ts, -alpha):
        raise RegressivityError(f"-alpha={-alpha} is not positively regressive on this scale")
    times, decay = ts_exp_series(ts, -alpha, t0)
    return times, (b / alpha) * (1.0 + (alpha * y0 / b - 1.0) * decay)


def comparison_solution_series(
    b: float, alpha: float, y0: float, ts: TimeScale, t0: float
) -> Tuple[np.ndarray, np.ndarray]:
    """``comparison_solution`` at every grid point t >= t0."""
    _check_comparison_args(b, alpha, y0)
    times, decay = ts_exp_ominus_series(ts, alpha, t0)
    return times, (b / alpha) * (1.0 + (alpha * y0 / b - 1.0) * decay)
