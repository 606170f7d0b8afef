"""
Trajectory diagnostics: Lyapunov decay, empirical force-of-infection bounds,
permanence windows and the translation-defect probe.
"""
import logging
import math
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from analysis.bounds import PermanenceBounds
from models.errors import InvalidArgumentError
from models.saiqh import COMPARTMENTS, State
from solver.integrator import Trajectory

logger = logging.getLogger(__name__)

ENVELOPE_SLACK = 1e-6
RELATIVE_TOL = 1e-9
PERMANENCE_EPS = 1e-6


def lyapunov_v(z: State, zhat: State) -> float:
    """V = sum_i |x_i - xhat_i|."""
    return float(sum(abs(a - b) for a, b in zip(z.as_tuple(), zhat.as_tuple())))


class LyapunovRow(NamedTuple):
    t: float
    V: float
    envelope: float
    ok: bool


class LyapunovReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    psi: float
    rows: Tuple[LyapunovRow, ...]
    passed: bool
    worst_margin: float
    violations: Tuple[float, ...]


class LambdaBounds(NamedTuple):
    lower: float
    upper: float

    @property
    def satisfies_h1(self) -> bool:
        return 0.0 < self.lower <= self.upper


class CompartmentCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    observed_min: float
    observed_max: float
    lower_margin: float
    upper_margin: float
    ok: bool


class PermanenceReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: float
    M: float
    eps: float
    window_start: float
    compartments: Tuple[CompartmentCheck, ...]
    failing: Tuple[str, ...]
    passed: bool


def _step_factors(traj: Trajectory, psi: float) -> np.ndarray:
    times, mus = traj.times(), traj.mus()
    steps = np.diff(times)
    scattered = mus[:-1] > 0.0
    return np.where(scattered, 1.0 - psi * mus[:-1], np.exp(-psi * steps))


def lyapunov_decay_check(traj1: Trajectory, traj2: Trajectory, psi: float) -> LyapunovReport:
    """
    Check V along two trajectories against the decay rate ``psi``.

    Each step must satisfy V(next) <= V * factor + tol, where the factor is
    1 - psi*mu on scattered points and exp(-psi*h) on dense runs. The whole
    run must stay under V(t0) * e_{-psi}(t, t0) * (1 + 1e-6) + tol, with
    tol = 1e-9 * V(t0). Violations are reported, not raised.
    """
    if traj1.scale != traj2.scale:
        raise InvalidArgumentError("trajectories were computed on different time scales")
    if traj1.params != traj2.params:
        raise InvalidArgumentError("trajectories were computed with different parameters")
    if len(traj1) != len(traj2):
        raise InvalidArgumentError("trajectories have different lengths")
    if not math.isfinite(psi):
        raise InvalidArgumentError(f"decay rate must be finite, got {psi}")

    V = np.abs(traj1.matrix() - traj2.matrix()).sum(axis=1)
    times = traj1.times()
    V0 = float(V[0])
    tol = RELATIVE_TOL * V0

    factors = _step_factors(traj1, psi)
    decay = np.concatenate(([1.0], np.cumprod(factors)))
    envelope = V0 * decay

    envelope_bound = envelope * (1.0 + ENVELOPE_SLACK) + tol
    step_bound = np.concatenate(([V0 + tol], V[:-1] * factors + tol))
    margins = np.minimum(envelope_bound - V, step_bound - V)
    ok = margins >= 0.0

    rows = tuple(
        LyapunovRow(float(t), float(v), float(e), bool(flag))
        for t, v, e, flag in zip(times, V, envelope, ok)
    )
    violations = tuple(float(t) for t, flag in zip(times, ok) if not flag)
    if violations:
        logger.warning(f"Lyapunov decay violated at {len(violations)} point(s) for psi={psi!r}")

    return LyapunovReport(
        psi=psi,
        rows=rows,
        passed=not violations,
        worst_margin=float(np.min(margins)),
        violations=violations,
    )


def _window_start(n: int, transient_fraction: float) -> int:
    if not 0.0 <= transient_fraction < 1.0:
        raise InvalidArgumentError(f"transient_fraction must lie in [0, 1), got {transient_fraction}")
    start = int(math.floor(transient_fraction * n))
    if start >= n:
        raise InvalidArgumentError("post-transient window is empty")
    return start


def empirical_lambda_bounds(traj: Trajectory, transient_fraction: float = 0.5) -> LambdaBounds:
    """Min and max of the force of infection over the post-transient samples."""
    start = _window_start(len(traj), transient_fraction)
    window = traj.lambdas()[start:]
    bounds = LambdaBounds(float(np.min(window)), float(np.max(window)))
    if not bounds.satisfies_h1:
        logger.warning(f"Empirical lambda bounds {bounds} violate (H1)")
    return bounds


def permanence_check(
    traj: Trajectory, bounds: PermanenceBounds, transient_fraction: float = 0.5
) -> PermanenceReport:
    """Confront the post-transient samples with the band [m - eps, M + eps], eps = 1e-6*M."""
    start = _window_start(len(traj), transient_fraction)
    window = traj.matrix()[start:]
    eps = PERMANENCE_EPS * bounds.M

    checks: List[CompartmentCheck] = []
    for i, name in enumerate(COMPARTMENTS):
        column = window[:, i]
        lo, hi = float(np.min(column)), float(np.max(column))
        checks.append(
            CompartmentCheck(
                name=name,
                observed_min=lo,
                observed_max=hi,
                lower_margin=lo - bounds.m,
                upper_margin=bounds.M - hi,
                ok=bool(lo >= bounds.m - eps and hi <= bounds.M + eps),
            )
        )

    failing = tuple(c.name for c in checks if not c.ok)
    if failing:
        logger.info(f"Permanence band missed by {', '.join(failing)}")
    return PermanenceReport(
        m=bounds.m,
        M=bounds.M,
        eps=eps,
        window_start=traj.samples[start].t,
        compartments=tuple(checks),
        failing=failing,
        passed=not failing,
    )


def translation_defect(traj: Trajectory, tau: float, t_from: Optional[float] = None) -> float:
    """
    sup over admissible t >= t_from of max_i |x_i(t + tau) - x_i(t)|.

    A shifted point inside a dense segment is linearly interpolated between
    samples; elsewhere it has to coincide with a grid point.
    """
    if not (math.isfinite(tau) and tau >= 0.0):
        raise InvalidArgumentError(f"translation tau must be a nonnegative number, got {tau}")

    scale = traj.scale
    tol = scale.tolerance()
    times = traj.times()
    X = traj.matrix()
    lower = times[0] if t_from is None else t_from

    defect = -1.0
    for i, t in enumerate(times):
        if t < lower - tol:
            continue
        target = t + tau
        seg = scale.locate(target)
        if seg < 0:
            continue
        j = int(np.searchsorted(times, target - tol))
        if j < len(times) and abs(times[j] - target) <= tol:
            shifted = X[j]
        else:
            a, b = scale.segments[seg]
            if a == b:
                continue
            shifted = np.array([np.interp(target, times, X[:, c]) for c in range(6)])
        defect = max(defect, float(np.max(np.abs(shifted - X[i]))))

    if defect < 0.0:
        raise InvalidArgumentError(f"no sample pair is admissible for tau={tau}")
    return defect
