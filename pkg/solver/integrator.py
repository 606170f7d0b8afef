"""
Integration of the SAIQH sigma-form system along a time scale.

Scattered points use the closed-form per-component solve of the implicit
equations; dense segments use classical RK4 on the mu = 0 reduction.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from models.errors import DomainError, InvalidArgumentError, SolverNegativityError
from models.saiqh import (
    Coefficients,
    SaiqhParams,
    State,
    coefficients,
    flow_terms,
    force_from_values,
    total_population,
    validate,
)
from utils.timescale import TimeScale, iterate

logger = logging.getLogger(__name__)

MAX_HALVINGS = 10

Vector = Tuple[float, ...]


class Sample(BaseModel):
    """One trajectory point."""
    model_config = ConfigDict(frozen=True)

    t: float
    mu: float
    state: State


class Trajectory(BaseModel):
    """Solver output: samples aligned one-to-one with ``iterate(scale)``."""
    model_config = ConfigDict(frozen=True)

    scale: TimeScale
    params: SaiqhParams
    samples: Tuple[Sample, ...]

    def __len__(self) -> int:
        return len(self.samples)

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    def mus(self) -> np.ndarray:
        return np.array([s.mu for s in self.samples], dtype=float)

    def matrix(self) -> np.ndarray:
        """States as an (n, 6) array."""
        return np.array([s.state.as_tuple() for s in self.samples], dtype=float).reshape(-1, 6)

    def totals(self) -> np.ndarray:
        return self.matrix().sum(axis=1)

    def lambdas(self) -> np.ndarray:
        """Force of infection at every sample."""
        return np.array([force_from_values(self.params, s.state.as_tuple()) for s in self.samples], dtype=float)


def _scattered(c: Coefficients, x: Sequence[float], mu: float) -> Vector:
    inflows, outflows = flow_terms(c, x)
    return tuple(
        (value + mu * inflow) / (1.0 + mu * rate)
        for value, inflow, rate in zip(x, inflows, outflows)
    )


def _field(c: Coefficients, x: Sequence[float]) -> Vector:
    inflows, outflows = flow_terms(c, x)
    return tuple(inflow - rate * value for inflow, rate, value in zip(inflows, outflows, x))


def _rk4(c: Coefficients, x: Sequence[float], h: float) -> Vector:
    k1 = _field(c, x)
    k2 = _field(c, [xi + 0.5 * h * ki for xi, ki in zip(x, k1)])
    k3 = _field(c, [xi + 0.5 * h * ki for xi, ki in zip(x, k2)])
    k4 = _field(c, [xi + h * ki for xi, ki in zip(x, k3)])
    return tuple(
        xi + h * (a + 2.0 * (b + d) + e) / 6.0
        for xi, a, b, d, e in zip(x, k1, k2, k3, k4)
    )


def _dense(c: Coefficients, x: Sequence[float], h: float, depth: int = 0) -> Vector:
    y = _rk4(c, x, h)
    if min(y) >= 0.0:
        return y
    if depth >= MAX_HALVINGS:
        raise SolverNegativityError(
            f"RK4 step stays negative after {MAX_HALVINGS} halvings (h={h!r})"
        )
    logger.debug(f"Negative RK4 component, halving step to {h / 2!r}")
    midpoint = _dense(c, x, h / 2.0, depth + 1)
    return _dense(c, midpoint, h / 2.0, depth + 1)


def step_scattered(params: SaiqhParams, s: State, mu: float) -> State:
    """
    Advance one scattered point of graininess ``mu``.

    x_i(sigma) = (x_i + mu*in_i(s)) / (1 + mu*out_i(s)), lambda taken at ``s``.
    """
    if not mu > 0:
        raise InvalidArgumentError(f"scattered step needs mu > 0, got {mu}")
    return State.from_sequence(_scattered(coefficients(params), s.as_tuple(), mu))


def step_dense(params: SaiqhParams, s: State, h: float) -> State:
    """One RK4 step of length ``h``, halved recursively on negativity."""
    if not h > 0:
        raise InvalidArgumentError(f"dense step needs h > 0, got {h}")
    return State.from_sequence(_dense(coefficients(params), s.as_tuple(), h))


def simulate(params: SaiqhParams, scale: TimeScale, initial: State) -> Trajectory:
    """
    Walk ``iterate(scale)`` from ``initial``.

    Args:
        params: Parameters satisfying ``validate``
        scale: Time scale to integrate along
        initial: State at the first grid point, with N > 0

    Returns:
        Trajectory with one sample per grid point
    """
    violations = validate(params)
    if violations:
        raise InvalidArgumentError(f"invalid parameters: {'; '.join(violations)}")
    if total_population(initial) <= 0.0:
        raise DomainError("initial total population N must be positive")

    c = coefficients(params)
    points = iterate(scale)
    x: Vector = initial.as_tuple()
    states: List[Vector] = [x]

    for current, following in zip(points, points[1:]):
        try:
            if current.mu > 0.0:
                x = _scattered(c, x, current.mu)
            else:
                x = _dense(c, x, following.t - current.t)
        except (DomainError, SolverNegativityError) as exc:
            raise type(exc)(f"{exc} (at t={current.t!r})") from exc
        states.append(x)

    samples = tuple(
        Sample(t=point.t, mu=point.mu, state=State.from_sequence(state))
        for point, state in zip(points, states)
    )
    logger.debug(f"Simulated {len(samples)} samples on [{scale.start}, {scale.end}]")
    return Trajectory(scale=scale, params=params, samples=samples)
