"""
SAIQH compartment model: parameters, state, force of infection and the
delta-form right-hand side.
"""
import logging
from fractions import Fraction
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from models.errors import DomainError, InvalidArgumentError

logger = logging.getLogger(__name__)

COMPARTMENTS = ("x1", "x2", "x3", "x4", "x5", "x6")
COMPARTMENT_LABELS = ("S", "A", "I", "Q", "H", "H_IC")

_TOL = 1e-12


def parse_number(value: Any) -> Any:
    """Evaluate rational literals such as ``"22614/53"``; pass other values through."""
    if isinstance(value, str):
        text = value.strip()
        try:
            return float(Fraction(text))
        except (ValueError, ZeroDivisionError):
            return value
    return value


class SaiqhParams(BaseModel):
    """
    Rates and fractions of the SAIQH system.

    Construction only checks types; the model constraints are reported by
    ``validate`` so that analysis can describe every violation at once.
    """
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    Lambda: float
    omega: float
    n: float
    phi: float
    p: float
    gamma: float
    q: float
    nu: float
    delta1: float
    delta2: float
    f1: float
    f2: float
    f3: float
    eta: float
    k: float
    alpha1: float
    alpha2: float
    beta: float
    l_a: float = Field(..., alias="lA")
    l_h: float = Field(..., alias="lH")
    lambda_l: Optional[float] = Field(None, alias="lambdaL")
    lambda_u: Optional[float] = Field(None, alias="lambdaU")

    @field_validator("*", mode="before")
    @classmethod
    def _rational_literals(cls, value: Any) -> Any:
        return parse_number(value)

    def with_updates(self, **changes: Any) -> "SaiqhParams":
        """Copy with some fields replaced (field names, not aliases)."""
        return self.model_copy(update=changes)


class State(BaseModel):
    """Compartment sizes (S, A, I, Q, H, H_IC) at one instant."""
    model_config = ConfigDict(frozen=True)

    x1: float = Field(..., ge=0.0)
    x2: float = Field(..., ge=0.0)
    x3: float = Field(..., ge=0.0)
    x4: float = Field(..., ge=0.0)
    x5: float = Field(..., ge=0.0)
    x6: float = Field(..., ge=0.0)

    @field_validator("*", mode="before")
    @classmethod
    def _rational_literals(cls, value: Any) -> Any:
        return parse_number(value)

    def as_tuple(self) -> Tuple[float, float, float, float, float, float]:
        return (self.x1, self.x2, self.x3, self.x4, self.x5, self.x6)

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "State":
        if len(values) != 6:
            raise InvalidArgumentError(f"a state needs 6 components, got {len(values)}")
        return cls(**{name: float(v) for name, v in zip(COMPARTMENTS, values)})

    def scaled(self, factor: float) -> "State":
        return State.from_sequence([factor * v for v in self.as_tuple()])


def validate(params: SaiqhParams) -> List[str]:
    """
    Check the model constraints.

    Returns:
        One description per violated constraint; empty when all hold
    """
    violations: List[str] = []

    for name in ("beta", "l_a", "l_h"):
        if not getattr(params, name) > 0:
            label = {"l_a": "lA", "l_h": "lH"}.get(name, name)
            violations.append(f"{label} > 0")

    for name in ("Lambda", "omega", "n", "phi", "gamma", "q", "nu", "delta1",
                 "delta2", "eta", "alpha1", "alpha2"):
        if getattr(params, name) < 0:
            violations.append(f"{name} >= 0")

    fractions = {
        "p": params.p,
        "1-p": 1.0 - params.p,
        "k": params.k,
        "1-k": 1.0 - params.k,
        "q": params.q,
        "f1": params.f1,
        "1-f1": 1.0 - params.f1,
        "f2": params.f2,
        "f3": params.f3,
        "1-f2-f3": 1.0 - params.f2 - params.f3,
    }
    for label, value in fractions.items():
        if not (-_TOL <= value <= 1.0 + _TOL):
            violations.append(f"{label} in [0,1]")

    lo, hi = params.lambda_l, params.lambda_u
    if lo is not None or hi is not None:
        if lo is None or hi is None or not (0 < lo <= hi):
            violations.append("0 < lambdaL <= lambdaU")

    if violations:
        logger.debug(f"Parameter validation found {len(violations)} violation(s)")
    return violations


def total_population(s: State) -> float:
    return s.x1 + s.x2 + s.x3 + s.x4 + s.x5 + s.x6


def force_from_values(params: SaiqhParams, x: Sequence[float]) -> float:
    """Force of infection from a raw six-component vector."""
    total = x[0] + x[1] + x[2] + x[3] + x[4] + x[5]
    if total <= 0.0:
        raise DomainError("force of infection undefined: total population N = 0")
    return params.beta * (params.l_a * x[1] + x[2] + params.l_h * x[4]) / total


def force_of_infection(params: SaiqhParams, s: State) -> float:
    """
    lambda = beta * (lA*x2 + x3 + lH*x5) / N.

    A zero value is returned as-is; callers treat it as an (H1) violation.
    """
    return force_from_values(params, s.as_tuple())


class Coefficients(NamedTuple):
    """Rate constants of the six equations, precomputed once per parameter set."""
    params: SaiqhParams
    recruit: float        # Lambda
    return_q: float       # omega*n, Q -> S
    to_a: float           # 1-p, share of new infections that are asymptomatic
    vaccinate: float      # phi*p
    gamma: float
    a_to_i: float         # q*nu
    i_to_q: float         # delta1*f1
    i_to_h: float         # delta1*(1-f1)
    h_to_q: float         # delta2*(1-f2-f3)
    h_to_ic: float        # delta2*f2
    ic_to_h: float        # eta*(1-k)
    out2: float
    out3: float
    out4: float
    out5: float
    out6: float


def coefficients(params: SaiqhParams) -> Coefficients:
    gamma = params.gamma
    return Coefficients(
        params=params,
        recruit=params.Lambda,
        return_q=params.omega * params.n,
        to_a=1.0 - params.p,
        vaccinate=params.phi * params.p,
        gamma=gamma,
        a_to_i=params.q * params.nu,
        i_to_q=params.delta1 * params.f1,
        i_to_h=params.delta1 * (1.0 - params.f1),
        h_to_q=params.delta2 * (1.0 - params.f2 - params.f3),
        h_to_ic=params.delta2 * params.f2,
        ic_to_h=params.eta * (1.0 - params.k),
        out2=params.q * params.nu + gamma,
        out3=params.delta1 + gamma,
        out4=params.omega * params.n + gamma,
        out5=params.delta2 * (1.0 - params.f3) + params.alpha1 * params.f3 + gamma,
        out6=params.eta * (1.0 - params.k) + params.alpha2 * params.k + gamma,
    )


def flow_terms(c: Coefficients, x: Sequence[float]) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """
    Split the system at state ``x`` into inflows and per-capita outflow rates.

    Returns:
        (inflows, outflow_rates), so that x_i^Delta = in_i - out_i * x_i^sigma
    """
    lam = force_from_values(c.params, x)
    inflows = (
        c.recruit + c.return_q * x[3],
        lam * c.to_a * x[0],
        c.a_to_i * x[1],
        c.vaccinate * x[0] + c.i_to_q * x[2] + c.h_to_q * x[4],
        c.i_to_h * x[2] + c.ic_to_h * x[5],
        c.h_to_ic * x[4],
    )
    outflows = (
        lam * c.to_a + c.vaccinate + c.gamma,
        c.out2,
        c.out3,
        c.out4,
        c.out5,
        c.out6,
    )
    return inflows, outflows


def rhs_delta(params: SaiqhParams, s: State, s_sigma: State) -> Tuple[float, ...]:
    """
    Delta derivatives of the six equations.

    Inflow terms (and lambda) are evaluated at ``s``; each equation's own
    outflow term is evaluated at ``s_sigma``.
    """
    inflows, outflows = flow_terms(coefficients(params), s.as_tuple())
    return tuple(
        inflow - rate * value
        for inflow, rate, value in zip(inflows, outflows, s_sigma.as_tuple())
    )
