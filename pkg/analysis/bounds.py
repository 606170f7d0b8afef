"""
Permanence bounds, stability constants and the (H1)/(H2) certificate.
"""
import logging
import math
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from models.errors import DegenerateParameterError, InvalidArgumentError
from models.saiqh import SaiqhParams
from utils.timescale import TimeScale, grid_arrays, mu_sup, regressive_positive

logger = logging.getLogger(__name__)

# Relative difference above which a reference value is flagged.
DISCREPANCY_THRESHOLD = 1e-6

Six = Tuple[float, float, float, float, float, float]


class BoundSource(str, Enum):
    """Where the lambda bounds came from."""
    SUPPLIED = "supplied"
    EMPIRICAL = "empirical"


class Verdict(str, Enum):
    CERTIFIED = "certified"
    REJECTED = "rejected"


class PermanenceBounds(BaseModel):
    """Lower and upper permanence bounds for the six compartments."""
    model_config = ConfigDict(frozen=True)

    m_values: Six
    M_values: Six
    m: float
    M: float
    lambda_l_used: float
    lambda_u_used: float
    source: BoundSource = BoundSource.SUPPLIED
    warnings: Tuple[str, ...] = ()


class StabilityConstants(BaseModel):
    model_config = ConfigDict(frozen=True)

    A_values: Six
    B_values: Six
    A: float
    B: float


class StabilityCertificate(BaseModel):
    """Outcome of the uniform-asymptotic-stability check."""
    model_config = ConfigDict(frozen=True)

    constants: StabilityConstants
    lambda_l: float
    lambda_u: float
    M: float
    h1_holds: bool
    h2_holds: bool
    psi: float
    mu_sup: float
    min_decay_factor: float = Field(..., description="min over grid points of 1 - psi*mu")
    regressive_ok: bool
    identity_residual: float
    verdict: Verdict
    reasons: Tuple[str, ...] = ()

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED


class ReferenceComparison(BaseModel):
    """A computed value next to its reference counterpart."""
    model_config = ConfigDict(frozen=True)

    name: str
    computed: float
    reference: Optional[float] = None
    relative_difference: Optional[float] = None
    discrepancy: bool = False


def _check_lambdas(lambda_l: float, lambda_u: float) -> None:
    if lambda_l < 0 or lambda_u < 0:
        raise InvalidArgumentError(f"lambda bounds must be nonnegative, got ({lambda_l}, {lambda_u})")
    if lambda_l > lambda_u:
        raise InvalidArgumentError(f"lambdaL={lambda_l} exceeds lambdaU={lambda_u}")


def _ratio(numerator: float, denominator: float, name: str) -> float:
    if not denominator > 0:
        raise DegenerateParameterError(name, f"denominator is {denominator}")
    return numerator / denominator


def _x5_outflow(params: SaiqhParams) -> float:
    return params.delta2 * (1.0 - params.f3) + params.alpha1 * params.f3 + params.gamma


def _x6_outflow(params: SaiqhParams) -> float:
    return params.eta * (1.0 - params.k) + params.alpha2 * params.k + params.gamma


def lower_bounds(params: SaiqhParams, lambda_l: float, lambda_u: float) -> Tuple[Six, float]:
    """
    Eventual lower bounds m_1..m_6 and their minimum.

    m_1 uses lambdaU and m_2 uses lambdaL. A zero m_i is returned and logged.
    """
    _check_lambdas(lambda_l, lambda_u)
    P = params
    m1 = _ratio(P.Lambda, lambda_u * (1.0 - P.p) + P.phi * P.p + P.gamma, "lambdaU(1-p)+phi*p+gamma")
    m2 = _ratio(lambda_l * (1.0 - P.p) * m1, P.q * P.nu + P.gamma, "q*nu+gamma")
    m3 = _ratio(P.q * P.nu * m2, P.delta1 + P.gamma, "delta1+gamma")
    m4 = _ratio(P.phi * P.p * m1 + P.delta1 * P.f1 * m3, P.omega * P.n + P.gamma, "omega*n+gamma")
    m5 = _ratio(P.delta1 * (1.0 - P.f1) * m3, _x5_outflow(P), "delta2(1-f3)+alpha1*f3+gamma")
    m6 = _ratio(P.delta2 * P.f2 * m5, _x6_outflow(P), "eta(1-k)+alpha2*k+gamma")

    values: Six = (m1, m2, m3, m4, m5, m6)
    for i, value in enumerate(values, start=1):
        if value <= 0.0:
            logger.warning(f"Degenerate lower bound: m{i} = {value} is not positive")
    return values, min(values)


def upper_bounds(params: SaiqhParams, lambda_l: float, lambda_u: float) -> Tuple[Six, float]:
    """Eventual upper bounds M_1..M_6 and their maximum."""
    P = params
    if not P.gamma > 0:
        raise DegenerateParameterError("gamma", "Lambda/gamma is undefined")
    if not lambda_l > 0:
        raise InvalidArgumentError(f"upper bounds need lambdaL > 0, got {lambda_l}")
    _check_lambdas(lambda_l, lambda_u)

    ceiling = P.Lambda / P.gamma
    M1 = _ratio(P.Lambda + P.omega * P.n * ceiling,
                lambda_l * (1.0 - P.p) + P.phi * P.p + P.gamma, "lambdaL(1-p)+phi*p+gamma")
    M2 = _ratio(lambda_u * (1.0 - P.p) * M1, P.q * P.nu + P.gamma, "q*nu+gamma")
    M3 = _ratio(P.q * P.nu * M2, P.delta1 + P.gamma, "delta1+gamma")
    M4 = _ratio(P.phi * P.p * M1 + P.delta1 * P.f1 * M3
                + P.delta2 * (1.0 - P.f2 - P.f3) * ceiling,
                P.omega * P.n + P.gamma, "omega*n+gamma")
    M5 = _ratio(P.delta1 * (1.0 - P.f1) * M3 + P.eta * (1.0 - P.k) * ceiling,
                _x5_outflow(P), "delta2(1-f3)+alpha1*f3+gamma")
    M6 = _ratio(P.delta2 * P.f2 * M5, _x6_outflow(P), "eta(1-k)+alpha2*k+gamma")

    values: Six = (M1, M2, M3, M4, M5, M6)
    return values, max(values)


def permanence_bounds(
    params: SaiqhParams,
    lambda_l: float,
    lambda_u: float,
    source: BoundSource = BoundSource.SUPPLIED,
) -> PermanenceBounds:
    """Both bound families packaged together."""
    M_values, M = upper_bounds(params, lambda_l, lambda_u)
    m_values, m = lower_bounds(params, lambda_l, lambda_u)
    warnings = tuple(
        f"m{i} = {value:g} is not positive"
        for i, value in enumerate(m_values, start=1) if value <= 0.0
    )
    return PermanenceBounds(
        m_values=m_values,
        M_values=M_values,
        m=m,
        M=M,
        lambda_l_used=lambda_l,
        lambda_u_used=lambda_u,
        source=source,
        warnings=warnings,
    )


def stability_constants(params: SaiqhParams, lambda_l: float, lambda_u: float, M: float) -> StabilityConstants:
    """
    The constants A_1..A_6 and B_1..B_6, with A = min A_i and B = max B_i.

    A NaN ``M`` propagates into B_2, B_3, B_5 and B.
    """
    P = params
    if not P.Lambda > 0:
        raise DegenerateParameterError("Lambda", "the B constants divide by Lambda")

    coupling = 2.0 * P.gamma * P.beta * (1.0 - P.p) * M / P.Lambda
    A_values: Six = (
        lambda_l * (1.0 - P.p) + P.phi * P.p + P.gamma,
        P.q * P.nu + P.gamma,
        P.delta1 + P.gamma,
        P.omega * P.n + P.gamma,
        _x5_outflow(P),
        _x6_outflow(P),
    )
    B_values: Six = (
        lambda_u * (1.0 - P.p) + P.phi * P.p,
        P.q * P.nu + P.l_a * coupling,
        P.delta1 + coupling,
        P.omega * P.n,
        P.delta2 * (1.0 - P.f3) + P.l_h * coupling,
        P.eta * (1.0 - P.k),
    )
    return StabilityConstants(
        A_values=A_values,
        B_values=B_values,
        A=float(np.min(A_values)),
        B=float(np.max(B_values)),
    )


def certify(
    params: SaiqhParams,
    scale: TimeScale,
    lambda_l: float,
    lambda_u: float,
    M: Optional[float] = None,
) -> StabilityCertificate:
    """
    Check (H1) and (H2), compute psi and its regressivity on ``scale``.

    Failed hypotheses produce a rejected certificate, never an exception.

    Args:
        params: Model parameters
        scale: Time scale supplying mu^U and the grid for the identity check
        lambda_l: Lower bound on the force of infection
        lambda_u: Upper bound on the force of infection
        M: Upper permanence bound; defaults to max M_i

    Returns:
        StabilityCertificate
    """
    reasons: List[str] = []
    finite = math.isfinite(lambda_l) and math.isfinite(lambda_u)
    h1 = finite and 0.0 < lambda_l <= lambda_u
    if not h1:
        reasons.append("(H1) 0<lambdaL<=lambdaU fails")

    if M is None:
        if h1:
            M = upper_bounds(params, lambda_l, lambda_u)[1]
        else:
            logger.warning("Upper bound M unavailable because (H1) fails; B is undefined")
            M = math.nan

    constants = stability_constants(params, lambda_l, lambda_u, M)
    A, B = constants.A, constants.B
    h2 = bool(B < A)
    if not h2:
        reasons.append("(H2) B<A fails")

    mu_u = mu_sup(scale)
    psi = (A - B) / (1.0 + A * mu_u)
    if not psi > 0:
        reasons.append("psi <= 0")

    _, mus, _ = grid_arrays(scale)
    # mu is identically zero on a single dense interval
    regressive_ok = scale.is_dense_only or bool(math.isfinite(psi) and regressive_positive(scale, -psi))
    if not regressive_ok:
        reasons.append("-psi is not positively regressive")

    decay = 1.0 - psi * mus
    scaled = (1.0 + A * mu_u) * decay
    expanded = 1.0 + A * (mu_u - mus) + mus * B
    residual = float(np.max(np.abs(scaled - expanded)) / (1.0 + A * mu_u)) if mus.size else 0.0

    verdict = Verdict.CERTIFIED if not reasons else Verdict.REJECTED
    logger.debug(f"Certificate: A={A!r} B={B!r} psi={psi!r} verdict={verdict.value}")
    return StabilityCertificate(
        constants=constants,
        lambda_l=lambda_l,
        lambda_u=lambda_u,
        M=M,
        h1_holds=h1,
        h2_holds=h2,
        psi=psi,
        mu_sup=mu_u,
        min_decay_factor=float(np.min(decay)),
        regressive_ok=regressive_ok,
        identity_residual=residual,
        verdict=verdict,
        reasons=tuple(reasons),
    )


def compare_with_reference(name: str, computed: float, reference: Optional[float]) -> ReferenceComparison:
    """Pair a computed value with a reference one and flag disagreement."""
    if reference is None:
        return ReferenceComparison(name=name, computed=computed)

    scale = max(abs(reference), abs(computed), 1e-300)
    relative = abs(computed - reference) / scale
    discrepancy = not relative <= DISCREPANCY_THRESHOLD
    if discrepancy:
        logger.warning(
            f"paper-discrepancy for {name}: computed {computed!r}, reference {reference!r}"
        )
    return ReferenceComparison(
        name=name,
        computed=computed,
        reference=reference,
        relative_difference=relative,
        discrepancy=discrepancy,
    )


def compare_many(
    names: Sequence[str], computed: Sequence[float], reference: Optional[Sequence[Optional[float]]]
) -> List[ReferenceComparison]:
    """``compare_with_reference`` over parallel sequences; a missing list compares nothing."""
    reference = list(reference) if reference is not None else [None] * len(names)
    return [compare_with_reference(n, c, p) for n, c, p in zip(names, computed, reference)]
