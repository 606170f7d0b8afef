"""
Tests for SAIQH parameters, state, force of infection and the delta right-hand side.
"""
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from models.errors import DomainError, InvalidArgumentError
from models.saiqh import (
    State,
    force_of_infection,
    rhs_delta,
    total_population,
    validate,
)


def printed_rhs(P, x, xs):
    """The six equations written out term by term."""
    N = sum(x)
    lam = P.beta * (P.l_a * x[1] + x[2] + P.l_h * x[4]) / N
    return [
        P.Lambda + P.omega * P.n * x[3] - (lam * (1 - P.p) + P.phi * P.p + P.gamma) * xs[0],
        lam * (1 - P.p) * x[0] - (P.q * P.nu + P.gamma) * xs[1],
        P.q * P.nu * x[1] - (P.delta1 + P.gamma) * xs[2],
        P.phi * P.p * x[0] + P.delta1 * P.f1 * x[2] + P.delta2 * (1 - P.f2 - P.f3) * x[4]
        - (P.omega * P.n + P.gamma) * xs[3],
        P.delta1 * (1 - P.f1) * x[2] + P.eta * (1 - P.k) * x[5]
        - (P.delta2 * (1 - P.f2 - P.f3) + P.delta2 * P.f2 + P.alpha1 * P.f3 + P.gamma) * xs[4],
        P.delta2 * P.f2 * x[4] - (P.eta * (1 - P.k) + P.alpha2 * P.k + P.gamma) * xs[5],
    ]


def test_params_accept_rational_literals(example_params):
    """Test that 'a/b' strings are evaluated exactly before rounding."""
    assert example_params.Lambda == float(Fraction(22614, 53))
    assert example_params.omega == float(Fraction(1, 31))
    assert example_params.gamma == float(Fraction(47833615, 10283800))


def test_params_aliases_and_extra_keys(make_params):
    """Test the lA/lH aliases and that unknown fields are rejected."""
    params = make_params(lA=0.5, lH=0.25)
    assert params.l_a == 0.5
    assert params.l_h == 0.25
    with pytest.raises(ValidationError):
        make_params(gama=1.0)


def test_params_are_frozen(make_params):
    """Test immutability."""
    params = make_params()
    with pytest.raises(ValidationError):
        params.beta = 2.0
    assert params.with_updates(beta=2.0).beta == 2.0


def test_state_rejects_negative_components():
    """Test that negative compartments are a hard error."""
    with pytest.raises(ValidationError):
        State(x1=1, x2=-1e-9, x3=0, x4=0, x5=0, x6=0)
    with pytest.raises(InvalidArgumentError):
        State.from_sequence([1, 2, 3])


def test_state_helpers():
    """Test tuple conversion and scaling."""
    s = State.from_sequence([1, 2, 3, 4, 5, 6])
    assert s.as_tuple() == (1, 2, 3, 4, 5, 6)
    assert s.scaled(2).as_tuple() == (2, 4, 6, 8, 10, 12)


def test_validate_example_is_clean(example_params):
    """Test that the published example satisfies every constraint."""
    assert validate(example_params) == []


def test_validate_reports_violations(make_params):
    """Test the violation descriptions."""
    assert "1-f2-f3 in [0,1]" in validate(make_params(f2=0.9, f3=0.2))
    assert "beta > 0" in validate(make_params(beta=0.0))
    assert "lA > 0" in validate(make_params(lA=0.0))
    assert "gamma >= 0" in validate(make_params(gamma=-0.1))
    assert "p in [0,1]" in validate(make_params(p=1.5))
    assert "0 < lambdaL <= lambdaU" in validate(make_params(lambdaL=0.2, lambdaU=0.1))
    assert "0 < lambdaL <= lambdaU" in validate(make_params(lambdaL=0.2))
    assert validate(make_params(lambdaL=0.1, lambdaU=0.1)) == []


def test_force_of_infection_examples(make_params, example_params, example_initial):
    """Test direct substitution, the initial example value and zero infection."""
    params = make_params(beta=1.0, lA=1.0, lH=1e-300)
    s = State.from_sequence([1, 1, 1, 1, 1, 1])
    assert force_of_infection(params, s) == pytest.approx(2 / 6, rel=1e-12)

    assert force_of_infection(example_params, example_initial) == pytest.approx(
        1.93 * 15 / 10283800, rel=1e-12
    )
    assert force_of_infection(example_params, example_initial) == pytest.approx(2.81511e-6, rel=1e-5)

    quiet = State.from_sequence([5, 0, 0, 2, 0, 1])
    assert force_of_infection(example_params, quiet) == 0.0


def test_force_of_infection_needs_population(make_params):
    """Test N = 0."""
    with pytest.raises(DomainError):
        force_of_infection(make_params(), State.from_sequence([0] * 6))


def test_force_of_infection_is_homogeneous(random_params):
    """Test lambda(c*s) = lambda(s)."""
    rng = np.random.default_rng(17)
    for _ in range(200):
        params = random_params(rng)
        s = State.from_sequence(rng.uniform(0.0, 100.0, size=6))
        c = rng.uniform(1e-3, 1e3)
        assert force_of_infection(params, s.scaled(c)) == pytest.approx(
            force_of_infection(params, s), rel=1e-12
        )


def test_rhs_pure_recruitment(make_params):
    """Test that only recruitment acts when every other rate is zero."""
    params = make_params(Lambda=1.0)
    s = State.from_sequence([1, 0, 0, 0, 0, 0])
    assert rhs_delta(params, s, s) == (1.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def test_rhs_recruitment_balance(make_params):
    """Test Lambda = gamma*x1 at the disease-free balance point."""
    params = make_params(Lambda=2.0, gamma=0.5)
    s = State.from_sequence([4, 0, 0, 0, 0, 0])
    assert rhs_delta(params, s, s)[0] == 0.0


def test_rhs_matches_printed_equations(example_params, example_initial, random_params):
    """Test against a term-by-term evaluation of the six equations."""
    x = example_initial.as_tuple()
    expected = printed_rhs(example_params, x, x)
    assert rhs_delta(example_params, example_initial, example_initial) == pytest.approx(
        expected, rel=1e-12, abs=1e-9
    )

    rng = np.random.default_rng(8)
    for _ in range(100):
        params = random_params(rng)
        s = State.from_sequence(rng.uniform(0.0, 50.0, size=6))
        s_sigma = State.from_sequence(rng.uniform(0.0, 50.0, size=6))
        got = rhs_delta(params, s, s_sigma)
        want = printed_rhs(params, s.as_tuple(), s_sigma.as_tuple())
        assert got == pytest.approx(want, rel=1e-12, abs=1e-10)


def test_rhs_outflow_in_sigma_state(random_params):
    """Test linearity in s_sigma with negative diagonal coefficients."""
    rng = np.random.default_rng(9)
    params = random_params(rng)
    s = State.from_sequence(rng.uniform(1.0, 10.0, size=6))
    base = np.array(rhs_delta(params, s, State.from_sequence([0] * 6)))
    for i in range(6):
        unit = [0.0] * 6
        unit[i] = 1.0
        shifted = np.array(rhs_delta(params, s, State.from_sequence(unit)))
        delta = shifted - base
        assert delta[i] < 0
        assert np.all(np.delete(delta, i) == 0)


def test_population_balance_cancels_transfers(random_params):
    """Test N^Delta = Lambda - gamma*N when alpha1 = alpha2 = 0."""
    rng = np.random.default_rng(21)
    for _ in range(500):
        params = random_params(rng, alpha1=0.0, alpha2=0.0)
        s = State.from_sequence(rng.uniform(0.0, 1000.0, size=6))
        terms = rhs_delta(params, s, s)
        N = total_population(s)
        expected = params.Lambda - params.gamma * N
        scale = sum(abs(v) for v in terms) + params.Lambda + params.gamma * N
        assert abs(sum(terms) - expected) <= 1e-12 * scale


def test_total_population_examples(example_initial):
    """Test N on simple states and the example initial state."""
    assert total_population(State.from_sequence([1, 2, 3, 4, 5, 6])) == 21
    assert total_population(State.from_sequence([0] * 6)) == 0
    assert total_population(example_initial) == 10283800
