"""
Tests for trajectory diagnostics.
"""
import numpy as np
import pytest

from analysis.bounds import certify, permanence_bounds
from analysis.diagnostics import (
    PERMANENCE_EPS,
    empirical_lambda_bounds,
    lyapunov_decay_check,
    lyapunov_v,
    permanence_check,
    translation_defect,
)
from models.errors import InvalidArgumentError
from models.saiqh import State
from solver.integrator import simulate
from utils.timescale import make_uniform_grid, make_union

SECOND_INITIAL = [14.0, 0.6, 0.3, 2.5, 4.5, 0.2]


@pytest.fixture
def synthetic_pair(synthetic_config, synthetic_params):
    scale = synthetic_config.timescale.build()
    first = simulate(synthetic_params, scale, synthetic_config.initial.to_state())
    second = simulate(synthetic_params, scale, State.from_sequence(SECOND_INITIAL))
    return first, second


def test_lyapunov_v():
    """Test the l1 distance between two states."""
    a = State.from_sequence([1, 2, 3, 4, 5, 6])
    b = State.from_sequence([2, 2, 1, 4, 5, 9])
    assert lyapunov_v(a, b) == 6.0
    assert lyapunov_v(a, a) == 0.0


def test_lyapunov_v_is_a_metric():
    """Test symmetry and the triangle inequality on random triples."""
    rng = np.random.default_rng(41)
    for _ in range(1000):
        a, b, c = (State.from_sequence(rng.uniform(0.0, 100.0, 6)) for _ in range(3))
        ab = lyapunov_v(a, b)
        assert ab == lyapunov_v(b, a)
        assert ab >= 0.0
        assert lyapunov_v(a, c) <= (ab + lyapunov_v(b, c)) * (1 + 1e-12)


def test_certified_decay_holds(synthetic_config, synthetic_params, synthetic_pair):
    """Test that two solutions contract at the certified rate."""
    first, second = synthetic_pair
    lo, hi = synthetic_config.lambda_bounds()
    cert = certify(synthetic_params, first.scale, lo, hi)
    assert cert.certified

    report = lyapunov_decay_check(first, second, cert.psi)
    assert report.passed
    assert report.violations == ()
    assert report.worst_margin >= 0.0
    assert len(report.rows) == len(first)
    assert report.rows[0].V == report.rows[0].envelope
    assert report.rows[-1].V < report.rows[0].V * 1e-6
    assert report.rows[1].envelope == pytest.approx(report.rows[0].V * (1 - cert.psi), rel=1e-12)


def test_overstated_rate_is_caught(synthetic_pair, caplog):
    """Test that a decay rate far above the real contraction fails."""
    first, second = synthetic_pair
    report = lyapunov_decay_check(first, second, 0.9)
    assert not report.passed
    assert report.violations[0] == 1.0
    assert not report.rows[1].ok
    assert report.worst_margin < 0.0
    assert "Lyapunov decay violated" in caplog.text


def test_identical_solutions_pass(synthetic_pair):
    """Test V = 0 throughout."""
    first, _ = synthetic_pair
    report = lyapunov_decay_check(first, first, 0.5)
    assert report.passed
    assert all(row.V == 0.0 for row in report.rows)


def test_dense_decay_uses_exponential_envelope(make_params):
    """Test exp(-psi*h) factors on a dense segment."""
    params = make_params(p=1.0, gamma=0.5)
    scale = make_union([(0.0, 2.0)], 0.1)
    first = simulate(params, scale, State.from_sequence([1, 1, 1, 1, 1, 1]))
    second = simulate(params, scale, State.from_sequence([2, 1, 1, 1, 1, 1]))

    report = lyapunov_decay_check(first, second, 0.5)
    times = first.times()
    assert [row.envelope for row in report.rows] == pytest.approx(np.exp(-0.5 * times), rel=1e-12)
    assert lyapunov_decay_check(first, second, 0.49).passed
    assert not lyapunov_decay_check(first, second, 0.6).passed


def test_decay_check_rejects_mismatched_runs(synthetic_params, synthetic_pair):
    """Test different scales, parameters and rates."""
    first, second = synthetic_pair
    shorter = simulate(synthetic_params, make_uniform_grid(0.0, 1.0, 10), first.samples[0].state)
    with pytest.raises(InvalidArgumentError, match="time scales"):
        lyapunov_decay_check(first, shorter, 0.1)

    other_params = simulate(
        synthetic_params.with_updates(beta=0.02), first.scale, first.samples[0].state
    )
    with pytest.raises(InvalidArgumentError, match="parameters"):
        lyapunov_decay_check(first, other_params, 0.1)

    with pytest.raises(InvalidArgumentError, match="finite"):
        lyapunov_decay_check(first, second, float("nan"))


def test_empirical_lambda_bounds(synthetic_pair):
    """Test min and max over the second half of the run."""
    first, _ = synthetic_pair
    bounds = empirical_lambda_bounds(first, 0.5)
    window = first.lambdas()[100:]
    assert bounds.lower == window.min()
    assert bounds.upper == window.max()
    assert bounds.satisfies_h1

    whole = empirical_lambda_bounds(first, 0.0)
    assert whole.lower <= bounds.lower
    assert whole.upper >= bounds.upper


def test_empirical_lambda_bounds_without_infection(make_params, caplog):
    """Test a disease-free run, which cannot satisfy (H1)."""
    traj = simulate(make_params(Lambda=1.0, gamma=0.1), make_uniform_grid(0.0, 1.0, 10),
                    State.from_sequence([1, 0, 0, 1, 0, 0]))
    bounds = empirical_lambda_bounds(traj)
    assert bounds.lower == bounds.upper == 0.0
    assert not bounds.satisfies_h1
    assert "violate (H1)" in caplog.text


def test_transient_fraction_range(synthetic_pair):
    """Test fractions outside [0, 1)."""
    first, _ = synthetic_pair
    with pytest.raises(InvalidArgumentError):
        empirical_lambda_bounds(first, 1.0)
    with pytest.raises(InvalidArgumentError):
        empirical_lambda_bounds(first, -0.1)


def test_permanence_window_inside_bounds(synthetic_params, synthetic_pair):
    """Test that the settled run lies in [m - eps, M + eps]."""
    first, _ = synthetic_pair
    lam = empirical_lambda_bounds(first, 0.5)
    bounds = permanence_bounds(synthetic_params, lam.lower, lam.upper)

    report = permanence_check(first, bounds, 0.5)
    assert report.passed
    assert report.failing == ()
    assert report.window_start == 100.0
    assert report.eps == PERMANENCE_EPS * bounds.M
    assert [c.name for c in report.compartments] == ["x1", "x2", "x3", "x4", "x5", "x6"]
    assert all(c.lower_margin >= -report.eps for c in report.compartments)


def test_permanence_band_violation(synthetic_params, synthetic_pair):
    """Test a band that no compartment can reach."""
    first, _ = synthetic_pair
    bounds = permanence_bounds(synthetic_params, 1e-4, 0.01).model_copy(update={"m": 1e3})
    report = permanence_check(first, bounds, 0.5)
    assert not report.passed
    assert report.failing == ("x1", "x2", "x3", "x4", "x5", "x6")


def test_translation_defect_settles(synthetic_pair):
    """Test that the shift defect shrinks once the run has settled."""
    first, _ = synthetic_pair
    early = translation_defect(first, 1.0, 50.0)
    late = translation_defect(first, 1.0, 100.0)
    assert late <= early
    assert translation_defect(first, 1.0, 150.0) < 1e-6
    assert translation_defect(first, 0.0) == 0.0
    assert translation_defect(first, 1.0) >= early


def test_translation_defect_interpolates_dense_segments(make_params):
    """Test shifts that land between samples of a dense segment."""
    params = make_params(p=1.0, gamma=0.5)
    scale = make_union([(0.0, 1.0)], 0.25)
    traj = simulate(params, scale, State.from_sequence([1, 1, 1, 1, 1, 1]))
    times, x1 = traj.times(), traj.matrix()[:, 0]

    expected = max(
        abs(np.interp(t + 0.1, times, x1) - v) for t, v in zip(times, x1) if t + 0.1 <= 1.0
    )
    assert translation_defect(traj, 0.1) == pytest.approx(expected, rel=1e-12)


def test_translation_defect_errors(synthetic_pair):
    """Test negative shifts and shifts leaving the time scale."""
    first, _ = synthetic_pair
    with pytest.raises(InvalidArgumentError):
        translation_defect(first, -1.0)
    with pytest.raises(InvalidArgumentError, match="admissible"):
        translation_defect(first, 500.0)
    with pytest.raises(InvalidArgumentError, match="admissible"):
        translation_defect(first, 0.5)
