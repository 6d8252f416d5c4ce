import math

import numpy as np
import pytest

from experiment_setup.presets import single_front
from harness.config import config_from_mapping
from model.coefficients import CoefficientField
from model.params import ModelParams
from solver.front import choose_dt, make_initial_state, run, stefan_velocity, step
from solver.profiles import CosineProfile, QuadraticProfile, TabulatedProfile
from solver.series import Verdict
from utils.helper import ConfigError, StabilityError

UNIT = CoefficientField.constant(1.0, 1.0)


def test_initial_state_is_compatible():
    s = make_initial_state(2.0, CosineProfile(amp=0.5), 65, ModelParams())
    assert s.u[-1] == 0.0
    assert s.u[0] == pytest.approx(0.5)
    assert s.x[-1] == pytest.approx(2.0)
    # h' = -u_x(h) = amp*pi/(2h) for the cosine profile
    assert s.h_prime == pytest.approx(0.5 * math.pi / 4.0, rel=1e-3)


def test_initial_state_rejections():
    with pytest.raises(ConfigError):
        make_initial_state(0.0, CosineProfile(), 65)
    with pytest.raises(ConfigError):
        make_initial_state(1.0, CosineProfile(), 16)
    with pytest.raises(ConfigError):
        # slope at the Neumann end is far from zero
        make_initial_state(1.0, TabulatedProfile(values=[1.0, 0.0]), 65)


def test_zero_data_stays_zero():
    p = ModelParams(chi1=0.2, chi2=0.3)
    s = make_initial_state(1.0, CosineProfile(amp=0.0), 65, p)
    for _ in range(50):
        s = step(s, 0.01, p, UNIT)
    assert np.all(s.u == 0.0)
    assert s.h == 1.0


def test_steps_keep_positivity_and_monotone_front():
    p = ModelParams(chi1=0.2, chi2=0.3)
    s = make_initial_state(1.5, QuadraticProfile(amp=1.2), 65, p)
    h_prev = s.h
    for _ in range(200):
        s = step(s, choose_dt(s, p, UNIT, 0.01), p, UNIT)
        assert s.u.min() >= 0.0
        assert s.h >= h_prev
        h_prev = s.h
    assert s.sup_u <= 1.2 + 1e-3


def test_chemotaxis_free_solutions_stay_ordered():
    p = ModelParams()
    low = make_initial_state(1.5, CosineProfile(amp=0.3), 65, p)
    high = make_initial_state(1.5, CosineProfile(amp=0.6), 65, p)
    for _ in range(200):
        dt = min(choose_dt(low, p, UNIT, 0.01), choose_dt(high, p, UNIT, 0.01))
        low = step(low, dt, p, UNIT)
        high = step(high, dt, p, UNIT)
        assert low.h <= high.h
        # compare on the shorter domain, where both densities are defined
        assert np.all(low.u <= np.interp(low.x, high.x, high.u) + 1e-4)
    assert high.h > low.h


def test_oversized_step_rejected():
    p = ModelParams()
    s = make_initial_state(1.0, CosineProfile(amp=1.0), 65, p)
    with pytest.raises(StabilityError):
        step(s, 1.0, p, UNIT)


def test_stefan_velocity_is_second_order():
    errors = []
    for n in (33, 65):
        s = make_initial_state(1.0, CosineProfile(amp=1.0), n)
        errors.append(abs(stefan_velocity(s, 1.0) - math.pi / 2))
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.1)


def test_short_run_is_undetermined():
    config = config_from_mapping(single_front(1.0, amp=0.3, t_end=0.5))
    series, state = run(config)
    assert series.outcome.verdict == Verdict.UNDETERMINED
    assert series.column("t")[0] == 0.0
    assert series.last("t") == pytest.approx(0.5)
    assert np.all(np.diff(series.column("h")) >= 0)
    assert state.t == pytest.approx(0.5)


def test_snapshots_recorded():
    data = single_front(1.0, amp=0.3, t_end=0.3)
    data["output"] = {"snapshot_times": [0.0, 0.2]}
    series, _ = run(config_from_mapping(data))
    assert len(series.snapshots) == 2
    assert series.snapshots[0][0] == 0.0
    assert series.snapshots[1][0] >= 0.2
    assert list(series.snapshots[0][1].columns) == ["y", "x", "u", "v1", "v2"]


def test_h1_violation_needs_override():
    data = single_front(1.0, amp=0.3, t_end=0.1, model={"chi1": 2.0})
    with pytest.raises(ConfigError):
        run(config_from_mapping(data))
    series, _ = run(config_from_mapping(data), allow_h1_violation=True)
    assert len(series) > 0


@pytest.mark.slow
def test_small_domain_vanishes():
    series, state = run(config_from_mapping(single_front(0.4, amp=0.1, t_end=40.0)))
    assert series.outcome.verdict == Verdict.VANISHING
    assert series.outcome.h_infinity_estimate <= math.pi / 2 + 0.05
    assert state.sup_u < 1e-6


@pytest.mark.slow
def test_large_domain_spreads():
    series, state = run(config_from_mapping(single_front(2.0, amp=0.5, t_end=60.0, h_max=10.0)))
    assert series.outcome.verdict == Verdict.SPREADING
    assert state.h >= 10.0
    interior = state.x <= 1.0
    np.testing.assert_allclose(state.u[interior], 1.0, rtol=0.01)
