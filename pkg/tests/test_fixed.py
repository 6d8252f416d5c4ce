import math

import numpy as np
import pytest
from scipy.integrate import quad

from harness.config import config_from_mapping
from model.coefficients import CoefficientField, SinPeriodicSampler
from solver.fixed import (
    logistic_entire_solution,
    persists,
    run_fixed_dirichlet,
    run_fixed_mixed,
    run_halfline,
    truncation_drift,
)
from solver.profiles import CosineProfile
from solver.series import RunSeries, Verdict
from utils.helper import ConfigError

UNIT = CoefficientField.constant(1.0, 1.0)


def fixed_config(bc="mixed", l_plus=3.0, t_end=20.0, **extra):
    data = {
        "geometry": {"kind": "fixed", "bc": bc, "l_plus": l_plus},
        "initial": {"kind": "cosine", "amp": 0.5},
        "grid": {"n": 65},
        "time": {"t_end": t_end},
    }
    data.update(extra)
    return config_from_mapping(data)


def halfline_config(L, u0=0.5, a=1.0, b=1.0, t_end=15.0, **extra):
    data = {
        "coefficients": {"kind": "constant", "a": {"kind": "constant", "value": a}, "b": {"kind": "constant", "value": b}},
        "geometry": {"kind": "halfline", "L": L},
        "initial": {"kind": "constant", "value": u0},
        "time": {"t_end": t_end},
    }
    data.update(extra)
    return config_from_mapping(data)


def _series(sup_values):
    series = RunSeries()
    for k, value in enumerate(sup_values):
        series.append(t=float(k), sup_u=value)
    return series


def test_persists_helper():
    assert persists(_series([0.5] * 10)) is True
    assert persists(_series([0.5] * 5 + [1e-9] * 5)) is False
    assert persists(_series([0.5] * 8 + [1e-4] * 2)) is None
    assert persists(RunSeries()) is None


def test_mixed_long_interval_persists():
    series = run_fixed_mixed(None, UNIT, 3.0, CosineProfile(amp=0.5), fixed_config())
    assert series.outcome.verdict == Verdict.PERSISTS
    assert series.manifest["principal_eigenvalue"] == pytest.approx(1 - math.pi**2 / 36, abs=1e-6)


def test_mixed_short_interval_decays():
    series = run_fixed_mixed(None, UNIT, 1.0, CosineProfile(amp=0.5), fixed_config(l_plus=1.0))
    assert series.outcome.verdict == Verdict.DECAYS
    assert series.manifest["principal_eigenvalue"] < 0


def test_mixed_zero_data_stays_zero():
    series = run_fixed_mixed(None, UNIT, 3.0, np.zeros(65), fixed_config(t_end=2.0))
    assert series.column("sup_u").max() == 0.0


def test_dirichlet_verdicts_follow_eigenvalue():
    wide = run_fixed_dirichlet(None, 1.0, 1.0, 0.0, 4.0, CosineProfile(amp=0.5), fixed_config("dirichlet", 4.0))
    narrow = run_fixed_dirichlet(None, 1.0, 1.0, 0.0, 2.0, CosineProfile(amp=0.5), fixed_config("dirichlet", 2.0))
    assert wide.outcome.verdict == Verdict.PERSISTS
    assert narrow.outcome.verdict == Verdict.DECAYS


def test_dirichlet_rejects_nonvanishing_data():
    with pytest.raises(ConfigError):
        run_fixed_dirichlet(None, 1.0, 1.0, 0.0, 4.0, np.ones(65), fixed_config("dirichlet", 4.0))


def test_small_drift_keeps_persistence():
    beta = SinPeriodicSampler(offset=0.0, amplitude=0.005, period=1.0)
    series = run_fixed_mixed(beta, UNIT, 3.0, CosineProfile(amp=0.5), fixed_config())
    assert series.outcome.verdict == Verdict.PERSISTS


def test_halfline_homogeneous_logistic():
    series = run_halfline(halfline_config(32.0))
    np.testing.assert_allclose(series.final_state.u, 1.0, atol=1e-4)
    assert series.outcome.verdict == Verdict.PERSISTS


def test_halfline_larger_a():
    series = run_halfline(halfline_config(25.0, u0=0.1, a=2.0))
    np.testing.assert_allclose(series.final_state.u, 2.0, atol=1e-4)


def test_halfline_truncation_too_short():
    with pytest.raises(ConfigError):
        run_halfline(halfline_config(10.0))


@pytest.mark.slow
def test_halfline_persistence_band():
    config = halfline_config(
        32.0, t_end=20.0, model={"chi1": 0.2, "chi2": 0.3}, checks={"persistence": True}, time={"t_end": 20.0, "transient": 5.0}
    )
    series = run_halfline(config)
    late = series.column("t") >= 5.0
    assert series.column("inf_u_interior")[late].min() >= 0.8 / 1.1 - 0.02
    assert series.column("sup_u_interior")[late].max() <= 2.02


@pytest.mark.slow
def test_truncation_drift_is_small():
    assert truncation_drift(halfline_config(32.0, t_end=5.0)) < 1e-6


def test_constant_logistic_orbit():
    orbit = logistic_entire_solution(2.0, 1.0, 1.0)
    np.testing.assert_allclose(orbit(np.linspace(0, 3, 7)), 2.0)
    assert logistic_entire_solution(1.0, 2.0, 1.0).start == pytest.approx(0.5)


def test_bad_logistic_inputs():
    with pytest.raises(ConfigError):
        logistic_entire_solution(1.0, 1.0, 0.0)
    with pytest.raises(ConfigError):
        logistic_entire_solution(-1.0, 1.0, 1.0)


def _bernoulli_orbit(ts):
    """1/u solves w' = -a w + 1; its periodic solution in closed form up to quadrature."""
    def A(t):
        return t + 0.5 * (1.0 - np.cos(2.0 * np.pi * t)) / (2.0 * np.pi)

    def integral(t):
        return quad(lambda s: np.exp(A(s)), 0.0, t, epsabs=1e-13, epsrel=1e-13)[0]

    w0 = integral(1.0) / (np.exp(A(1.0)) - 1.0)
    return np.array([1.0 / (np.exp(-A(t)) * (w0 + integral(t))) for t in ts])


def test_periodic_logistic_matches_closed_form():
    a = SinPeriodicSampler(offset=1.0, amplitude=0.5, period=1.0)
    orbit = logistic_entire_solution(a, 1.0, 1.0)
    ts = np.linspace(0.0, 1.0, 41)
    np.testing.assert_allclose(orbit(ts), _bernoulli_orbit(ts), atol=1e-8)
    # periodic extension
    np.testing.assert_allclose(orbit(ts + 3.0), orbit(ts), atol=1e-12)
    assert orbit.residual(ts).max() < 1e-8


def test_plain_callables_accepted():
    orbit = logistic_entire_solution(lambda t: 1.0 + 0.5 * np.sin(2.0 * np.pi * t), lambda t: 1.0 + 0.0 * t, 1.0)
    assert orbit.start == pytest.approx(_bernoulli_orbit([0.0])[0], abs=1e-8)
