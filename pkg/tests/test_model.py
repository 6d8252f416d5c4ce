import math

import numpy as np
import pytest
from pydantic import ValidationError

from model.coefficients import CoefficientField, SinPeriodicSampler, TabulatedSampler, mean_a, verify_bounds
from model.params import (
    ModelParams,
    check_hypotheses,
    compute_K,
    compute_M,
    compute_M0,
    compute_m0,
    gradient_constant,
)
from utils.helper import ConfigError, HypothesisViolationError


@pytest.fixture
def attraction_repulsion():
    return ModelParams(chi1=0.2, chi2=0.3)


def test_chemotaxis_free_constants_vanish():
    p = ModelParams()
    assert compute_M(p) == 0.0
    assert compute_K(p) == 0.0
    assert gradient_constant(p) == 0.0
    assert p.chemotaxis_free


def test_persistence_constants(attraction_repulsion):
    c = CoefficientField.constant(1.0, 1.0)
    report = check_hypotheses(attraction_repulsion, c)
    assert report.M == pytest.approx(0.1)
    assert report.K == pytest.approx(0.1)
    assert report.M0 == pytest.approx(1.0)
    assert report.m0 == pytest.approx(0.8 / 1.1)
    assert report.h1_holds and report.h2_holds and report.h3_holds
    assert report.margin_h1 == pytest.approx(1.0)
    assert report.margin_h2 == pytest.approx(0.8)
    assert report.gradient_constant == pytest.approx(0.05)


def test_equal_decay_rates_give_pure_difference():
    p = ModelParams(chi1=0.5, chi2=0.2, lambda1=2.0, lambda2=2.0)
    # a2*l2 - a1*l1 < 0, so the positive part vanishes
    assert compute_M(p) == 0.0
    assert compute_K(p) == pytest.approx(0.6 / 2.0)


def test_h1_failure_raises_for_M0_and_m0():
    p = ModelParams(chi1=2.0)
    c = CoefficientField.constant(1.0, 1.0)
    report = check_hypotheses(p, c)
    assert not report.h1_holds
    assert report.M0 is None and report.m0 is None
    with pytest.raises(HypothesisViolationError):
        compute_M0(p, c)
    with pytest.raises(HypothesisViolationError):
        compute_m0(p, c)


def test_logistic_limit_without_chemotaxis():
    c = CoefficientField.constant(2.0, 1.0)
    report = check_hypotheses(ModelParams(), c)
    assert report.M0 == pytest.approx(2.0)
    assert report.m0 == pytest.approx(2.0)


def test_params_reject_negative_sensitivity():
    with pytest.raises(ValidationError):
        ModelParams(chi1=-0.1)
    with pytest.raises(ValidationError):
        ModelParams(nu=0.0)


def test_constant_field_fills_bounds():
    c = CoefficientField.constant(1.5, 0.5)
    assert (c.a_inf, c.a_sup, c.b_inf, c.b_sup) == (1.5, 1.5, 0.5, 0.5)
    assert verify_bounds(c)


def test_nonpositive_a_inf_is_rejected():
    with pytest.raises(ValidationError):
        CoefficientField.constant(0.0, 1.0)


def _periodic(a_inf=0.5, a_sup=1.5):
    return CoefficientField(
        kind="time_only",
        a=SinPeriodicSampler(offset=1.0, amplitude=0.5, period=1.0),
        b={"kind": "constant", "value": 1.0},
        period=1.0,
        a_inf=a_inf,
        a_sup=a_sup,
        b_inf=1.0,
        b_sup=1.0,
    )


def test_verify_bounds_accepts_tight_declaration():
    assert verify_bounds(_periodic())


def test_verify_bounds_rejects_escaping_samples():
    with pytest.raises(ConfigError):
        verify_bounds(_periodic(a_inf=0.6))


def test_time_only_rejects_space_dependent_sampler():
    with pytest.raises(ValidationError):
        CoefficientField(
            kind="time_only",
            a=SinPeriodicSampler(offset=1.0, amplitude=0.5, period=1.0, wavenumber=1.0),
            b={"kind": "constant", "value": 1.0},
            a_inf=0.5,
            a_sup=1.5,
            b_inf=1.0,
            b_sup=1.0,
        )


def test_period_must_be_a_multiple_of_sampler_period():
    with pytest.raises(ValidationError):
        CoefficientField(
            kind="time_only",
            a=SinPeriodicSampler(offset=1.0, amplitude=0.5, period=0.7),
            b={"kind": "constant", "value": 1.0},
            period=1.0,
            a_inf=0.5,
            a_sup=1.5,
            b_inf=1.0,
            b_sup=1.0,
        )


def test_mean_a_of_sine_is_offset():
    assert float(mean_a(_periodic())) == pytest.approx(1.0, abs=1e-12)


def test_tabulated_sampler_wraps_time(tmp_path):
    path = tmp_path / "a.csv"
    rows = ["t,x,value"]
    for t in (0.0, 0.5, 1.0):
        for x in (0.0, 10.0):
            rows.append(f"{t},{x},{1.0 + t + 0.1 * x}")
    path.write_text("\n".join(rows) + "\n")
    sampler = TabulatedSampler(path=path, period=1.0)
    assert sampler.space_dependent
    assert float(sampler(0.25, 5.0)) == pytest.approx(1.0 + 0.25 + 0.5)
    # x is clamped to the table
    assert float(sampler(0.0, 50.0)) == pytest.approx(2.0)
    assert float(sampler(1.25, 0.0)) == pytest.approx(float(sampler(0.25, 0.0)))


def test_tabulated_sampler_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        TabulatedSampler(path=tmp_path / "missing.csv", period=1.0)


def test_sin_sampler_values():
    s = SinPeriodicSampler(offset=1.0, amplitude=0.5, period=1.0)
    t = np.array([0.0, 0.25, 0.75])
    np.testing.assert_allclose(s(t, 0.0), [1.0, 1.5, 0.5], atol=1e-12)
    assert not s.space_dependent and s.time_dependent
    assert math.isclose(float(s(0.25, 3.0)), 1.5)


def _random_case(rng):
    p = ModelParams(
        chi1=rng.uniform(0.0, 1.0),
        chi2=rng.uniform(0.0, 1.0),
        lambda1=rng.uniform(0.2, 3.0),
        lambda2=rng.uniform(0.2, 3.0),
        mu1=rng.uniform(0.0, 2.0),
        mu2=rng.uniform(0.0, 2.0),
    )
    a_inf, b_inf = rng.uniform(0.2, 2.0), rng.uniform(0.5, 3.0)
    a_sup, b_sup = a_inf + rng.uniform(0.0, 1.0), b_inf + rng.uniform(0.0, 1.0)
    c = CoefficientField(
        kind="time_only",
        a=SinPeriodicSampler(offset=0.5 * (a_inf + a_sup), amplitude=0.5 * (a_sup - a_inf), period=1.0),
        b=SinPeriodicSampler(offset=0.5 * (b_inf + b_sup), amplitude=0.5 * (b_sup - b_inf), period=1.0),
        a_inf=a_inf,
        a_sup=a_sup,
        b_inf=b_inf,
        b_sup=b_sup,
    )
    return p, c


def test_M_is_bounded_by_repulsion_and_K():
    rng = np.random.default_rng(11)
    for _ in range(200):
        p, _ = _random_case(rng)
        M = compute_M(p)
        assert 0.0 <= M <= p.chi2 * p.mu2 + 1e-12
        assert M <= compute_K(p) + 1e-12


@pytest.mark.parametrize("scale", [0.5, 2.0, 7.0])
def test_M_and_K_scale_with_sensitivities(scale):
    rng = np.random.default_rng(3)
    for _ in range(50):
        p, _ = _random_case(rng)
        scaled = p.model_copy(update={"chi1": scale * p.chi1, "chi2": scale * p.chi2})
        assert compute_M(scaled) == pytest.approx(scale * compute_M(p), abs=1e-12)
        assert compute_K(scaled) == pytest.approx(scale * compute_K(p), abs=1e-12)
        assert gradient_constant(scaled) == pytest.approx(scale * gradient_constant(p), abs=1e-12)


def test_h2_implies_h1_and_positive_m0():
    rng = np.random.default_rng(5)
    seen_h2 = 0
    for _ in range(300):
        p, c = _random_case(rng)
        report = check_hypotheses(p, c)
        if report.h2_holds:
            seen_h2 += 1
            assert report.h1_holds
            assert report.m0 > 0.0
            assert report.m0 <= report.M0
    assert seen_h2 > 20


def test_report_fields():
    report = check_hypotheses(ModelParams(chi1=0.2, chi2=0.3), CoefficientField.constant(1.0, 1.0)).model_dump()
    assert "h2_holds" in report
    assert "m0_valid" not in report
