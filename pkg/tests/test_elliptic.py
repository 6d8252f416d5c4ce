import numpy as np
import pytest

from model.params import ModelParams, compute_M
from numerics.elliptic import (
    check_combo_bound,
    check_gradient_bound,
    potential_oracle_reflection,
    solve_pair,
    solve_potential,
)
from utils.helper import ConfigError


def test_constant_source_gives_constant_potential():
    u = np.full(33, 0.7)
    v = solve_potential(u, lam=2.0, mu=3.0, h=4.0)
    np.testing.assert_allclose(v, 3.0 * 0.7 / 2.0, rtol=1e-12)


def test_zero_production_gives_zero_potential():
    v = solve_potential(np.linspace(0, 1, 17), lam=1.0, mu=0.0, h=1.0)
    assert np.all(v == 0.0)


def test_cosine_mode_is_second_order():
    h, lam, mu = 2.0, 1.5, 1.0
    errors = []
    for n in (33, 65):
        x = np.linspace(0.0, h, n)
        u = np.cos(np.pi * x / h)
        exact = mu * u / (lam + (np.pi / h) ** 2)
        errors.append(np.abs(solve_potential(u, lam, mu, h) - exact).max())
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.05)


def test_invalid_inputs():
    with pytest.raises(ConfigError):
        solve_potential(np.ones(2), 1.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        solve_potential(np.ones(8), 0.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        solve_potential(np.array([1.0, np.nan, 1.0]), 1.0, 1.0, 1.0)


def test_oracle_agrees_on_random_sources():
    rng = np.random.default_rng(7)
    n, h, lam, mu = 64, 3.0, 1.0, 1.0
    dx = h / (n - 1)
    for _ in range(5):
        u = rng.uniform(0.0, 1.0, n)
        direct = solve_potential(u, lam, mu, h)
        oracle = potential_oracle_reflection(u, lam, mu, h)
        assert np.abs(direct - oracle).max() <= max(1e-4, 5 * dx * dx)


@pytest.mark.slow
def test_oracle_agrees_on_many_sources():
    rng = np.random.default_rng(11)
    n = 64
    for k in range(100):
        h = rng.uniform(0.5, 6.0)
        lam = rng.uniform(0.5, 3.0)
        mu = rng.uniform(0.1, 2.0)
        u = rng.uniform(0.0, 1.0, n)
        dx = h / (n - 1)
        gap = np.abs(solve_potential(u, lam, mu, h) - potential_oracle_reflection(u, lam, mu, h)).max()
        assert gap <= max(1e-4, 5 * dx * dx), k


def test_oracle_rejects_coarse_quadrature():
    with pytest.raises(ConfigError):
        potential_oracle_reflection(np.ones(16), 1.0, 1.0, 1.0, quad_n=32)


def test_bound_diagnostics_hold_on_random_sources():
    rng = np.random.default_rng(3)
    p = ModelParams(chi1=0.4, chi2=0.7, lambda1=0.8, lambda2=1.6, mu1=1.2, mu2=0.9)
    M = compute_M(p)
    for _ in range(20):
        u = rng.uniform(0.0, 2.0, 129)
        pair = solve_pair(u, p, rng.uniform(0.5, 20.0))
        combo = check_combo_bound(pair, u, p, M)
        gradient = check_gradient_bound(pair, u, p)
        assert combo["ok"], combo
        assert gradient["ok"], gradient
        assert set(combo) == {"name", "value", "bound", "residual", "tolerance", "ok"}


def test_combo_record_flags_violation():
    p = ModelParams(chi1=0.0, chi2=1.0)
    u = np.ones(17)
    pair = solve_pair(u, p, 1.0)
    # v2 = 1 everywhere, so chi2*lambda2*v2 = 1 exceeds M*sup_u when M is understated
    record = check_combo_bound(pair, u, p, M=0.5)
    assert not record["ok"]
    assert record["residual"] == pytest.approx(0.5)
