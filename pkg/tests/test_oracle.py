import math

import numpy as np
import pytest

from hvmeasure.oracle import (
    QuadratureError,
    integrate,
    ks_critical_value,
    ks_test,
    mc_moment,
)
from scipy.special import ndtr


def test_polynomial():
    res = integrate(lambda x: 3 * x**2, 0.0, 1.0)
    assert res.value == pytest.approx(1.0, abs=1e-14)
    assert res.est_error >= 0
    assert res.evaluations > 0


def test_lognormal_normalisation(lognormal):
    d = lognormal(0.3)
    res = integrate(d.pdf, 0, math.inf, tol=0, rtol=1e-12, log_window=d.log_window())
    assert abs(res.value - 1) < 1e-10


def test_lognormal_mean(lognormal):
    d = lognormal(0.3)
    res = integrate(lambda x: x * d.pdf(x), 0, math.inf, tol=0, rtol=1e-12,
                    log_window=d.log_window())
    assert res.value == pytest.approx(math.exp(0.045), rel=1e-12)


def test_negative_half_axis(lognormal):
    d = lognormal(0.2)
    res = integrate(lambda x: d.pdf(-x), -math.inf, 0, tol=0, rtol=1e-12,
                    log_window=d.log_window())
    assert res.value == pytest.approx(1.0, abs=1e-12)


def test_error_estimate_bounds_true_error():
    res = integrate(np.sin, 0.0, 3.0, tol=1e-6, rtol=0)
    assert abs(res.value - (1 - math.cos(3.0))) <= max(1e-6, res.est_error)


def test_breakpoints_do_not_change_value():
    f = lambda x: np.exp(-x * x)  # noqa: E731
    a = integrate(f, -4, 4).value
    b = integrate(f, -4, 4, points=[-1.0, 0.5, 2.0]).value
    assert a == pytest.approx(b, abs=1e-13)


def test_nonconvergence_is_loud():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.sin(1 / x) / x, 1e-8, 1.0, tol=1e-14, rtol=0, max_intervals=50)


def test_non_finite_integrand_is_loud():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.full_like(x, np.nan), 0, 1)


def test_bad_limits():
    with pytest.raises(ValueError):
        integrate(np.cos, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(np.cos, 0.0, math.inf)


def test_ks_single_sample_at_median():
    rep = ks_test([0.0], ndtr)
    assert rep.d_statistic == pytest.approx(0.5)
    assert rep.n == 1


def test_ks_threshold_form():
    assert ks_critical_value(0.05) == pytest.approx(1.3581, abs=1e-4)
    assert ks_critical_value(0.01) == pytest.approx(1.6276, abs=1e-4)
    rep = ks_test(np.linspace(-1, 1, 400), ndtr, alpha=0.05)
    assert rep.threshold_at_alpha == pytest.approx(ks_critical_value(0.05) / 20)
    assert rep.passed == (rep.d_statistic < rep.threshold_at_alpha)


def test_ks_null_passes_and_misspecified_fails(lognormal):
    rng = np.random.default_rng(5)
    x = lognormal(0.3).sample_magnitude(rng, 100_000)
    assert ks_test(x, lognormal(0.3).cdf).passed
    assert not ks_test(x, lognormal(0.6).cdf).passed


def test_ks_calibration():
    fails = 0
    for seed in range(100):
        x = np.random.default_rng(seed).standard_normal(2000)
        fails += not ks_test(x, ndtr, alpha=0.01).passed
    assert fails <= 5


def test_mc_moment_constant():
    est, se = mc_moment(np.full(10, 2.5), 2)
    assert est == 6.25 and se == 0


def test_mc_moment_fair_signs():
    rng = np.random.default_rng(1)
    n = 40_000
    x = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    est, se = mc_moment(x, 1)
    assert abs(est) < 4 * se
    assert se == pytest.approx(1 / math.sqrt(n), rel=1e-3)


def test_mc_moment_lognormal_second(lognormal):
    x = lognormal(0.3).sample_magnitude(np.random.default_rng(2), 1_000_000)
    est, se = mc_moment(x, 2)
    assert abs(est - math.exp(0.18)) < 4 * se


def test_mc_moment_validation():
    with pytest.raises(ValueError):
        mc_moment([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        mc_moment([1.0], 1)
