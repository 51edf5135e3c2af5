import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grenander_linf.errors import DegenerateBandError, DomainError
from grenander_linf.lcm import grenander_type
from grenander_linf.limitlaw import (
    OracleDerivatives,
    PluginDerivatives,
    StatisticWindow,
    TailConstants,
    a_n,
    b_n,
    c_fl,
    confidence_band,
    gumbel_cdf,
    gumbel_quantile,
    mu_n,
    norm_A,
    norm_B,
    rate_ratio,
    standardize_affine,
    standardize_inverse,
    sup_statistic_function_scale,
    sup_statistic_inverse_scale,
    u_n_expansion,
)
from grenander_linf.inverse import inverse_estimator
from grenander_linf.models import SeedSpec, linear_density_model, linear_regression_model, sample
from grenander_linf.stepfn import LeftContStep

# placeholder constants for algebraic checks; not claimed as the true values
TAILS = TailConstants(2.0, 1.0)


@pytest.fixture
def reg():
    return linear_regression_model(1.0, 1.0, 1.0)


@pytest.fixture
def dens():
    return linear_density_model(1.5, 1.0)


def test_norm_A_regression_constant(reg):
    a = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(norm_A(a, reg), 4 ** (-1 / 3), rtol=1e-15)
    assert 4 ** (-1 / 3) == pytest.approx(0.62996, abs=1e-5)


def test_norm_A_density_midpoint(dens):
    # g(1) = 0.5, |f'| = 1, L'(0.5) = f(0.5) = 1
    assert float(norm_A(1.0, dens)) == pytest.approx(4 ** (-1 / 3), rel=1e-15)
    with pytest.raises(DomainError):
        norm_A(0.4, dens)


def test_norm_A_homogeneous_in_slope():
    m1 = linear_regression_model(1.0, 1.0, 1.0)
    m8 = linear_regression_model(8.0, 8.0, 1.0)
    assert float(norm_A(4.0, m8)) == pytest.approx(4 * float(norm_A(0.5, m1)), rel=1e-14)


def test_norm_B(reg, dens):
    np.testing.assert_allclose(norm_B(np.linspace(0, 1, 5), reg), 4 ** (-1 / 3), rtol=1e-15)
    a = np.random.default_rng(0).uniform(dens.f1, dens.f0, 100)
    s = dens.g(a)
    np.testing.assert_allclose(norm_A(a, dens), norm_B(s, dens) * np.abs(dens.fprime(s)), rtol=1e-14)
    # Lipschitz on the density family: |dB/dt| = (1/3) 4^{-1/3} (1.5 - t)^{-4/3} <= 0.53 on [0, 1]
    t = np.linspace(0, 1, 10001)
    assert np.max(np.abs(np.diff(norm_B(t, dens))) / np.diff(t)) <= 0.53


def test_c_fl(reg, dens):
    assert c_fl(StatisticWindow(0, 1), reg) == pytest.approx(2.0, rel=1e-12)
    closed = 3 * (1.5 ** (2 / 3) - 0.5 ** (2 / 3))
    assert c_fl(StatisticWindow(0, 1), dens) == pytest.approx(closed, rel=1e-10)
    assert closed == pytest.approx(2.04123, abs=1e-5)
    assert c_fl(StatisticWindow(0.25, 0.75), dens) < c_fl(StatisticWindow(0, 1), dens)


def test_mu_n_reference_value():
    assert mu_n(math.exp(8), 2.0, TailConstants(2.0, 1.0)) == pytest.approx(0.77644, abs=1e-5)
    with pytest.raises(DomainError):
        mu_n(2, 1.0, TAILS)


def test_mu_n_structure():
    t0 = TailConstants(0.0, 1.0)
    for n in (1e3, 1e6, 1e12):
        L = math.log(n)
        assert mu_n(n, 1.0, t0) == pytest.approx(1 + math.log(L) / (3 * L), rel=1e-14)
    vals = [mu_n(1e4, c, TAILS) for c in (0.5, 1.0, 2.0, 4.0)]
    assert np.all(np.diff(vals) > 0)


def test_gumbel():
    assert float(gumbel_cdf(0.0)) == pytest.approx(math.exp(-1), rel=1e-15)
    assert gumbel_quantile(0.95) == pytest.approx(2.9702, abs=1e-4)
    p = np.linspace(0.001, 0.999, 999)
    np.testing.assert_allclose(gumbel_cdf(gumbel_quantile(p)), p, atol=1e-12)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(DomainError):
            gumbel_quantile(bad)


def test_standardization_identity_example():
    S, n = 1.3, 1e4
    assert standardize_affine(S, n, 2.0, TAILS) == pytest.approx(
        standardize_inverse(S, n, 2.0, TAILS), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 5), st.floats(3, 1e12), st.floats(0, 5), st.floats(0.05, 20), st.floats(0.05, 20))
def test_standardization_identity(S, n, kappa, lam, C):
    tails = TailConstants(kappa, lam)
    lhs = standardize_affine(S, n, C, tails)
    rhs = standardize_inverse(S, n, C, tails)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_u_n_leading_term():
    for n in (1e3, 1e8, 1e30):
        L = math.log(n)
        # kappa = 0 and lambda C = L^{-1/3} cancel the lower-order terms
        tails = TailConstants(0.0, L ** (-1 / 3))
        assert u_n_expansion(0.0, n, 1.0, tails) == pytest.approx(2 ** (-1 / 3) * L ** (1 / 3), rel=1e-14)
    assert a_n(1e4) > 0 and b_n(1e4, 2.0, TAILS) > 0


def test_u_n_calibration_against_tail_expansion():
    # n^{1/3} mu(u_n) -> tau with tau 4^{-1/3} C = exp(-x), using mu = the tail expansion
    tails = TailConstants(2.9458, 2.264)
    C = 2.04123
    ratios = []
    for L in (10.0, 50.0, 200.0, 700.0):
        n = math.exp(L)
        u = u_n_expansion(0.5, n, C, tails)
        tau = math.exp(-0.5) * 4 ** (1 / 3) / C
        ratios.append(math.exp(L / 3) * float(tails.density(u)) / tau)
    assert np.all(np.diff(ratios) < 0)
    assert 1.0 < ratios[-1] < 1.1


def test_window_validation_and_default():
    with pytest.raises(DomainError):
        StatisticWindow(0.5, 0.4)
    with pytest.raises(DomainError):
        StatisticWindow(0.0, 1.0, 0.6, 0.5)
    w = StatisticWindow.default(1e4)
    L = math.log(1e4)
    assert w.alpha_n == pytest.approx(math.sqrt(L) * 1e4 ** (-1 / 3) * L ** (-2 / 3))
    assert w.alpha_n == w.beta_n
    inner = StatisticWindow.default(1e4, 0.2, 0.8)
    assert inner.alpha_n == 0.0 and inner.beta_n == 0.0


def test_tail_constants_validation_and_json():
    with pytest.raises(DomainError):
        TailConstants(1.0, 0.0)
    with pytest.raises(DomainError):
        TailConstants(-1.0, 1.0)
    t = TailConstants(2.5, 1.7, "zeta-fit", {"n_bins": 5})
    back = TailConstants.from_dict(t.to_dict())
    assert back == t and back.provenance == "zeta-fit"
    assert set(t.to_dict()) >= {"kappa", "lambda", "provenance"}


def test_function_scale_zero_identity(dens):
    # constant step rising from f at the left end of a short window so that the
    # weighted gap at the right end is exactly mu_n (log n / n)^{1/3}
    n, C, v = 1e4, 2.0, 0.8
    L = math.log(n)
    d = mu_n(n, C, TAILS) * (L / n) ** (1 / 3) * (2 * float(dens.f(v))) ** (1 / 3)
    w = StatisticWindow(v - d, v)
    fhat = LeftContStep([], [float(dens.f(v - d))])
    T = sup_statistic_function_scale(fhat, dens, w, n, TAILS, C)
    assert T == pytest.approx(0.0, abs=1e-9)


def test_statistics_reproducible_and_finite(dens):
    n = 10_000
    w = StatisticWindow.default(n)
    vals = []
    for _ in range(2):
        fhat, _ = grenander_type(sample(dens, n, SeedSpec(123, 4)))
        U = inverse_estimator(fhat)
        vals.append((sup_statistic_function_scale(fhat, dens, w, n, TAILS),
                     sup_statistic_inverse_scale(U, dens, w, n),
                     rate_ratio(fhat, dens, w, n)))
    assert vals[0] == vals[1]
    assert all(math.isfinite(v) for v in vals[0])


def test_inverse_scale_centering_median(dens):
    # (2 / log n)^{1/3} S_n is near one at moderate n
    n = 20_000
    w = StatisticWindow.default(n)
    S = [sup_statistic_inverse_scale(inverse_estimator(grenander_type(sample(dens, n, SeedSpec(8, i)))[0]),
                                     dens, w, n) for i in range(60)]
    med = float(np.median(S)) * (2 / math.log(n)) ** (1 / 3)
    assert 0.6 < med < 1.3


def test_band_width_constant_for_regression(reg):
    n = 5000
    fhat, _ = grenander_type(sample(reg, n, SeedSpec(1)))
    w = StatisticWindow.default(n)
    band = confidence_band(fhat, OracleDerivatives(reg), w, n, 0.9, c_fl(w, reg), TAILS)
    t = np.linspace(w.lo, w.hi, 50)
    width = band.upper(t) - band.lower(t)
    np.testing.assert_allclose(width, width[0], rtol=1e-14)


def test_band_width_increasing_in_level(dens):
    n = 5000
    fhat, _ = grenander_type(sample(dens, n, SeedSpec(1)))
    w = StatisticWindow.default(n)
    C = c_fl(w, dens)
    t = np.linspace(w.lo, w.hi, 20)
    widths = [confidence_band(fhat, OracleDerivatives(dens), w, n, p, C, TAILS).halfwidth(t)
              for p in (0.5, 0.8, 0.9, 0.95)]
    assert np.all(np.diff(widths, axis=0) > 0)


def test_oracle_coverage_equals_standardized_statistic(dens):
    n = 5000
    w = StatisticWindow.default(n)
    C = c_fl(w, dens)
    for i in range(20):
        fhat, _ = grenander_type(sample(dens, n, SeedSpec(77, i)))
        T = sup_statistic_function_scale(fhat, dens, w, n, TAILS, C)
        band = confidence_band(fhat, OracleDerivatives(dens), w, n, 0.9, C, TAILS)
        assert band.covers(dens.f) == (T <= gumbel_quantile(0.9))


def test_degenerate_band():
    class Flat:
        def fprime(self, t):
            return np.zeros(np.shape(t))

        def Lprime(self, t):
            return np.ones(np.shape(t))

    fhat = LeftContStep([], [1.0])
    with pytest.raises(DegenerateBandError):
        confidence_band(fhat, Flat(), StatisticWindow(0, 1, 0.1, 0.1), 1000, 0.9, 2.0, TAILS)


def test_plugin_derivatives(dens):
    n = 50_000
    fhat, _ = grenander_type(sample(dens, n, SeedSpec(5)))
    d = PluginDerivatives.from_estimate(fhat, n)
    t = np.linspace(0.2, 0.8, 7)
    np.testing.assert_allclose(d.fprime(t), -1.0, atol=0.35)
    np.testing.assert_allclose(d.Lprime(t), dens.f(t), atol=0.1)
    const = PluginDerivatives.from_estimate(fhat, n, sigma2=0.25)
    np.testing.assert_array_equal(const.Lprime(t), 0.25)
