import math

import mpmath
import numpy as np
import pytest
from hypothesis import example, given
from hypothesis import strategies as st
from scipy import integrate, stats

from qtmsradar.errors import ConvergenceError, DegenerateInput, InvalidParams
from qtmsradar.rice import (
    RhoModel,
    RiceParams,
    _score,
    log_likelihood,
    moment_init,
    normal_limit_check,
    rho_model_params,
    rice_cdf,
    rice_cdf_rho,
    rice_logpdf,
    rice_mle,
    rice_mle_full,
    rice_pdf,
    rice_sample,
    rice_sf,
)
from qtmsradar.harness import TABLE_I

from oracles import i0_series

GRID = [RiceParams(a, b) for a in (0.0, 0.005, 0.1, 0.5, 3.0) for b in (0.001, 0.007, 0.2, 1.0)]


def test_pdf_rayleigh_example():
    assert rice_pdf(1.0, RiceParams(0, 1)) == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert rice_pdf(1.0, RiceParams(0, 1)) == pytest.approx(0.6065306597, abs=1e-10)


def test_pdf_unit_example_against_series_oracle():
    expected = math.exp(-1.0) * float(i0_series(1.0))
    assert expected == pytest.approx(0.4657596076, abs=1e-10)
    assert rice_pdf(1.0, RiceParams(1, 1)) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("p", GRID[:6])
def test_pdf_zero_at_origin(p):
    assert rice_pdf(0.0, p) == 0.0


def test_pdf_domain():
    with pytest.raises(ValueError):
        rice_pdf(-0.1, RiceParams(1, 1))
    with pytest.raises(ValueError):
        rice_cdf(-1e-9, RiceParams(1, 1))
    with pytest.raises(InvalidParams):
        RiceParams(-1, 1)
    with pytest.raises(InvalidParams):
        RiceParams(1, 0)


def test_pdf_large_ratio_finite():
    # alpha/beta ~ 300 where an unscaled I0 overflows
    p = rho_model_params(RhoModel(0.8, 100_000))
    assert p.ratio > 300
    v = rice_pdf(np.array([0.79, 0.8, 0.81]), p)
    assert np.all(np.isfinite(v)) and v[1] > 0
    assert v[1] == pytest.approx(1 / (p.beta * math.sqrt(2 * math.pi)), rel=0.01)


@pytest.mark.parametrize("p", GRID)
def test_normalization(p):
    hi = p.alpha + 12 * p.beta
    pts = [max(0.0, p.alpha - 6 * p.beta), p.alpha, p.alpha + 6 * p.beta]
    pts = [q for q in pts if 0 < q < hi]
    total, _ = integrate.quad(lambda x: rice_pdf(x, p), 0, hi, points=pts or None,
                              epsabs=1e-13, epsrel=1e-13, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)


@given(st.floats(0.0, 50.0), st.floats(0.01, 10.0))
@example(25.9375, 0.75)
def test_rayleigh_reduction(x, beta):
    p = RiceParams(0.0, beta)
    y = x * x / (2 * beta * beta)
    expected = float(mpmath.mpf(x) / mpmath.mpf(beta) ** 2 * mpmath.exp(-mpmath.mpf(y)))
    # exp(-y) carries relative error ~ y * eps from the rounded exponent
    assert rice_pdf(x, p) == pytest.approx(expected, rel=1e-15 * (8 + y), abs=1e-300)
    assert rice_cdf(x, p) == pytest.approx(1 - math.exp(-x * x / (2 * beta * beta)), abs=1e-14)


def test_pdf_matches_scipy_rice():
    for p in GRID:
        if p.alpha / p.beta > 50:
            continue  # scipy's unscaled path loses accuracy out there
        x = np.linspace(0, p.alpha + 8 * p.beta, 50)
        ref = stats.rice.pdf(x, p.alpha / p.beta, scale=p.beta)
        assert np.allclose(rice_pdf(x, p), ref, rtol=1e-9, atol=1e-12 / p.beta)


def test_logpdf_consistent():
    p = RiceParams(0.5, 0.005)
    x = np.linspace(0.47, 0.53, 11)
    assert np.allclose(np.exp(rice_logpdf(x, p)), rice_pdf(x, p), rtol=1e-12)
    assert rice_logpdf(0.0, p) == -math.inf


@pytest.mark.parametrize("p", GRID)
def test_cdf_derivative_matches_pdf(p):
    x = np.linspace(p.beta * 0.05, p.alpha + 6 * p.beta, 80)
    h = 1e-4 * p.beta
    fd = (rice_cdf(x + h, p) - rice_cdf(x - h, p)) / (2 * h)
    pdf = rice_pdf(x, p)
    # absolute error on the density scale 1/beta
    assert np.max(np.abs(fd - pdf)) * p.beta <= 1e-6


@pytest.mark.parametrize("p", GRID)
def test_cdf_limits_and_monotone(p):
    x = np.linspace(0, p.alpha + 15 * p.beta, 200)
    f = rice_cdf(x, p)
    assert f[0] == 0.0
    assert f[-1] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(f) >= -1e-15)
    assert np.allclose(rice_sf(x, p), 1 - f, atol=1e-15)


def test_cdf_rho_form():
    m = RhoModel(0.0, 1234)
    x = np.linspace(0, 0.1, 30)
    assert np.allclose(rice_cdf_rho(x, m), 1 - np.exp(-m.n * x * x), atol=1e-15)
    m = RhoModel(0.3, 10_000)
    assert np.allclose(rice_cdf_rho(x + 0.25, m), rice_cdf(x + 0.25, rho_model_params(m)),
                       atol=1e-14)


def test_rho_model_params_examples():
    p = rho_model_params(RhoModel(0.0, 10_000))
    assert p.alpha == 0.0 and p.beta == pytest.approx(0.00707107, abs=1e-8)
    p = rho_model_params(RhoModel(0.1, 10_000))
    assert p.alpha == 0.1 and p.beta == pytest.approx(0.0070004, abs=1e-7)
    # reference fit for this row: alpha=0.099970, beta=0.007006
    assert TABLE_I[(0.1, 10_000)][2:] == (0.099970, 0.007006)
    assert p.beta == pytest.approx(0.007006, rel=0.01)
    p = rho_model_params(RhoModel(0.5, 100_000))
    assert p.beta == pytest.approx(0.0016771, abs=1e-7)
    assert p.beta == pytest.approx(TABLE_I[(0.5, 100_000)][3], rel=0.01)


@given(st.floats(0.0, 0.999), st.integers(1, 10**7))
def test_ratio_law(rho, n):
    p = rho_model_params(RhoModel(rho, n))
    assert p.ratio == pytest.approx(rho * math.sqrt(2 * n) / (1 - rho * rho), rel=1e-14)


def test_rho_model_rejects():
    with pytest.raises(InvalidParams):
        RhoModel(1.0, 100)
    with pytest.raises(InvalidParams):
        RhoModel(0.5, 0)
    with pytest.raises(InvalidParams):
        RhoModel(0.5, 10.5)


def test_sampler_matches_cdf():
    p = RiceParams(0.02, 0.01)
    x = rice_sample(p, 20_000, np.random.default_rng(1))
    assert stats.kstest(x, lambda t: rice_cdf(t, p)).pvalue > 0.01


# -- MLE ---------------------------------------------------------------------

def test_mle_recovers_alpha():
    x = rice_sample(RiceParams(0.5, 0.005), 50_000, np.random.default_rng(2))
    fit = rice_mle_full(x)
    # Fisher information in the normal regime gives SE(alpha) ~ beta/sqrt(n)
    se = 0.005 / math.sqrt(50_000)
    assert abs(fit.params.alpha - 0.5) <= 3 * se
    assert fit.grad_norm <= 1e-8


@pytest.mark.parametrize("n", [1000, 10_000, 100_000])
@pytest.mark.parametrize("seed", range(5))
def test_mle_rayleigh_alpha_small(n, seed):
    beta = 0.01
    x = rice_sample(RiceParams(0.0, beta), n, np.random.default_rng(seed))
    fit = rice_mle(x)
    # alpha enters the Rayleigh likelihood at fourth order, so alpha_hat
    # shrinks like n^(-1/8) rather than n^(-1/2)
    assert fit.alpha <= 3 * beta * n ** -0.125
    # alpha and beta trade off along the flat direction; the second moment
    # alpha^2 + 2 beta^2 is what the sample pins down
    assert fit.alpha**2 + 2 * fit.beta**2 == pytest.approx(2 * beta**2, rel=0.1)


@pytest.mark.parametrize("seed", range(8))
def test_mle_beats_true_params(seed):
    gen = np.random.default_rng(100 + seed)
    true = RiceParams(gen.uniform(0, 0.05), gen.uniform(0.002, 0.02))
    x = rice_sample(true, 500, gen)
    fit = rice_mle(x)
    assert log_likelihood(x, fit) >= log_likelihood(x, true)


def test_mle_stationary():
    x = rice_sample(RiceParams(0.03, 0.01), 5000, np.random.default_rng(3))
    fit = rice_mle_full(x)
    _, g, h = _score(x, fit.params.alpha, fit.params.beta)
    assert math.hypot(g[0] * fit.params.beta, g[1]) <= 1e-8
    assert np.all(np.linalg.eigvalsh(h) < 0)


def test_score_gradient_matches_finite_differences():
    x = rice_sample(RiceParams(0.03, 0.01), 400, np.random.default_rng(8))
    a, b = 0.028, 0.011
    _, g, h = _score(x, a, b)
    da, dv = 1e-7, 1e-6
    ll = lambda a_, v_: _score(x, a_, math.exp(v_))[0]
    v = math.log(b)
    fd_a = (ll(a + da, v) - ll(a - da, v)) / (2 * da)
    fd_v = (ll(a, v + dv) - ll(a, v - dv)) / (2 * dv)
    assert g[0] == pytest.approx(fd_a, rel=1e-6)
    assert g[1] == pytest.approx(fd_v, rel=1e-6)
    fd_hav = (_score(x, a, math.exp(v + dv))[1][0] - _score(x, a, math.exp(v - dv))[1][0]) / (2 * dv)
    assert h[0, 1] == pytest.approx(fd_hav, rel=1e-5)


def test_mle_converges_at_huge_ratio():
    # alpha/beta ~ 2e4, as for rho_hat at rho = 0.99, N = 1e5
    true = RiceParams(0.99, 4.5e-5)
    x = rice_sample(true, 2000, np.random.default_rng(12))
    fit = rice_mle_full(x)
    assert fit.grad_norm <= 1e-8
    assert abs(fit.params.alpha - true.alpha) <= 4 * true.beta / math.sqrt(x.size)
    assert fit.params.beta == pytest.approx(true.beta, rel=4 / math.sqrt(2 * x.size))


@pytest.mark.slow
def test_mle_consistency_error_decreases():
    true = RiceParams(0.02, 0.01)
    errs = []
    for n in (1000, 10_000, 100_000):
        e = []
        for seed in range(10):
            fit = rice_mle(rice_sample(true, n, np.random.default_rng(seed)))
            e.append(math.hypot(fit.alpha - true.alpha, fit.beta - true.beta))
        errs.append(np.mean(e))
    assert errs[0] > errs[1] > errs[2]


def test_mle_init_and_moments():
    x = rice_sample(RiceParams(0.5, 0.005), 5000, np.random.default_rng(4))
    m = moment_init(x)
    assert m.alpha == pytest.approx(0.5, rel=0.01)
    a = rice_mle(x, init=RiceParams(0.4, 0.01))
    b = rice_mle(x)
    assert a.alpha == pytest.approx(b.alpha, rel=1e-9)
    assert a.beta == pytest.approx(b.beta, rel=1e-9)


def test_mle_rejects_degenerate():
    with pytest.raises(DegenerateInput):
        rice_mle(np.ones(9))
    with pytest.raises(DegenerateInput):
        rice_mle(np.full(20, 0.3))
    with pytest.raises(DegenerateInput):
        rice_mle(np.r_[np.ones(20), -1.0])
    assert issubclass(ConvergenceError, RuntimeError)


def test_mle_handles_exact_zero_sample():
    x = rice_sample(RiceParams(0.0, 1.0), 200, np.random.default_rng(5))
    x[0] = 0.0
    fit = rice_mle(x)
    assert math.isfinite(fit.beta)


# -- normal limit ------------------------------------------------------------

def test_normal_limit_high_ratio():
    d = normal_limit_check(RhoModel(0.99, 10_000))
    assert d.sup_distance <= 1e-3
    assert d.regime == "normal"
    assert d.ratio == pytest.approx(0.99 * math.sqrt(2e4) / (1 - 0.99**2))


def test_normal_limit_rayleigh():
    d = normal_limit_check(RhoModel(0.0, 5000))
    assert d.regime == "rayleigh"
    assert math.isnan(d.sup_distance)


def test_normal_limit_fails_at_low_ratio():
    d = normal_limit_check(RhoModel(0.005, 10_000))
    assert d.sup_distance > 0.1
    mean, _, alpha_hat, _ = TABLE_I[(0.005, 10_000)]
    assert (mean, alpha_hat) == (0.009982, 0.005180)
    assert abs(mean - alpha_hat) > 0.004
