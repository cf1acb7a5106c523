"""Acceptance criteria 1-7, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line (outside pytest's
capture) before asserting, so ``pytest -v`` output doubles as the report.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtmsradar.covariance import ModelParams, RadarFamily, build_cov, check_psd, q1_flip, wrap_phase
from qtmsradar.detection import pd_at, prob_exceed_one_bound, roc_curve, threshold_for_pfa
from qtmsradar.estimator import fit_closed_form, fit_numeric
from qtmsradar.harness import DESK_ROWS, CampaignConfig, format_table, roc_report, run_campaign, table1_report
from qtmsradar.rice import RhoModel, _score, rho_model_params, rice_cdf, rice_mle, rice_pdf
from qtmsradar.sampling import RngStream, draw_wishart_sample_cov, sample_covariance, draw_snapshots
from qtmsradar.special import bessel_i0, marcum_q1

from oracles import i0_series, marcum_quad

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok
    return emit


def test_criterion_1_table_reproduction(report):
    rows = table1_report(DESK_ROWS, trials=5000, seed=0)
    failed = [(r.rho, r.n) for r in rows if not r.passed]
    ok = len(rows) == 10 and not failed and all(r.mean_ok is not None for r in rows)
    report(1, ok, f"{len(rows)} desk rows x 5000 trials, mean within 3 SE and std within 10%; "
                  f"failures: {failed or 'none'}")
    if not ok:
        print(format_table(rows))
    assert ok


def test_criterion_2_rice_parameter_law(report):
    bad = []
    worst_a = worst_b = 0.0
    for k, (rho, n) in enumerate([(r, n) for r in (0.1, 0.5, 0.8) for n in (10_000, 100_000)]):
        cfg = CampaignConfig(ModelParams(0.5, 2, rho, 0), n, 5000, master_seed=100 + k)
        x = run_campaign(cfg).rho_hats
        fit = rice_mle(x)
        _, _, h = _score(x, fit.alpha, fit.beta)
        se = math.sqrt(np.linalg.inv(-h * x.size)[0, 0])
        beta_pred = (1 - rho * rho) / math.sqrt(2 * n)
        tol_a = max(3 * se, 0.02 * rho)
        da, db = abs(fit.alpha - rho), abs(fit.beta / beta_pred - 1)
        worst_a = max(worst_a, da / tol_a)
        worst_b = max(worst_b, db)
        if da > tol_a or db > 0.05:
            bad.append((rho, n, fit.alpha, fit.beta))
    report(2, not bad, f"6 (rho, N) cells; worst |alpha err|/tol = {worst_a:.3f}, "
                       f"worst beta rel err = {worst_b:.4f}; failures: {bad or 'none'}")
    assert not bad


def test_criterion_3_roc(report):
    worst = 0.0
    for rho in np.linspace(0.0, 0.98, 50):
        m = RhoModel(float(rho), 50_000)
        grid = np.logspace(-9, -1e-4, 50)
        comp = 1 - rice_cdf(threshold_for_pfa(grid, m.n), rho_model_params(m))
        worst = max(worst, float(np.max(np.abs(pd_at(grid, m) - comp))))
    rep = roc_report(RhoModel(0.0127, 50_000), trials=5000, seed=11)
    ok = worst <= 1e-10 and rep.within_envelope
    report(3, ok, f"composition max error {worst:.2e} on 50x50 grid; Monte Carlo ROC "
                  f"(rho=0.0127, N=50000, 5000 trials) within 3-sigma envelope: "
                  f"{rep.within_envelope} (max |dp_d| {rep.max_dev_pd:.4f})")
    assert ok


def test_criterion_4_exceedance_bound(report):
    violations = 0
    count = 0
    for rho in np.linspace(0.0, 0.99, 100):
        for n in range(8, 513):
            # raises ArithmeticError if the ordering fails
            b = prob_exceed_one_bound(RhoModel(float(rho), n))
            count += 1
            if not b.log_exact <= b.log_bound <= b.log_loose_bound:
                violations += 1
    b100 = [prob_exceed_one_bound(RhoModel(r, 100)) for r in (0.0, 0.5, 0.99)]
    exact_25 = all(b.log_loose_bound == -25.0 for b in b100)
    value_ok = math.isclose(math.exp(-25.0), 1.39e-11, rel_tol=5e-3)
    ok = violations == 0 and exact_25 and value_ok
    report(4, ok, f"{count} (rho, N) points, {violations} ordering violations; "
                  f"N=100 log bound == -25 exactly: {exact_25}, exp(-25) = {math.exp(-25):.3e}")
    assert ok


DYADIC = [ModelParams(s1, s2, r, 0.0) for s1 in (0.25, 0.5, 1.0, 2.0, 8.0)
          for s2 in (0.5, 1.0, 4.0) for r in (0.0, 0.125, 0.5, 0.75, 1.0)]


def test_criterion_5_estimator_oracle(report):
    gen = np.random.default_rng(5)
    worst = 0.0
    done = 0
    while done < 1000:
        p = ModelParams(gen.uniform(0.2, 3), gen.uniform(0.2, 3), gen.uniform(0.05, 0.95),
                        gen.uniform(-math.pi, math.pi))
        n = int(10 ** gen.uniform(2, 5))
        family = RadarFamily.QTMS if done % 2 == 0 else RadarFamily.NOISE
        s = draw_wishart_sample_cov(build_cov(p, family), n, RngStream(55, done))
        cf = fit_closed_form(s, family)
        if cf.clamped:
            continue
        q = cf.params
        # start the oracle away from the answer
        x0 = (1.3 * q.sigma1, 0.8 * q.sigma2, 0.7 * q.rho + 0.1, q.phi + 0.4)
        num = fit_numeric(s, family, x0=x0).params
        d = max(abs(num.sigma1 - q.sigma1), abs(num.sigma2 - q.sigma2), abs(num.rho - q.rho),
                abs(wrap_phase(num.phi - q.phi)))
        worst = max(worst, d)
        done += 1
    exact = all(fit_closed_form(build_cov(p, f), f).residual == 0.0
                and fit_closed_form(build_cov(p, f), f).params == p
                for p in DYADIC for f in RadarFamily)
    ok = worst <= 1e-9 and exact
    report(5, ok, f"1000 unclamped Wishart draws, worst closed-form vs numeric difference "
                  f"{worst:.2e}; fixed point residual exactly 0 on {2 * len(DYADIC)} "
                  f"structured inputs: {exact}")
    assert ok


def test_criterion_6_special_functions(report):
    xs = np.concatenate([-np.linspace(0, 20, 21), np.linspace(0, 30, 61), np.geomspace(30, 700, 40)])
    i0_err = max(float(abs(bessel_i0(x) - i0_series(x)) / i0_series(x)) for x in xs)
    grid = [(a, b) for a in (0.0, 0.1, 1.0, 2.5, 7.0, 20.0, 60.0)
            for b in (0.05, 0.9, 2.0, 6.0, 19.0, 24.0, 61.0)]
    q_err = max(abs(marcum_q1(a, b) - float(marcum_quad(a, b))) for a, b in grid)
    ok = i0_err <= 1e-10 and q_err <= 1e-10
    report(6, ok, f"I0 max relative error {i0_err:.1e} over {xs.size} points (series oracle); "
                  f"Q1 max absolute error {q_err:.1e} over {len(grid)} points (quadrature oracle)")
    assert ok


def _property_checks():
    fam = st.sampled_from(list(RadarFamily))
    params = st.builds(ModelParams, st.floats(0, 20), st.floats(0, 20), st.floats(0, 1),
                       st.floats(-7, 7))
    checks = {}

    @given(params, fam)
    def psd_closure(p, f):
        m = build_cov(p, f)
        assert np.array_equal(m, m.T) and check_psd(m)

    @given(params)
    def flip(p):
        assert np.array_equal(q1_flip(build_cov(p, RadarFamily.NOISE)), build_cov(p, RadarFamily.QTMS))

    @given(st.floats(0.05, 20), st.floats(-math.pi, math.pi), st.integers(0, 10**6), fam)
    def equivariance(k, theta, seed, f):
        x = draw_snapshots(build_cov(ModelParams(0.5, 2, 0.4, 1.0), f), 64, RngStream(seed))
        y = k * x.copy()
        c, s = math.cos(theta), math.sin(theta)
        y[:, 2], y[:, 3] = c * k * x[:, 2] - s * k * x[:, 3], s * k * x[:, 2] + c * k * x[:, 3]
        a = fit_closed_form(sample_covariance(x), f).params
        b = fit_closed_form(sample_covariance(y), f).params
        assert math.isclose(b.sigma1, k * a.sigma1, rel_tol=1e-12)
        assert math.isclose(b.sigma2, k * a.sigma2, rel_tol=1e-12)
        assert math.isclose(b.rho, a.rho, rel_tol=1e-12)
        assert abs(wrap_phase(b.phi - a.phi - theta)) <= 1e-11

    @settings(max_examples=25)
    @given(st.floats(0, 5), st.floats(0.01, 2))
    def rice_norm(alpha, beta):
        from qtmsradar.rice import RiceParams
        from scipy import integrate
        p = RiceParams(alpha, beta)
        hi = alpha + 12 * beta
        pts = [q for q in (alpha - 6 * beta, alpha, alpha + 6 * beta) if 0 < q < hi]
        total = integrate.quad(lambda x: rice_pdf(x, p), 0, hi, points=pts or None,
                               epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        assert abs(total - 1) <= 1e-8
        x = np.linspace(0, hi, 17)
        ray = x / beta**2 * np.exp(-x * x / (2 * beta**2))
        assert np.allclose(rice_pdf(x, RiceParams(0.0, beta)), ray, rtol=1e-13, atol=0)

    @settings(max_examples=25)
    @given(st.floats(0, 0.3), st.floats(0, 0.3), st.integers(10, 200_000))
    def roc_order(r1, r2, n):
        lo, hi = sorted((r1, r2))
        a, b = roc_curve(RhoModel(lo, n), np.logspace(-7, -0.01, 25)), \
            roc_curve(RhoModel(hi, n), np.logspace(-7, -0.01, 25))
        assert np.all(np.diff(a.p_d) >= -1e-14) and np.all(a.p_d >= a.p_fa * (1 - 1e-12))
        assert np.all(b.p_d >= a.p_d - 1e-14)

    @settings(max_examples=10)
    @given(st.integers(0, 2**63 - 1), st.integers(1, 4))
    def reproducible(seed, workers):
        c1 = CampaignConfig(ModelParams(0.5, 2, 0.1, 0), 1000, 40, master_seed=seed)
        c2 = CampaignConfig(ModelParams(0.5, 2, 0.1, 0), 1000, 40, master_seed=seed, workers=workers)
        assert run_campaign(c1).rho_hats.tobytes() == run_campaign(c2).rho_hats.tobytes()

    for name, fn in [("PSD closure", psd_closure), ("Q1-flip equivalence", flip),
                     ("scale/phase equivariance", equivariance),
                     ("Rice normalization + Rayleigh reduction", rice_norm),
                     ("ROC monotonicity + dominance", roc_order),
                     ("bitwise reproducibility", reproducible)]:
        try:
            fn()
            checks[name] = True
        except Exception as exc:  # noqa: BLE001 - recorded and re-raised below
            checks[name] = exc
    return checks


def test_criterion_7_property_suites(report):
    checks = _property_checks()
    failed = [k for k, v in checks.items() if v is not True]
    report(7, not failed, f"{len(checks)} property suites; failed: {failed or 'none'}")
    for k in failed:
        raise AssertionError(f"{k}: {checks[k]!r}")
