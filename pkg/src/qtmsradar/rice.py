"""Rice distribution for ``rho_hat``: density, CDF, the ``(rho, N)`` parameter law, MLE.

The empirical law linking the estimator to the Rice family is

    alpha = rho,   beta = (1 - rho^2) / sqrt(2 N),

so ``alpha / beta = rho sqrt(2N) / (1 - rho^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import ndtr

from .errors import ConvergenceError, DegenerateInput, InvalidParams
from .special import bessel_i0e, i1_i0_complement, marcum_q1


@dataclass(frozen=True)
class RiceParams:
    alpha: float
    beta: float

    def __post_init__(self):
        alpha, beta = float(self.alpha), float(self.beta)
        if not (math.isfinite(alpha) and alpha >= 0.0):
            raise InvalidParams(f"alpha must be finite and >= 0, got {alpha}")
        if not (math.isfinite(beta) and beta > 0.0):
            raise InvalidParams(f"beta must be finite and > 0, got {beta}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def ratio(self) -> float:
        return self.alpha / self.beta


@dataclass(frozen=True)
class RhoModel:
    """True correlation ``rho`` in ``[0, 1)`` and integration count ``n``."""

    rho: float
    n: int

    def __post_init__(self):
        rho = float(self.rho)
        if not 0.0 <= rho < 1.0:
            raise InvalidParams(f"rho must lie in [0, 1), got {rho}")
        if int(self.n) < 1 or int(self.n) != self.n:
            raise InvalidParams(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "n", int(self.n))


def rho_model_params(m: RhoModel) -> RiceParams:
    return RiceParams(m.rho, (1.0 - m.rho**2) / math.sqrt(2.0 * m.n))


def _nonnegative(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("Rice distribution is supported on x >= 0")
    return arr


def rice_logpdf(x, p: RiceParams):
    x = _nonnegative(x)
    t = x * p.alpha / p.beta**2
    with np.errstate(divide="ignore"):
        out = (
            np.log(x)
            - 2.0 * math.log(p.beta)
            - (x - p.alpha) ** 2 / (2.0 * p.beta**2)
            + np.log(bessel_i0e(t))
        )
    return out


def rice_pdf(x, p: RiceParams):
    """``(x/b^2) exp(-(x^2 + a^2) / 2b^2) I0(x a / b^2)``, via scaled ``I0``."""
    x = _nonnegative(x)
    t = x * p.alpha / p.beta**2
    return x / p.beta**2 * np.exp(-((x - p.alpha) ** 2) / (2.0 * p.beta**2)) * bessel_i0e(t)


def rice_cdf(x, p: RiceParams):
    """``1 - Q1(alpha/beta, x/beta)``."""
    x = _nonnegative(x)
    return 1.0 - marcum_q1(p.alpha / p.beta, x / p.beta)


def rice_sf(x, p: RiceParams):
    x = _nonnegative(x)
    return marcum_q1(p.alpha / p.beta, x / p.beta)


def rice_cdf_rho(x, m: RhoModel):
    """CDF of ``rho_hat`` under the ``(rho, N)`` law.

    ``1 - Q1(rho sqrt(2N)/(1-rho^2), x sqrt(2N)/(1-rho^2))``.
    """
    x = _nonnegative(x)
    k = math.sqrt(2.0 * m.n) / (1.0 - m.rho**2)
    return 1.0 - marcum_q1(m.rho * k, x * k)


def rice_sample(p: RiceParams, size, rng: np.random.Generator) -> np.ndarray:
    """Draws ``|alpha + beta (Z1 + i Z2)|``."""
    z = rng.standard_normal((2,) + tuple(np.atleast_1d(size)))
    return np.hypot(p.alpha + p.beta * z[0], p.beta * z[1])


def log_likelihood(samples, p: RiceParams) -> float:
    return float(np.sum(rice_logpdf(samples, p)))


def _bessel_ratio(t):
    # q = 1 - I1(t)/I0(t) and dR/dt = 2q - q^2 - (1 - q)/t (series near 0)
    t = np.asarray(t, dtype=float)
    q = i1_i0_complement(t)
    small = t < 1e-4
    safe_t = np.where(small, 1.0, t)
    dr = np.where(small, 0.5 - 3.0 * t * t / 16.0, 2.0 * q - q * q - (1.0 - q) / safe_t)
    return q, dr


def _score(x, alpha, beta):
    """Mean log-likelihood, its gradient and Hessian in ``(alpha, log beta)``.

    Written in terms of ``q = 1 - I1/I0`` so that the gradient keeps its
    accuracy at ``alpha / beta`` in the thousands, where ``x r - alpha`` and
    ``(x^2 + alpha^2) / beta^2 - 2 t r`` are differences of huge terms.
    """
    w = 1.0 / beta**2
    t = x * alpha * w
    q, dr = _bessel_ratio(t)
    d = x - alpha
    ll = np.mean(np.log(x) - 2.0 * math.log(beta) - d * d * 0.5 * w + np.log(bessel_i0e(t)))
    g_a = w * np.mean(d - x * q)
    g_v = np.mean(-2.0 + d * d * w + 2.0 * t * q)
    h_aa = w * np.mean(x * x * w * dr - 1.0)
    h_av = -2.0 * w * np.mean(d - x * q + x * t * dr)
    h_vv = np.mean(-2.0 * d * d * w - 4.0 * t * q + 4.0 * t * t * dr)
    return ll, np.array([g_a, g_v]), np.array([[h_aa, h_av], [h_av, h_vv]])


def moment_init(samples) -> RiceParams:
    """Second/fourth moment match: ``alpha^4 = 2 m2^2 - m4``, ``beta^2 = (m2 - alpha^2)/2``."""
    x = np.asarray(samples, dtype=float)
    m2 = float(np.mean(x * x))
    m4 = float(np.mean(x**4))
    alpha = max(2.0 * m2 * m2 - m4, 0.0) ** 0.25
    beta2 = 0.5 * (m2 - alpha * alpha)
    if beta2 <= 0.0:
        beta2 = float(np.var(x))
    return RiceParams(alpha, math.sqrt(beta2))


@dataclass(frozen=True)
class MLEResult:
    params: RiceParams
    loglik: float
    grad_norm: float
    iterations: int


def rice_mle_full(samples, init: RiceParams | None = None, gtol: float = 1e-8) -> MLEResult:
    """Maximum-likelihood ``(alpha, beta)`` with convergence diagnostics.

    Newton trust-region iterations on ``(alpha / beta0, log beta)``.  The
    likelihood is even in ``alpha``, so ``alpha`` runs unconstrained and the
    absolute value is reported.  ``grad_norm`` is the gradient of the mean
    log-likelihood with the ``alpha`` component scaled by ``beta``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 10:
        raise DegenerateInput("rice_mle needs at least 10 samples")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DegenerateInput("samples must be finite and non-negative")
    if np.all(x == x[0]):
        raise DegenerateInput("samples are all identical")
    # zeros contribute log(0); nudge them to the smallest positive sample scale
    if np.any(x == 0.0):
        x = np.where(x == 0.0, np.min(x[x > 0]) * 1e-6, x)

    start = init if init is not None else moment_init(x)
    beta0 = start.beta
    alpha0 = start.alpha if start.alpha > 0 else 0.5 * beta0

    scale = np.array([beta0, 1.0])
    cache = {}

    def evaluate(theta):
        key = (float(theta[0]), float(theta[1]))
        if key not in cache:
            a, b = theta[0] * beta0, math.exp(theta[1])
            ll, g, h = _score(x, a, b)
            cache.clear()
            cache[key] = (-ll, -g * scale, -h * np.outer(scale, scale))
        return cache[key]

    theta0 = np.array([alpha0 / beta0, math.log(beta0)])
    sol = minimize(lambda t: evaluate(t)[0], theta0, jac=lambda t: evaluate(t)[1],
                   hess=lambda t: evaluate(t)[2], method="trust-exact",
                   options={"gtol": 1e-12, "maxiter": 200})
    theta = sol.x
    # trust-exact can stop on a noisy improvement ratio; finish with plain Newton
    for _ in range(20):
        f, g, h = evaluate(theta)
        if np.linalg.norm(g) <= 1e-13:
            break
        try:
            step = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError:
            break
        f_new, g_new, _ = evaluate(theta + step)
        if np.linalg.norm(g_new) >= np.linalg.norm(g) and f_new > f:
            break
        theta = theta + step
    a, b = theta[0] * beta0, math.exp(theta[1])
    ll, g, _ = _score(x, a, b)
    grad_norm = float(np.hypot(g[0] * b, g[1]))
    result = MLEResult(RiceParams(abs(a), b), float(ll * x.size), grad_norm, int(sol.nit))

    # alpha = 0 is always stationary with zero curvature in alpha; its
    # quartic term has the sign of m4 - 2 m2^2, so it is a local maximum
    # exactly when the moment estimate of alpha^4 is non-positive.  Newton
    # only creeps toward such a point, so it is added as an explicit candidate.
    candidates = [result] if result.grad_norm <= gtol else []
    m2 = float(np.mean(x * x))
    if 2.0 * m2 * m2 - float(np.mean(x**4)) <= 0.0:
        b_ray = math.sqrt(0.5 * m2)
        ll_ray, g_ray, _ = _score(x, 0.0, b_ray)
        candidates.append(MLEResult(RiceParams(0.0, b_ray), float(ll_ray * x.size),
                                    float(abs(g_ray[1])), int(sol.nit)))
    if not candidates:
        raise ConvergenceError(
            f"rice_mle did not converge (scaled gradient {result.grad_norm:.3g})", best=result
        )
    return max(candidates, key=lambda c: c.loglik)


def rice_mle(samples, init: RiceParams | None = None) -> RiceParams:
    return rice_mle_full(samples, init).params


@dataclass(frozen=True)
class LimitDiagnostic:
    """How close Rice(alpha, beta) is to its normal limit N(alpha, beta^2)."""

    ratio: float
    regime: str
    sup_distance: float


def normal_limit_check(m: RhoModel, points: int = 2001) -> LimitDiagnostic:
    """Sup-distance between the Rice CDF and the ``N(alpha, beta)`` CDF on a grid.

    At ``rho = 0`` the comparison is meaningless (the law is exactly
    Rayleigh); the diagnostic then reports ``regime="rayleigh"`` and a NaN
    distance.
    """
    p = rho_model_params(m)
    if p.alpha == 0.0:
        return LimitDiagnostic(0.0, "rayleigh", math.nan)
    lo = max(0.0, p.alpha - 10.0 * p.beta)
    grid = np.linspace(lo, p.alpha + 10.0 * p.beta, points)
    rice = rice_cdf(grid, p)
    normal = ndtr((grid - p.alpha) / p.beta)
    dist = float(np.max(np.abs(rice - normal)))
    regime = "normal" if dist <= 1e-2 else "intermediate"
    return LimitDiagnostic(p.ratio, regime, dist)
