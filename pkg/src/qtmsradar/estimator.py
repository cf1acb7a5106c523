"""Frobenius-norm fitting of the structured covariance to a sample covariance.

The objective ``||R(sigma1, sigma2, rho, phi) - S||_F`` separates once the
cross block is written as ``c = rho s1 s2 cos(phi)``, ``s = rho s1 s2 sin(phi)``:
the diagonal blocks fix ``sigma1^2 = (S11 + S22)/2`` and ``sigma2^2 =
(S33 + S44)/2``, and the cross block fixes ``c`` and ``s`` as averages of the
two entries carrying each of them.  :func:`fit_closed_form` uses that;
:func:`fit_numeric` minimizes the same objective with a bounded least-squares
solver and serves as the independent check.

For a genuine (PSD) sample covariance, ``c + i s`` is the average of
``z1 * z2`` with ``z1 = I1 + i Q1`` and ``z2 = I2 + i Q2`` (times 1/2), so
Cauchy-Schwarz gives ``rho_hat <= 1``; the clamp only fires on hand-built or
otherwise non-PSD inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .covariance import ModelParams, RadarFamily, _structured, wrap_phase
from .errors import ConvergenceError, DegenerateInput
from .sampling import SampleCov


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    residual: float
    clamped: bool = False

    def as_dict(self) -> dict:
        return {**self.params.as_dict(), "residual": self.residual, "clamped": self.clamped}

    @property
    def rho(self) -> float:
        return self.params.rho


def _matrix(s) -> np.ndarray:
    if isinstance(s, SampleCov):
        return s.matrix
    return SampleCov(np.asarray(s, dtype=float), 1).matrix


def _cross_terms(m, family):
    """``(c_hat, s_hat)`` from the 2x2 cross block; ``m`` may be batched."""
    if RadarFamily.parse(family) is RadarFamily.QTMS:
        c = 0.5 * (m[..., 0, 2] - m[..., 1, 3])
        s = 0.5 * (m[..., 0, 3] + m[..., 1, 2])
    else:
        c = 0.5 * (m[..., 0, 2] + m[..., 1, 3])
        s = 0.5 * (m[..., 0, 3] - m[..., 1, 2])
    return c, s


def closed_form_batch(mats, family=RadarFamily.QTMS):
    """Vectorized closed-form fit over a stack of ``(..., 4, 4)`` matrices.

    Returns ``(sigma1, sigma2, rho, phi, clamped)`` arrays.  Raises
    :class:`DegenerateInput` if any matrix has a zero diagonal block next to
    a nonzero cross block.
    """
    m = np.asarray(mats, dtype=float)
    sigma1 = np.sqrt(np.clip(0.5 * (m[..., 0, 0] + m[..., 1, 1]), 0.0, None))
    sigma2 = np.sqrt(np.clip(0.5 * (m[..., 2, 2] + m[..., 3, 3]), 0.0, None))
    c, s = _cross_terms(m, family)
    scale = sigma1 * sigma2
    zero_power = scale == 0.0
    if np.any(zero_power):
        cross_nonzero = np.any(m[..., :2, 2:] != 0.0, axis=(-2, -1))
        if np.any(zero_power & cross_nonzero):
            raise DegenerateInput("zero-power diagonal block with a nonzero cross block")
    amp = np.hypot(c, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(zero_power, 0.0, amp / np.where(zero_power, 1.0, scale))
    phi = np.where(rho == 0.0, 0.0, np.arctan2(s, c))
    clamped = rho > 1.0
    rho = np.where(clamped, 1.0, rho)
    # atan2 returns [-pi, pi]; map -pi onto pi
    phi = np.where(phi <= -math.pi, math.pi, phi)
    return sigma1, sigma2, rho, phi, clamped


def objective(params: ModelParams, s, family=RadarFamily.QTMS) -> float:
    """Frobenius distance between the structured matrix and ``s``."""
    r = _structured(params.sigma1, params.sigma2, params.rho, params.phi, family)
    return float(np.linalg.norm(r - _matrix(s)))


def fit_closed_form(s, family=RadarFamily.QTMS) -> FitResult:
    """Exact minimizer of the Frobenius objective, projected onto ``rho <= 1``.

    When the clamp is inactive the result is the global minimizer.  When the
    unconstrained ``rho`` exceeds 1 it is reported as 1 with ``clamped=True``;
    this is not the constrained optimum (see :func:`fit_numeric`).  At
    ``rho_hat == 0`` the phase is unidentifiable and is set to 0.
    """
    m = _matrix(s)
    sigma1, sigma2, rho, phi, clamped = closed_form_batch(m, family)
    params = ModelParams(float(sigma1), float(sigma2), float(rho), float(phi))
    return FitResult(params, objective(params, m, family), bool(clamped))


def _pattern(phi, family):
    # cross block per unit rho*s1*s2, and its phi derivative
    cph, sph = math.cos(phi), math.sin(phi)
    if RadarFamily.parse(family) is RadarFamily.QTMS:
        p = np.array([[cph, sph], [sph, -cph]])
        dp = np.array([[-sph, cph], [cph, sph]])
    else:
        p = np.array([[cph, sph], [-sph, cph]])
        dp = np.array([[-sph, cph], [-cph, -sph]])
    return p, dp


def _jacobian(theta, family):
    s1, s2, rho, phi = theta
    p, dp = _pattern(phi, family)
    jac = np.zeros((4, 4, 4))

    def put_cross(k, block):
        jac[:2, 2:, k] = block
        jac[2:, :2, k] = block.T

    jac[0, 0, 0] = jac[1, 1, 0] = 2.0 * s1
    put_cross(0, rho * s2 * p)
    jac[2, 2, 1] = jac[3, 3, 1] = 2.0 * s2
    put_cross(1, rho * s1 * p)
    put_cross(2, s1 * s2 * p)
    put_cross(3, rho * s1 * s2 * dp)
    return jac.reshape(16, 4)


def _gauss_newton_polish(theta, resid, family, lower, upper, steps=10):
    # trf compares cost values, which stop resolving parameters near
    # sqrt(eps) when the residual at the optimum is not small.  Plain
    # Gauss-Newton steps use only J^T r and keep converging below that.
    start_cost = float(np.dot(resid(theta), resid(theta)))
    best = theta
    last = np.inf
    for _ in range(steps):
        step = np.linalg.lstsq(_jacobian(best, family), -resid(best), rcond=None)[0]
        size = float(np.max(np.abs(step)))
        if not size < last:
            break
        trial = best + step
        if np.any(trial < lower) or np.any(trial > upper):
            break
        best, last = trial, size
        if size <= 1e-15 * (1.0 + float(np.max(np.abs(best)))):
            break
    cost = float(np.dot(resid(best), resid(best)))
    return best if cost <= start_cost * (1.0 + 1e-12) else theta


def fit_numeric(s, family=RadarFamily.QTMS, tol=1e-12, x0=None, max_nfev=2000) -> FitResult:
    """Bounded least-squares minimization of the Frobenius objective.

    Box constraints ``sigma1, sigma2 >= 0`` and ``0 <= rho <= 1``; ``phi`` is
    left free and wrapped afterwards.  Starts from :func:`fit_closed_form`
    unless ``x0 = (sigma1, sigma2, rho, phi)`` is given.  The iteration stops
    when relative changes fall below ``tol``; an interior solution is then
    refined with Gauss-Newton steps.
    """
    m = _matrix(s)
    family = RadarFamily.parse(family)
    if x0 is None:
        start = fit_closed_form(m, family).params
        x0 = (start.sigma1, start.sigma2, start.rho, start.phi)
    x0 = np.array(x0, dtype=float)
    lower = np.array([0.0, 0.0, 0.0, -np.inf])
    upper = np.array([np.inf, np.inf, 1.0, np.inf])
    x0 = np.clip(x0, lower, upper)
    target = m.ravel()

    def resid(theta):
        return _structured(*theta, family).ravel() - target

    tol = max(float(tol), 1e-15)
    sol = least_squares(
        resid,
        x0,
        jac=lambda theta: _jacobian(theta, family),
        bounds=(lower, upper),
        method="trf",
        ftol=tol,
        xtol=tol,
        gtol=tol,
        max_nfev=max_nfev,
    )
    theta = sol.x
    if not np.any(sol.active_mask):
        theta = _gauss_newton_polish(theta, resid, family, lower, upper)
    s1, s2, rho, phi = theta
    at_upper = sol.active_mask[2] == 1 or rho >= 1.0
    if at_upper:
        rho = 1.0
    if rho == 0.0:
        phi = 0.0
    params = ModelParams(max(s1, 0.0), max(s2, 0.0), min(max(rho, 0.0), 1.0), wrap_phase(phi))
    result = FitResult(params, objective(params, m, family), bool(at_upper))
    if sol.status == 0:
        raise ConvergenceError("fit_numeric hit the evaluation cap", best=result)
    return result


def rho_series(records, window: int, family=RadarFamily.QTMS) -> np.ndarray:
    """``rho_hat`` for each consecutive non-overlapping window of snapshots.

    ``records`` is an ``(n, 4)`` array; a trailing partial window is dropped.
    """
    x = np.asarray(records, dtype=float)
    window = int(window)
    if window < 4:
        raise ValueError("window must be >= 4")
    if x.ndim != 2 or x.shape[1] != 4:
        raise ValueError(f"records must have shape (n, 4), got {x.shape}")
    count = x.shape[0] // window
    if count == 0:
        raise ValueError(f"window {window} exceeds record length {x.shape[0]}")
    blocks = x[: count * window].reshape(count, window, 4)
    mats = np.einsum("kni,knj->kij", blocks, blocks) / window
    mats = 0.5 * (mats + np.swapaxes(mats, -1, -2))
    return closed_form_batch(mats, family)[2]
