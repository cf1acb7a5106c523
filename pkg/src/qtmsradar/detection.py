"""Detection with ``rho_hat`` as the test statistic: thresholds, ROC curves, tail bound.

A detection is declared when ``rho_hat > T``.  Under the Rice law the null
(``rho = 0``) is Rayleigh, so ``p_FA(T) = exp(-N T^2)`` and

    p_D(p_FA | rho, N) = Q1(rho sqrt(2N) / (1 - rho^2), sqrt(-2 ln p_FA) / (1 - rho^2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rice import RhoModel
from .special import log_marcum_q1, marcum_q1

TINY = 1e-300


def default_pfa_grid(points: int = 200, lowest: float = 1e-7) -> np.ndarray:
    """Log-spaced false-alarm grid over ``[lowest, 1)``."""
    return np.logspace(math.log10(lowest), 0.0, points + 1)[:-1]


def _check_pfa(p_fa):
    p = np.asarray(p_fa, dtype=float)
    if np.any(~(p > 0.0)) or np.any(~(p < 1.0)):
        raise ValueError("p_fa must lie strictly inside (0, 1)")
    return p


def threshold_for_pfa(p_fa, n: int):
    """``T = sqrt(-ln(p_FA) / N)``."""
    p = _check_pfa(p_fa)
    if int(n) < 1:
        raise ValueError("n must be >= 1")
    t = np.sqrt(-np.log(p) / n)
    return float(t) if np.ndim(t) == 0 else t


def pfa_for_threshold(threshold, n: int):
    """``p_FA = exp(-N T^2)``."""
    t = np.asarray(threshold, dtype=float)
    if np.any(t < 0):
        raise ValueError("threshold must be non-negative")
    p = np.exp(-n * t * t)
    return float(p) if np.ndim(p) == 0 else p


def _rice_args(m: RhoModel, p_fa):
    p = _check_pfa(p_fa)
    scale = 1.0 / (1.0 - m.rho**2)
    return m.rho * math.sqrt(2.0 * m.n) * scale, np.sqrt(-2.0 * np.log(p)) * scale


def pd_at(p_fa, m: RhoModel):
    """Detection probability at false-alarm rate ``p_fa`` (scalar or array)."""
    a, b = _rice_args(m, p_fa)
    return marcum_q1(a, b)


def pd_at_threshold(threshold, m: RhoModel):
    """``p_D(T) = Q1(rho k, T k)`` with ``k = sqrt(2N) / (1 - rho^2)``."""
    t = np.asarray(threshold, dtype=float)
    k = math.sqrt(2.0 * m.n) / (1.0 - m.rho**2)
    return marcum_q1(m.rho * k, t * k)


@dataclass(frozen=True)
class OperatingPoint:
    p_fa: float
    p_d: float
    threshold: float


@dataclass
class RocCurve:
    model: RhoModel
    points: list = field(default_factory=list)

    def __post_init__(self):
        p_fa = self.p_fa
        if np.any(np.diff(p_fa) <= 0):
            raise ValueError("ROC p_fa values must be strictly increasing")
        slack = 1e-12
        if np.any(np.diff(self.p_d) < -slack):
            raise ValueError("ROC p_d must be non-decreasing in p_fa")
        if np.any(self.p_d < p_fa - slack):
            raise ValueError("ROC falls below the chance line")

    @property
    def p_fa(self) -> np.ndarray:
        return np.array([pt.p_fa for pt in self.points], dtype=float)

    @property
    def p_d(self) -> np.ndarray:
        return np.array([pt.p_d for pt in self.points], dtype=float)

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([pt.threshold for pt in self.points], dtype=float)


def roc_curve(m: RhoModel, grid=None) -> RocCurve:
    """Analytic ROC over a strictly increasing ``p_fa`` grid in ``(0, 1)``."""
    grid = default_pfa_grid() if grid is None else np.asarray(grid, dtype=float)
    grid = _check_pfa(grid)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("p_fa grid must be a non-empty, strictly increasing 1-D sequence")
    pd = np.atleast_1d(pd_at(grid, m))
    thresholds = np.atleast_1d(threshold_for_pfa(grid, m.n))
    points = [OperatingPoint(float(f), float(d), float(t)) for f, d, t in zip(grid, pd, thresholds)]
    return RocCurve(m, points)


@dataclass(frozen=True)
class EmpiricalRoc:
    """Exceedance fractions per threshold; ``p_fa`` may repeat or be 0 or 1."""

    thresholds: np.ndarray
    p_fa: np.ndarray
    p_d: np.ndarray
    n_null: int
    n_alt: int


def empirical_roc(rho_null, rho_alt, thresholds) -> EmpiricalRoc:
    """Fraction of null and alternative ``rho_hat`` strictly above each threshold."""
    null = np.sort(np.asarray(rho_null, dtype=float).ravel())
    alt = np.sort(np.asarray(rho_alt, dtype=float).ravel())
    if null.size == 0 or alt.size == 0:
        raise ValueError("empirical_roc needs non-empty null and alternative samples")
    t = np.asarray(thresholds, dtype=float).ravel()
    # count of samples > T is size minus count of samples <= T
    p_fa = 1.0 - np.searchsorted(null, t, side="right") / null.size
    p_d = 1.0 - np.searchsorted(alt, t, side="right") / alt.size
    return EmpiricalRoc(t, p_fa, p_d, int(null.size), int(alt.size))


@dataclass(frozen=True)
class ExceedOneBound:
    """``P(rho_hat > 1)`` under the Rice law with its two exponential bounds.

    Linear values below 1e-300 are reported as 0; the ``log_*`` fields carry
    the exact natural logs.
    """

    exact: float
    bound: float
    loose_bound: float
    log_exact: float
    log_bound: float
    log_loose_bound: float


def _linear(log_value):
    value = math.exp(log_value) if log_value > -745.0 else 0.0
    return value if value >= TINY else 0.0


def prob_exceed_one_bound(m: RhoModel) -> ExceedOneBound:
    """``Q1(rho k, k)`` with ``k = sqrt(2N)/(1 - rho^2)``, against ``exp(-N/(1+rho)^2) <= exp(-N/4)``."""
    k = math.sqrt(2.0 * m.n) / (1.0 - m.rho**2)
    # at rho = 0 the bound is attained: Q1(0, sqrt(2N)) = exp(-N) exactly,
    # which sqrt-then-square rounding would blur
    log_exact = -float(m.n) if m.rho == 0.0 else log_marcum_q1(m.rho * k, k)
    log_bound = -m.n / (1.0 + m.rho) ** 2
    log_loose = -m.n / 4.0
    # the log bound is evaluated in closed form, so allow for rounding only
    if not log_exact <= log_bound * (1.0 - 1e-14):
        raise ArithmeticError(f"exact tail {log_exact} exceeds bound {log_bound}")
    if not log_bound <= log_loose:
        raise ArithmeticError("exp(-N/(1+rho)^2) exceeds exp(-N/4)")
    return ExceedOneBound(
        _linear(log_exact), _linear(log_bound), _linear(log_loose),
        log_exact, log_bound, log_loose,
    )
