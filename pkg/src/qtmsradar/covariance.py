"""Structured 4x4 covariance matrices for QTMS and noise radar signals.

Channel order is fixed everywhere as ``(I1, Q1, I2, Q2)``: index 0/1 are the
received in-phase/quadrature voltages, index 2/3 the recorded ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidParams

CHANNELS = ("i1", "q1", "i2", "q2")
DEFAULT_PSD_EPS = 1e-10

_Q1_FLIP = np.diag([1.0, -1.0, 1.0, 1.0])


class RadarFamily(str, Enum):
    QTMS = "qtms"
    NOISE = "noise"

    @classmethod
    def parse(cls, value) -> "RadarFamily":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def wrap_phase(phi: float) -> float:
    """Reduce an angle into ``(-pi, pi]``."""
    wrapped = math.remainder(phi, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class ModelParams:
    """``(sigma1, sigma2, rho, phi)`` of the structured covariance.

    ``phi`` is wrapped into ``(-pi, pi]`` on construction.
    """

    sigma1: float
    sigma2: float
    rho: float
    phi: float = 0.0

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "rho", "phi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidParams(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise InvalidParams("sigma1 and sigma2 must be non-negative")
        if not 0.0 <= self.rho <= 1.0:
            raise InvalidParams(f"rho must lie in [0, 1], got {self.rho}")
        object.__setattr__(self, "phi", wrap_phase(self.phi))

    def as_dict(self) -> dict:
        return {"sigma1": self.sigma1, "sigma2": self.sigma2, "rho": self.rho, "phi": self.phi}


def _structured(sigma1, sigma2, rho, phi, family):
    # no validation: the estimator evaluates this at arbitrary signed rho
    family = RadarFamily.parse(family)
    c = rho * sigma1 * sigma2 * math.cos(phi)
    s = rho * sigma1 * sigma2 * math.sin(phi)
    v1 = sigma1 * sigma1
    v2 = sigma2 * sigma2
    if family is RadarFamily.QTMS:
        cross = np.array([[c, s], [s, -c]])
    else:
        cross = np.array([[c, s], [-s, c]])
    m = np.zeros((4, 4))
    m[0, 0] = m[1, 1] = v1
    m[2, 2] = m[3, 3] = v2
    m[:2, 2:] = cross
    m[2:, :2] = cross.T
    return m


def build_cov(params: ModelParams, family=RadarFamily.QTMS) -> np.ndarray:
    """Covariance ``<x x^T>`` for ``x = (I1, Q1, I2, Q2)``.

    QTMS::

        [[s1^2, 0,    c,    s  ],
         [0,    s1^2, s,   -c  ],
         [c,    s,    s2^2, 0  ],
         [s,   -c,    0,    s2^2]]

    with ``c = rho s1 s2 cos(phi)`` and ``s = rho s1 s2 sin(phi)``.  The noise
    radar form moves the minus sign onto the ``(Q1, I2)`` entry.
    """
    if not isinstance(params, ModelParams):
        raise InvalidParams("params must be a ModelParams")
    return _structured(params.sigma1, params.sigma2, params.rho, params.phi, family)


def q1_flip(m) -> np.ndarray:
    """Negate the Q1 channel: ``D m D`` with ``D = diag(1, -1, 1, 1)``.

    Maps the noise-radar covariance onto the QTMS one and back.
    """
    m = np.asarray(m, dtype=float)
    return _Q1_FLIP @ m @ _Q1_FLIP


def check_symmetric(m, atol: float = 0.0) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if atol == 0.0:
        ok = np.array_equal(m, m.T)
    else:
        ok = np.allclose(m, m.T, rtol=0.0, atol=atol)
    if not ok:
        raise ValueError("matrix is not symmetric")
    return m


def symmetrize(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def psd_tolerance(m, eps: float = DEFAULT_PSD_EPS) -> float:
    """Absolute eigenvalue tolerance: ``eps`` times the largest diagonal entry."""
    scale = float(np.max(np.abs(np.diag(m)))) if np.size(m) else 0.0
    return eps * max(scale, 1.0e-300)


def check_psd(m, eps: float = DEFAULT_PSD_EPS) -> bool:
    """True iff the smallest eigenvalue of ``m`` is ``>= -eps * max|diag(m)|``."""
    m = check_symmetric(m)
    return bool(np.linalg.eigvalsh(m)[0] >= -psd_tolerance(m, eps))
